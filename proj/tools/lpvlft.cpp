// Command-line surface: realize scheduling functions from series data,
// transform parameter-varying models into fractional form, verify, compare,
// simulate, minimize and certify stability — all over the structured-text
// model files documented in the README.
//
// Exit codes: 0 success / property holds, 1 property verified false,
// 2 malformed input or contract violation (with an error category).

#include <algorithm>
#include <cstdint>
#include <exception>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "lpvlft/analysis.hpp"
#include "lpvlft/model.hpp"
#include "lpvlft/model_io.hpp"
#include "lpvlft/numeric.hpp"
#include "lpvlft/psi_expr.hpp"
#include "lpvlft/realize.hpp"
#include "lpvlft/transform.hpp"

namespace {

using namespace lpvlft;

constexpr double kVerifyTol = 1e-6;  // trajectory / spot-check acceptance

// ---- report plumbing ----

struct Report {
  std::string text;

  void line(const std::string& s) { text += s + "\n"; }
  void kv(const std::string& key, const std::string& value) {
    text += key + ": " + value + "\n";
  }
  void kv(const std::string& key, Index value) {
    kv(key, std::to_string(value));
  }
  void kv(const std::string& key, double value) { kv(key, format_double(value)); }
  void kv(const std::string& key, bool value) {
    kv(key, std::string(value ? "yes" : "no"));
  }

  void matrix(const std::string& name, const Matrix& m) {
    text += name + " (" + std::to_string(m.rows()) + "x" +
            std::to_string(m.cols()) + "):\n";
    for (Index r = 0; r < m.rows(); ++r) {
      text += " ";
      for (Index c = 0; c < m.cols(); ++c) text += " " + format_double(m(r, c));
      text += "\n";
    }
  }

  void finish(const std::string& path) const {
    std::cout << text;
    if (!path.empty()) save_text(path, text);
  }
};

std::string join_dims(const std::vector<Index>& dims) {
  std::string out = "(";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(dims[i]);
  }
  return out + ")";
}

std::string word_text(const Word& word) {
  if (word.empty()) return "eps";
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(word[i]);
  }
  return out;
}

// ---- file loading by kind ----

std::string kind_of_file(const std::string& path, std::string* text) {
  *text = load_text(path);
  return model_kind(*text);
}

FalpvModel load_falpv_file(const std::string& path) {
  std::string text;
  std::string kind = kind_of_file(path, &text);
  if (kind != "falpv")
    throw ContractError("'" + path + "' holds kind '" + kind +
                        "', expected 'falpv'");
  return parse_falpv(text);
}

LoadedLft load_lft_file(const std::string& path) {
  std::string text;
  std::string kind = kind_of_file(path, &text);
  if (kind != "lft")
    throw ContractError("'" + path + "' holds kind '" + kind +
                        "', expected 'lft'");
  return parse_lft(text);
}

// A scheduling-function source file: ready realization or series data.
struct LoadedPsiSource {
  PsiSource source{TaylorPsi{}};
  double lambda = 1.0;  // prescale already applied to a loaded realization
};

LoadedPsiSource load_psi_source_file(const std::string& path) {
  std::string text;
  std::string kind = kind_of_file(path, &text);
  LoadedPsiSource out;
  if (kind == "psi-realization") {
    LoadedPsiRealization loaded = parse_psi_realization(text);
    out.source = loaded.model;
    out.lambda = loaded.lambda;
  } else if (kind == "psi-taylor") {
    out.source = parse_psi_taylor(text);
  } else {
    throw ContractError("'" + path + "' holds kind '" + kind +
                        "', expected 'psi-realization' or 'psi-taylor'");
  }
  return out;
}

// Evaluator for the *unscaled* scheduling functions described by a source
// file: a realization R with prescale lambda evaluates as psi(p) = R(p / lambda).
PsiEvaluator evaluator_of_source(const LoadedPsiSource& loaded) {
  if (const auto* ready = std::get_if<PsiRealization>(&loaded.source)) {
    PsiRealization model = *ready;
    double lambda = loaded.lambda;
    return [model, lambda](const Vector& point) {
      return model.eval(point / lambda);
    };
  }
  const auto& taylor = std::get<TaylorPsi>(loaded.source);
  PsiRealizeResult realized = realize_psi(taylor.series, taylor.order_bound);
  PsiRealization model = realized.model;
  double lambda = realized.lambda;
  return [model, lambda](const Vector& point) {
    return model.eval(point / lambda);
  };
}

// The parameter-channel part of an assembled model, as a standalone LFT.
LftModel sigma_of_assembled(const AssembledLft& m) {
  Index nq = m.psi_dim();
  Matrix b(nq, m.nx + m.nu);
  b << m.gx(), m.gu();
  Matrix c(m.nx + m.ny, nq);
  c << m.hx(), m.hy();
  return LftModel(m.nx + m.ny, m.nx + m.nu, m.psi_blocks(), m.core(), b, c,
                  Matrix::Zero(m.nx + m.ny, m.nx + m.nu));
}

AssembledLft require_assembled(const LoadedLft& loaded, const std::string& path) {
  if (!loaded.assembled.has_value())
    throw ContractError("'" + path +
                        "' has no assembled plant metadata (nx/nu/ny/np)");
  return *loaded.assembled;
}

// ---- shared option set ----

struct Options {
  std::vector<std::string> files;
  std::string out;
  std::string report;
  int depth = -1;
  Index horizon = 50;
  int trials = 20;
  std::uint64_t seed = 1;
  bool fast_path = false;
};

// ---- subcommand bodies ----

int run_realize_psi(const Options& opt) {
  std::string text;
  std::string kind = kind_of_file(opt.files[0], &text);
  if (kind != "psi-taylor")
    throw ContractError("'" + opt.files[0] + "' holds kind '" + kind +
                        "', expected 'psi-taylor'");
  TaylorPsi taylor = parse_psi_taylor(text);
  PsiRealizeResult result = realize_psi(taylor.series, taylor.order_bound);

  Report report;
  report.line("realize-psi");
  report.kv("input", opt.files[0]);
  report.kv("functions", result.model.npsi());
  report.kv("parameters", result.model.np());
  report.kv("representation dim", result.representation_dim);
  report.kv("block dims", join_dims(result.model.lft.blocks.dims()));
  report.kv("argument scale", result.lambda);
  report.kv("stability margin", result.stability_margin);
  if (result.zero_series) report.line("warning: series is identically zero");
  if (!opt.out.empty()) {
    save_text(opt.out, serialize_psi_realization(result.model, result.lambda));
    report.kv("wrote", opt.out);
  }
  report.finish(opt.report);
  return 0;
}

int run_transform(const Options& opt) {
  FalpvModel sys = load_falpv_file(opt.files[0]);
  LoadedPsiSource psi = load_psi_source_file(opt.files[1]);

  TransformOptions options;
  options.fast_path = opt.fast_path;
  options.check_depth = opt.depth;
  options.pointwise_trials = opt.trials;
  options.seed = opt.seed;
  TransformResult result = transform(sys, psi.source, options);

  // Compose a prescale carried by the realization file with any scaling the
  // pipeline added on top: the loop divides by the total factor.
  result.model.lambda *= psi.lambda;
  result.report.lambda = result.model.lambda;

  const TransformReport& r = result.report;
  Report report;
  report.line("transform");
  report.kv("plant", opt.files[0]);
  report.kv("scheduling source", opt.files[1]);
  report.kv("fast path", r.fast_path);
  report.kv("scheduling realization dim", r.psi_dim);
  report.kv("scheduling stability margin", r.psi_stability_margin);
  report.kv("argument scale", r.lambda);
  report.kv("lifted dim", r.lifted_dim);
  report.kv("reduced dim", r.sigma_psi_dim);
  report.kv("reduced block dims", join_dims(r.psi_block_dims));
  report.kv("reduced part minimal", r.sigma_psi_minimal);
  report.kv("reduced part stable", r.sigma_psi_stable);
  if (r.sigma_psi_stable) report.kv("reduced part margin", r.sigma_psi_margin);
  report.kv("assembled minimal", r.assembled_minimal);
  report.kv("series check depth", static_cast<Index>(r.check_depth));
  report.kv("series check max error", r.max_series_error);
  report.kv("pointwise trials", static_cast<Index>(r.pointwise_trials));
  report.kv("pointwise max error", r.max_pointwise_error);
  if (!opt.out.empty()) {
    save_text(opt.out, serialize_assembled(result.model));
    report.kv("wrote", opt.out);
  }
  report.finish(opt.report);
  return 0;
}

int run_verify(const Options& opt) {
  FalpvModel sys = load_falpv_file(opt.files[0]);
  LoadedLft loaded = load_lft_file(opt.files[1]);
  AssembledLft assembled = require_assembled(loaded, opt.files[1]);
  LoadedPsiSource psi = load_psi_source_file(opt.files[2]);
  PsiEvaluator evaluate = evaluator_of_source(psi);

  if (assembled.nx != sys.nx || assembled.nu != sys.nu ||
      assembled.ny != sys.ny || assembled.np != sys.np)
    throw ContractError("assembled model dims do not match the plant");

  Report report;
  report.line("verify");
  report.kv("plant", opt.files[0]);
  report.kv("model", opt.files[1]);
  report.kv("scheduling source", opt.files[2]);
  report.kv("horizon", opt.horizon);
  report.kv("trials", static_cast<Index>(opt.trials));
  report.kv("seed", static_cast<Index>(opt.seed));
  if (opt.horizon == 0) report.line("warning: horizon 0 checks nothing");

  Rng rng(opt.seed);
  // Scheduling draws stay inside the scaled region the realization covers.
  double radius = 0.95 * std::min(1.0, assembled.lambda);

  double max_trajectory_error = 0.0;
  for (int trial = 0; trial < opt.trials; ++trial) {
    std::vector<Vector> u, p;
    for (Index t = 0; t < opt.horizon; ++t) {
      u.push_back(rng.vector(sys.nu));
      p.push_back(rng.vector(sys.np, -radius, radius));
    }
    Trajectory plant = simulate_falpv(sys, u, p, opt.horizon, evaluate);
    LoopSimulation loop = simulate_lft_loop(assembled, u, p, opt.horizon);
    for (Index t = 0; t < opt.horizon; ++t) {
      max_trajectory_error = std::max(
          max_trajectory_error,
          (plant.y[static_cast<std::size_t>(t)] -
           loop.trajectory.y[static_cast<std::size_t>(t)])
              .cwiseAbs()
              .maxCoeff());
    }
    max_trajectory_error =
        std::max(max_trajectory_error,
                 (plant.x.back() - loop.trajectory.x.back().head(sys.nx))
                     .cwiseAbs()
                     .maxCoeff());
  }
  report.kv("max trajectory error", max_trajectory_error);

  // Spot check of the coefficient identity at random parameter points.
  LftModel sigma = sigma_of_assembled(assembled);
  double max_point_error = 0.0;
  for (int trial = 0; trial < opt.trials; ++trial) {
    Vector point = rng.vector(sys.np, -radius, radius);
    Vector values = evaluate(point);
    Matrix expected = Matrix::Zero(sys.nx + sys.ny, sys.nx + sys.nu);
    for (Index l = 1; l <= sys.npsi(); ++l)
      expected += values(l - 1) * coefficient_block(sys, static_cast<int>(l));
    Matrix actual = star_product(
        sigma, delta_of_point(point / assembled.lambda, sigma.blocks));
    max_point_error =
        std::max(max_point_error, max_abs(Matrix(actual - expected)));
  }
  report.kv("coefficient spot-check max error", max_point_error);

  bool ok = max_trajectory_error <= kVerifyTol && max_point_error <= kVerifyTol;
  report.kv("tolerance", kVerifyTol);
  report.kv("verdict", std::string(ok ? "pass" : "FAIL"));
  report.finish(opt.report);
  return ok ? 0 : 1;
}

int run_compare(const Options& opt) {
  LoadedLft first = load_lft_file(opt.files[0]);
  LoadedLft second = load_lft_file(opt.files[1]);

  Report report;
  report.line("compare");
  report.kv("first", opt.files[0]);
  report.kv("second", opt.files[1]);
  report.kv("first dim", first.model.dim());
  report.kv("second dim", second.model.dim());

  EquivalenceResult eq =
      formal_equivalence(first.model, second.model, opt.depth);
  report.kv("formally equivalent", eq.equivalent);
  if (!eq.equivalent) {
    report.kv("separating word", word_text(*eq.counterexample));
    report.finish(opt.report);
    return 1;
  }

  MinimalityReport min1 = is_minimal(first.model);
  MinimalityReport min2 = is_minimal(second.model);
  report.kv("first minimal", min1.minimal);
  report.kv("second minimal", min2.minimal);
  if (min1.minimal && min2.minimal &&
      first.model.blocks.dims() == second.model.blocks.dims()) {
    auto maps = find_structured_isomorphism(first.model, second.model);
    report.kv("structured similarity found", maps.has_value());
    if (maps.has_value())
      for (std::size_t i = 0; i < maps->size(); ++i)
        report.matrix("T" + std::to_string(i + 1), (*maps)[i]);
  }
  report.finish(opt.report);
  return 0;
}

int run_simulate(const Options& opt) {
  std::string text;
  std::string kind = kind_of_file(opt.files[0], &text);
  Signals signals = parse_signals(load_text(opt.files[1]));
  Index horizon = static_cast<Index>(signals.u.size());
  if (opt.horizon < horizon) horizon = opt.horizon;
  signals.u.resize(static_cast<std::size_t>(horizon));
  signals.p.resize(static_cast<std::size_t>(horizon));

  Report report;
  report.line("simulate");
  report.kv("model", opt.files[0]);
  report.kv("signals", opt.files[1]);
  report.kv("horizon", horizon);

  Trajectory trajectory;
  std::vector<Vector> loop_signal;
  bool has_loop_signal = false;
  if (kind == "falpv") {
    FalpvModel sys = parse_falpv(text);
    if (opt.files.size() < 3)
      throw ContractError(
          "simulating a parameter-varying plant needs a scheduling source "
          "file as the third argument");
    LoadedPsiSource psi = load_psi_source_file(opt.files[2]);
    trajectory =
        simulate_falpv(sys, signals.u, signals.p, horizon,
                       evaluator_of_source(psi));
  } else if (kind == "lft") {
    AssembledLft assembled = require_assembled(parse_lft(text), opt.files[0]);
    LoopSimulation loop =
        simulate_lft_loop(assembled, signals.u, signals.p, horizon);
    trajectory = std::move(loop.trajectory);
    loop_signal = std::move(loop.z);
    has_loop_signal = true;
  } else {
    throw ContractError("'" + opt.files[0] + "' holds kind '" + kind +
                        "', expected 'falpv' or 'lft'");
  }

  double max_output = 0.0;
  for (const Vector& y : trajectory.y)
    if (y.size() > 0) max_output = std::max(max_output, y.cwiseAbs().maxCoeff());
  report.kv("max |y|", max_output);
  if (!trajectory.x.empty() && trajectory.x.back().size() > 0)
    report.kv("final state max |x|", trajectory.x.back().cwiseAbs().maxCoeff());
  if (!opt.out.empty()) {
    save_text(opt.out,
              serialize_trajectory(trajectory,
                                   has_loop_signal ? &loop_signal : nullptr));
    report.kv("wrote", opt.out);
  }
  report.finish(opt.report);
  return 0;
}

int run_minimize(const Options& opt) {
  LoadedLft loaded = load_lft_file(opt.files[0]);
  MinimizeResult result = minimize_lft(loaded.model);

  Report report;
  report.line("minimize");
  report.kv("input", opt.files[0]);
  report.kv("dim before", loaded.model.dim());
  report.kv("dim after", result.model.dim());
  report.kv("block dims before", join_dims(loaded.model.blocks.dims()));
  report.kv("block dims after", join_dims(result.model.blocks.dims()));
  report.kv("minimal", is_minimal(result.model).minimal);
  if (loaded.assembled.has_value())
    report.line(
        "note: assembled plant metadata dropped (reduction reshapes blocks)");
  if (!opt.out.empty()) {
    save_text(opt.out, serialize_lft(result.model));
    report.kv("wrote", opt.out);
  }
  report.finish(opt.report);
  return 0;
}

int run_check_stability(const Options& opt) {
  std::string text;
  std::string kind = kind_of_file(opt.files[0], &text);
  LftModel model;
  if (kind == "lft") {
    model = parse_lft(text).model;
  } else if (kind == "psi-realization") {
    model = parse_psi_realization(text).model.lft;
  } else {
    throw ContractError("'" + opt.files[0] + "' holds kind '" + kind +
                        "', expected 'lft' or 'psi-realization'");
  }

  Report report;
  report.line("check-stability");
  report.kv("input", opt.files[0]);
  report.kv("dim", model.dim());
  std::optional<StabilityCertificate> cert = check_stability(model);
  report.kv("certificate found", cert.has_value());
  if (cert.has_value()) {
    report.kv("margin", cert->margin);
    report.kv("block dims", join_dims(cert->blocks.dims()));
    report.kv("independently verified", verify_certificate(model, *cert));
  } else {
    report.line("stability unknown (absence of a certificate is not");
    report.line("evidence of instability)");
  }
  report.finish(opt.report);
  return cert.has_value() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Transforms linear parameter-varying models with functional-affine "
      "dependence into linear fractional form, and analyzes the results."};
  app.require_subcommand(1);

  Options opt;

  std::vector<std::string> realize_files(1), transform_files(2),
      verify_files(3), compare_files(2), simulate_files(3), minimize_files(1),
      stability_files(1);

  auto* realize = app.add_subcommand(
      "realize-psi", "realize scheduling functions from series data");
  realize->add_option("taylor", realize_files[0], "psi-taylor file")
      ->required();
  realize->add_option("--out", opt.out, "write the realization here");
  realize->add_option("--report", opt.report, "also write the report here");

  auto* transform_cmd = app.add_subcommand(
      "transform", "transform a plant into linear fractional form");
  transform_cmd->add_option("plant", transform_files[0], "falpv file")
      ->required();
  transform_cmd
      ->add_option("psi", transform_files[1],
                   "psi-realization or psi-taylor file")
      ->required();
  transform_cmd->add_flag("--fast-path", opt.fast_path,
                          "use the factored lifting (single function only)");
  transform_cmd->add_option("--depth", opt.depth, "series check depth");
  transform_cmd->add_option("--trials", opt.trials,
                            "pointwise check sample count");
  transform_cmd->add_option("--seed", opt.seed, "random seed");
  transform_cmd->add_option("--out", opt.out, "write the assembled model here");
  transform_cmd->add_option("--report", opt.report,
                            "also write the report here");

  auto* verify = app.add_subcommand(
      "verify", "check an assembled model against its plant");
  verify->add_option("plant", verify_files[0], "falpv file")->required();
  verify->add_option("model", verify_files[1], "assembled lft file")
      ->required();
  verify
      ->add_option("psi", verify_files[2],
                   "psi-realization or psi-taylor file")
      ->required();
  verify->add_option("--horizon", opt.horizon, "steps per trajectory");
  verify->add_option("--trials", opt.trials, "number of random runs");
  verify->add_option("--seed", opt.seed, "random seed");
  verify->add_option("--report", opt.report, "also write the report here");

  auto* compare =
      app.add_subcommand("compare", "formal equivalence of two models");
  compare->add_option("first", compare_files[0], "lft file")->required();
  compare->add_option("second", compare_files[1], "lft file")->required();
  compare->add_option("--depth", opt.depth, "word-length bound");
  compare->add_option("--report", opt.report, "also write the report here");

  auto* simulate = app.add_subcommand("simulate", "run a model on signals");
  simulate->add_option("model", simulate_files[0], "falpv or lft file")
      ->required();
  simulate->add_option("signals", simulate_files[1], "signals file")
      ->required();
  simulate->add_option("psi", simulate_files[2],
                       "scheduling source (needed for falpv models)");
  simulate->add_option("--horizon", opt.horizon, "truncate to this horizon");
  simulate->add_option("--out", opt.out, "write the trajectory here");
  simulate->add_option("--report", opt.report, "also write the report here");

  auto* minimize =
      app.add_subcommand("minimize", "reduce a model block by block");
  minimize->add_option("model", minimize_files[0], "lft file")->required();
  minimize->add_option("--out", opt.out, "write the reduced model here");
  minimize->add_option("--report", opt.report, "also write the report here");

  auto* stability = app.add_subcommand(
      "check-stability", "search for a block-diagonal quadratic certificate");
  stability
      ->add_option("model", stability_files[0],
                   "lft or psi-realization file")
      ->required();
  stability->add_option("--report", opt.report, "also write the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error (contract): " << e.what() << "\n";
    return 2;
  }

  // Default --horizon differs per command; simulate wants "no truncation".
  if (simulate->parsed() && simulate->count("--horizon") == 0)
    opt.horizon = std::numeric_limits<Index>::max();

  try {
    if (realize->parsed()) {
      opt.files = realize_files;
      return run_realize_psi(opt);
    }
    if (transform_cmd->parsed()) {
      opt.files = transform_files;
      return run_transform(opt);
    }
    if (verify->parsed()) {
      opt.files = verify_files;
      return run_verify(opt);
    }
    if (compare->parsed()) {
      opt.files = compare_files;
      return run_compare(opt);
    }
    if (simulate->parsed()) {
      opt.files = simulate_files;
      if (opt.files[2].empty()) opt.files.resize(2);
      return run_simulate(opt);
    }
    if (minimize->parsed()) {
      opt.files = minimize_files;
      return run_minimize(opt);
    }
    if (stability->parsed()) {
      opt.files = stability_files;
      return run_check_stability(opt);
    }
    std::cerr << "error (contract): no subcommand given\n";
    return 2;
  } catch (const WellPosednessError& err) {
    std::cerr << "error (well-posedness): " << err.what() << "\n";
    return 2;
  } catch (const RealizationError& err) {
    std::cerr << "error (recognizability): " << err.what() << "\n";
    return 2;
  } catch (const ContractError& err) {
    std::cerr << "error (contract): " << err.what() << "\n";
    return 2;
  } catch (const ParseError& err) {
    std::cerr << "error (contract): " << err.what() << "\n";
    return 2;
  } catch (const DependenceError& err) {
    std::cerr << "error (contract): " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error (contract): " << err.what() << "\n";
    return 2;
  }
}
