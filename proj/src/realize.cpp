#include "lpvlft/realize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lpvlft {

namespace {

std::string word_str(const Word& w) {
  if (w.empty()) return "eps";
  std::string s;
  for (size_t i = 0; i < w.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(w[i]);
  }
  return s;
}

}  // namespace

// --- linear representations ---------------------------------------------------

Matrix representation_coefficient(const LinearRepresentation& rep, const Word& w) {
  validate_word(w, rep.alphabet());
  if (w.empty()) throw ContractError("representation_coefficient: empty word");
  Matrix acc = rep.B;
  for (size_t k = 0; k + 1 < w.size(); ++k) {
    acc = rep.A[static_cast<size_t>(w[k] - 1)] * acc;
  }
  return rep.C[static_cast<size_t>(w.back() - 1)] * acc;
}

namespace {

// Compares the series of two shared-state representations on every word of
// length 1..depth.  States of both systems are stacked and explored breadth
// first; a frontier column block whose columns already lie in the span of
// the retained blocks is dropped, which is sound because coefficients are
// linear in the path matrix.
bool representations_agree(const LinearRepresentation& lhs,
                           const LinearRepresentation& rhs, int depth,
                           double tol, Word* counterexample) {
  const int d = lhs.alphabet();
  const Index n1 = lhs.state_dim, n2 = rhs.state_dim;
  const Index n = n1 + n2;
  const Index c = lhs.in_cols();

  struct Node {
    Word word;
    Matrix path;  // stacked [A#B]-style path matrix, n x c
  };
  Matrix seed(n, c);
  seed.topRows(n1) = lhs.B;
  seed.bottomRows(n2) = rhs.B;
  std::vector<Node> frontier{{Word{}, std::move(seed)}};
  Matrix basis(n, 0);

  for (int level = 0; level < depth && !frontier.empty(); ++level) {
    std::vector<Node> next;
    for (const Node& node : frontier) {
      for (int sigma = 1; sigma <= d; ++sigma) {
        const Matrix diff =
            lhs.C[static_cast<size_t>(sigma - 1)] * node.path.topRows(n1) -
            rhs.C[static_cast<size_t>(sigma - 1)] * node.path.bottomRows(n2);
        if (max_abs(diff) > tol) {
          if (counterexample) {
            *counterexample = node.word;
            counterexample->push_back(sigma);
          }
          return false;
        }
        if (level + 1 < depth) {
          Word w = node.word;
          w.push_back(sigma);
          Matrix path(n, c);
          path.topRows(n1) =
              lhs.A[static_cast<size_t>(sigma - 1)] * node.path.topRows(n1);
          path.bottomRows(n2) =
              rhs.A[static_cast<size_t>(sigma - 1)] * node.path.bottomRows(n2);
          next.push_back({std::move(w), std::move(path)});
        }
      }
    }
    frontier.clear();
    for (Node& node : next) {
      Matrix stacked(n, basis.cols() + c);
      stacked.leftCols(basis.cols()) = basis;
      stacked.rightCols(c) = node.path;
      Matrix grown = orth_basis(stacked);
      if (grown.cols() > basis.cols()) {
        basis = std::move(grown);
        frontier.push_back(std::move(node));
      }
    }
  }
  return true;
}

// Exact representation of a finitely supported series: one state per proper
// prefix of a nonzero support word (tensored with the coefficient columns),
// transitions follow the prefix tree, and the per-letter output maps read
// off the stored coefficients.
LinearRepresentation trie_representation(const TruncatedSeries& series) {
  const int d = series.alphabet();
  const Index r = series.rows(), c = series.cols();

  std::map<Word, Index> states;
  states[Word{}] = 0;
  for (const auto& [word, coeff] : series.stored()) {
    if (word.empty() || max_abs(coeff) == 0.0) continue;
    Word prefix;
    for (size_t k = 0; k + 1 < word.size(); ++k) {
      prefix.push_back(word[k]);
      states.emplace(prefix, static_cast<Index>(states.size()));
    }
  }

  const Index m = static_cast<Index>(states.size()) * c;
  LinearRepresentation rep;
  rep.state_dim = m;
  rep.B = Matrix::Zero(m, c);
  rep.B.block(states.at(Word{}) * c, 0, c, c) = Matrix::Identity(c, c);
  rep.A.assign(static_cast<size_t>(d), Matrix::Zero(m, m));
  rep.C.assign(static_cast<size_t>(d), Matrix::Zero(r, m));
  for (const auto& [prefix, index] : states) {
    for (int sigma = 1; sigma <= d; ++sigma) {
      Word next = prefix;
      next.push_back(sigma);
      auto it = states.find(next);
      if (it != states.end()) {
        rep.A[static_cast<size_t>(sigma - 1)].block(it->second * c, index * c, c, c) =
            Matrix::Identity(c, c);
      }
      if (static_cast<int>(next.size()) <= series.depth()) {
        rep.C[static_cast<size_t>(sigma - 1)].middleCols(index * c, c) =
            series.at(next);
      }
    }
  }
  return rep;
}

struct WordTable {
  std::vector<Word> words;           // breadth-first up to the bound
  std::vector<Index> count_by_len;   // cumulative word count for length <= k
};

WordTable enumerate_words(int alphabet, int min_len, int max_len) {
  WordTable table;
  table.count_by_len.assign(static_cast<size_t>(max_len) + 1, 0);
  for_each_word(alphabet, min_len, max_len, [&](const Word& w) {
    table.words.push_back(w);
    return true;
  });
  Index running = 0;
  size_t pos = 0;
  for (int len = 0; len <= max_len; ++len) {
    while (pos < table.words.size() &&
           static_cast<int>(table.words[pos].size()) <= len) {
      ++running;
      ++pos;
    }
    table.count_by_len[static_cast<size_t>(len)] = running;
  }
  return table;
}

Word concat(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Word concat(const Word& a, int letter, const Word& b) {
  Word out = a;
  out.push_back(letter);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Matrix hankel_block(const TruncatedSeries& series, const std::vector<Word>& suffixes,
                    const std::vector<Word>& prefixes, int shift_letter) {
  const Index r = series.rows(), c = series.cols();
  Matrix h(r * static_cast<Index>(suffixes.size()),
           c * static_cast<Index>(prefixes.size()));
  for (size_t iu = 0; iu < suffixes.size(); ++iu) {
    for (size_t iv = 0; iv < prefixes.size(); ++iv) {
      const Word w = shift_letter == 0
                         ? concat(prefixes[iv], suffixes[iu])
                         : concat(prefixes[iv], shift_letter, suffixes[iu]);
      h.block(static_cast<Index>(iu) * r, static_cast<Index>(iv) * c, r, c) =
          series.at(w);
    }
  }
  return h;
}

}  // namespace

LinearRepresentation hankel_realize(const TruncatedSeries& series, int order_bound) {
  if (order_bound < 0) throw ContractError("hankel_realize: negative order bound");
  if (series.depth() < 2 * order_bound + 1) {
    throw ContractError(
        "hankel_realize: series depth must be at least 2*order_bound + 1");
  }
  const int d = series.alphabet();
  const Index r = series.rows(), c = series.cols();

  const WordTable suffixes = enumerate_words(d, 1, order_bound + 1);
  const WordTable prefixes = enumerate_words(d, 0, order_bound);
  const std::vector<Word> short_suffixes(
      suffixes.words.begin(),
      suffixes.words.begin() +
          static_cast<std::ptrdiff_t>(
              suffixes.count_by_len[static_cast<size_t>(order_bound)]));

  const Matrix h = hankel_block(series, suffixes.words, prefixes.words, 0);
  if (h.size() == 0) {
    LinearRepresentation rep;
    rep.state_dim = 0;
    rep.A.assign(static_cast<size_t>(d), Matrix(0, 0));
    rep.C.assign(static_cast<size_t>(d), Matrix(r, 0));
    rep.B = Matrix(0, c);
    return rep;
  }

  Eigen::BDCSVD<Matrix> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double tol = rank_threshold(h.rows(), h.cols(), sv);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;

  if (rank > 0 && sv(rank - 1) < 10.0 * tol) {
    throw IllConditionedError(
        "hankel_realize: singular-value gap at the rank cut is below 10x the "
        "rank threshold (sigma_r = " +
        format_double(sv(rank - 1)) + ", threshold = " + format_double(tol) + ")");
  }

  // The rank must already be reached one bound earlier, otherwise the data
  // window cannot pin the state dimension.
  Index prev_rank = 0;
  if (order_bound >= 1) {
    const Index sub_rows =
        r * suffixes.count_by_len[static_cast<size_t>(order_bound)];
    const Index sub_cols =
        c * prefixes.count_by_len[static_cast<size_t>(order_bound - 1)];
    const Matrix sub = h.topLeftCorner(sub_rows, sub_cols);
    Eigen::BDCSVD<Matrix> sub_svd(sub);
    const Vector& ssv = sub_svd.singularValues();
    prev_rank = 0;
    while (prev_rank < ssv.size() && ssv(prev_rank) > tol) ++prev_rank;
  }
  if (rank != prev_rank) {
    throw OrderBoundError(
        "hankel_realize: Hankel rank has not stabilized at the order bound (" +
        std::to_string(prev_rank) + " -> " + std::to_string(rank) + ")");
  }

  LinearRepresentation rep;
  rep.state_dim = rank;
  if (rank == 0) {
    rep.A.assign(static_cast<size_t>(d), Matrix(0, 0));
    rep.C.assign(static_cast<size_t>(d), Matrix(r, 0));
    rep.B = Matrix(0, c);
  } else {
    const Vector sqrt_sv = sv.head(rank).cwiseSqrt();
    const Matrix obs = svd.matrixU().leftCols(rank) * sqrt_sv.asDiagonal();
    const Matrix reach = sqrt_sv.asDiagonal() * svd.matrixV().leftCols(rank).transpose();

    const Matrix obs_short =
        obs.topRows(r * static_cast<Index>(short_suffixes.size()));
    const Matrix obs_short_pinv = pseudo_inverse(obs_short);
    const Matrix reach_pinv = pseudo_inverse(reach);

    rep.A.reserve(static_cast<size_t>(d));
    rep.C.reserve(static_cast<size_t>(d));
    for (int sigma = 1; sigma <= d; ++sigma) {
      const Matrix shifted =
          hankel_block(series, short_suffixes, prefixes.words, sigma);
      rep.A.push_back(obs_short_pinv * shifted * reach_pinv);
      // Length-1 suffixes come first in breadth-first order.
      rep.C.push_back(obs.middleRows(r * static_cast<Index>(sigma - 1), r));
    }
    rep.B = reach.leftCols(c);
  }

  // The window checks above are necessary but not sufficient; certify the
  // result against the full data depth before returning it.
  Word bad;
  if (!representations_agree(rep, trie_representation(series), series.depth(),
                             1e-8, &bad)) {
    throw OrderBoundError(
        "hankel_realize: realized series deviates from the data at word (" +
        word_str(bad) + "); increase the order bound or supply deeper data");
  }
  return rep;
}

LftModel representation_to_lft(const LinearRepresentation& rep,
                               const Matrix& feedthrough) {
  const int d = rep.alphabet();
  if (d < 1) throw ContractError("representation_to_lft: empty alphabet");
  const Index n = rep.state_dim;
  const Index r = rep.out_rows(), c = rep.in_cols();
  if (feedthrough.rows() != r || feedthrough.cols() != c) {
    throw ContractError("representation_to_lft: feedthrough shape mismatch");
  }

  Matrix row_block(n, n * d);
  Matrix c_big(r, n * d);
  for (int j = 0; j < d; ++j) {
    row_block.middleCols(n * j, n) = rep.A[static_cast<size_t>(j)];
    c_big.middleCols(n * j, n) = rep.C[static_cast<size_t>(j)];
  }
  Matrix a_big = row_block.replicate(d, 1);
  Matrix b_big = rep.B.replicate(d, 1);
  return LftModel(r, c, BlockStructure(std::vector<Index>(static_cast<size_t>(d), n)),
                  std::move(a_big), std::move(b_big), std::move(c_big), feedthrough);
}

// --- minimality ----------------------------------------------------------------

namespace {

// Block reachability fixpoint: R_i = span(cols B_i) + sum_j A_{i,j} R_j,
// returned as orthonormal bases.
std::vector<Matrix> reach_bases(const LftModel& m) {
  const Index d = m.d();
  std::vector<Matrix> bases(static_cast<size_t>(d));
  for (Index i = 1; i <= d; ++i) {
    bases[static_cast<size_t>(i - 1)] = orth_basis(m.b_cell(i));
  }
  for (Index round = 0; round <= m.dim(); ++round) {
    bool grew = false;
    for (Index i = 1; i <= d; ++i) {
      Index total = m.blocks.dim(i - 1);
      std::vector<Matrix> parts{bases[static_cast<size_t>(i - 1)]};
      Index cols = parts[0].cols();
      for (Index j = 1; j <= d; ++j) {
        parts.push_back(m.a_cell(i, j) * bases[static_cast<size_t>(j - 1)]);
        cols += parts.back().cols();
      }
      Matrix stacked(total, cols);
      Index at = 0;
      for (const Matrix& part : parts) {
        stacked.middleCols(at, part.cols()) = part;
        at += part.cols();
      }
      Matrix grown = orth_basis(stacked);
      if (grown.cols() > bases[static_cast<size_t>(i - 1)].cols()) {
        bases[static_cast<size_t>(i - 1)] = std::move(grown);
        grew = true;
      }
    }
    if (!grew) break;
  }
  return bases;
}

// Block unobservability fixpoint: N_i = { v : C_i v = 0 and A_{j,i} v in N_j
// for all j }, returned as orthonormal bases of the N_i.
std::vector<Matrix> unobservable_bases(const LftModel& m) {
  const Index d = m.d();
  std::vector<Matrix> bases(static_cast<size_t>(d));
  for (Index i = 1; i <= d; ++i) {
    bases[static_cast<size_t>(i - 1)] = nullspace_basis(m.c_cell(i));
  }
  for (Index round = 0; round <= m.dim(); ++round) {
    bool shrank = false;
    for (Index i = 1; i <= d; ++i) {
      Matrix& n_i = bases[static_cast<size_t>(i - 1)];
      if (n_i.cols() == 0) continue;
      // Stack the components of A_{j,i} N_i that escape N_j.
      Index rows = 0;
      std::vector<Matrix> parts;
      for (Index j = 1; j <= d; ++j) {
        const Matrix& n_j = bases[static_cast<size_t>(j - 1)];
        Matrix mapped = m.a_cell(j, i) * n_i;
        Matrix escaped = mapped - n_j * (n_j.transpose() * mapped);
        parts.push_back(std::move(escaped));
        rows += parts.back().rows();
      }
      Matrix stacked(rows, n_i.cols());
      Index at = 0;
      for (const Matrix& part : parts) {
        stacked.middleRows(at, part.rows()) = part;
        at += part.rows();
      }
      Matrix keep = nullspace_basis(stacked);
      if (keep.cols() < n_i.cols()) {
        n_i = n_i * keep;
        shrank = true;
      }
    }
    if (!shrank) break;
  }
  return bases;
}

// Applies per-block column maps V_i: cells become V_i^T A V_j, V_j^T B, C V_i.
LftModel apply_block_maps(const LftModel& m, const std::vector<Matrix>& maps) {
  std::vector<Index> new_dims;
  Index total = 0;
  for (const Matrix& v : maps) {
    new_dims.push_back(v.cols());
    total += v.cols();
  }
  Matrix v_big = Matrix::Zero(m.dim(), total);
  Index at = 0;
  for (Index i = 0; i < m.d(); ++i) {
    const Matrix& v = maps[static_cast<size_t>(i)];
    v_big.block(m.blocks.offset(i), at, v.rows(), v.cols()) = v;
    at += v.cols();
  }
  return LftModel(m.p_out, m.m_in, BlockStructure(new_dims),
                  v_big.transpose() * m.A * v_big, v_big.transpose() * m.B,
                  m.C * v_big, m.D);
}

}  // namespace

MinimalityReport is_minimal(const LftModel& m) {
  MinimalityReport report;
  const std::vector<Matrix> reach = reach_bases(m);
  const std::vector<Matrix> unobs = unobservable_bases(m);
  report.minimal = true;
  for (Index i = 0; i < m.d(); ++i) {
    report.reach_dims.push_back(reach[static_cast<size_t>(i)].cols());
    report.obs_dims.push_back(m.blocks.dim(i) - unobs[static_cast<size_t>(i)].cols());
    if (report.reach_dims.back() != m.blocks.dim(i) ||
        report.obs_dims.back() != m.blocks.dim(i)) {
      report.minimal = false;
    }
  }
  return report;
}

MinimizeResult minimize_lft(const LftModel& m) {
  MinimizeResult result;
  result.model = m;
  result.maps.reserve(static_cast<size_t>(m.d()));
  for (Index i = 0; i < m.d(); ++i) {
    result.maps.push_back(Matrix::Identity(m.blocks.dim(i), m.blocks.dim(i)));
  }

  for (int round = 0; round < 8; ++round) {
    bool changed = false;

    std::vector<Matrix> reach = reach_bases(result.model);
    bool reach_full = true;
    for (Index i = 0; i < result.model.d(); ++i) {
      if (reach[static_cast<size_t>(i)].cols() != result.model.blocks.dim(i))
        reach_full = false;
    }
    if (!reach_full) {
      result.model = apply_block_maps(result.model, reach);
      for (Index i = 0; i < result.model.d(); ++i) {
        result.maps[static_cast<size_t>(i)] =
            result.maps[static_cast<size_t>(i)] * reach[static_cast<size_t>(i)];
      }
      changed = true;
    }

    std::vector<Matrix> unobs = unobservable_bases(result.model);
    bool all_observable = true;
    for (const Matrix& n_i : unobs) {
      if (n_i.cols() > 0) all_observable = false;
    }
    if (!all_observable) {
      std::vector<Matrix> complements;
      for (const Matrix& n_i : unobs) {
        complements.push_back(nullspace_basis(n_i.transpose()));
      }
      result.model = apply_block_maps(result.model, complements);
      for (Index i = 0; i < result.model.d(); ++i) {
        result.maps[static_cast<size_t>(i)] =
            result.maps[static_cast<size_t>(i)] * complements[static_cast<size_t>(i)];
      }
      changed = true;
    }

    if (!changed) break;
  }
  return result;
}

// --- stability -------------------------------------------------------------------

Matrix StabilityCertificate::assembled() const {
  Matrix big = Matrix::Zero(blocks.total(), blocks.total());
  for (Index i = 0; i < blocks.count(); ++i) {
    big.block(blocks.offset(i), blocks.offset(i), blocks.dim(i), blocks.dim(i)) =
        P[static_cast<size_t>(i)];
  }
  return big;
}

namespace {

double min_eigenvalue(const Matrix& sym) {
  if (sym.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sym + sym.transpose()),
                                            Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double certificate_margin(const LftModel& m, const Matrix& p_big) {
  return min_eigenvalue(p_big - m.A.transpose() * p_big * m.A);
}

std::vector<Matrix> split_blocks(const LftModel& m, const Matrix& p_big) {
  std::vector<Matrix> out;
  for (Index i = 0; i < m.d(); ++i) {
    Matrix p_i = p_big.block(m.blocks.offset(i), m.blocks.offset(i),
                             m.blocks.dim(i), m.blocks.dim(i));
    out.push_back(0.5 * (p_i + p_i.transpose()));
  }
  return out;
}

std::optional<StabilityCertificate> try_certificate(const LftModel& m,
                                                    std::vector<Matrix> p_blocks) {
  StabilityCertificate cert;
  cert.blocks = m.blocks;
  cert.P = std::move(p_blocks);
  cert.margin = certificate_margin(m, cert.assembled());
  if (verify_certificate(m, cert)) return cert;
  return std::nullopt;
}

}  // namespace

bool verify_certificate(const LftModel& m, const StabilityCertificate& cert) {
  if (!(cert.blocks == m.blocks)) return false;
  if (cert.P.size() != static_cast<size_t>(m.d())) return false;
  for (Index i = 0; i < m.d(); ++i) {
    const Matrix& p_i = cert.P[static_cast<size_t>(i)];
    if (p_i.rows() != m.blocks.dim(i) || p_i.cols() != m.blocks.dim(i)) return false;
    if (p_i.size() > 0 && max_abs(p_i - p_i.transpose()) > 1e-10 * std::max(1.0, max_abs(p_i)))
      return false;
    if (p_i.rows() > 0 && min_eigenvalue(p_i) <= 0.0) return false;
  }
  const double margin = certificate_margin(m, cert.assembled());
  if (!(margin > 0.0)) return false;
  return std::abs(margin - cert.margin) <= 1e-9 * std::max(1.0, std::abs(cert.margin));
}

std::optional<StabilityCertificate> check_stability(const LftModel& m) {
  const Index n = m.dim();
  if (n == 0) {
    StabilityCertificate cert;
    cert.blocks = m.blocks;
    for (Index i = 0; i < m.d(); ++i) cert.P.emplace_back(0, 0);
    cert.margin = std::numeric_limits<double>::infinity();
    return cert;
  }

  // 1. Identity.
  {
    std::vector<Matrix> blocks;
    for (Index i = 0; i < m.d(); ++i)
      blocks.push_back(Matrix::Identity(m.blocks.dim(i), m.blocks.dim(i)));
    if (auto cert = try_certificate(m, std::move(blocks))) return cert;
  }

  // 2. Block-diagonal projection of the unstructured Lyapunov solution.
  Matrix lyap;
  const bool have_lyap =
      solve_discrete_lyapunov(m.A, Matrix::Identity(n, n), lyap);
  if (have_lyap) {
    if (auto cert = try_certificate(m, split_blocks(m, lyap))) return cert;
  }

  // 3. Coordinate descent over per-block scalar multipliers applied to the
  //    best base blocks available.
  std::vector<Matrix> base;
  if (have_lyap) {
    base = split_blocks(m, lyap);
    for (Matrix& p_i : base) {
      if (p_i.rows() == 0) continue;
      // Clip tiny or negative eigenvalues so each base block is positive
      // definite.
      Eigen::SelfAdjointEigenSolver<Matrix> eig(p_i);
      Vector ev = eig.eigenvalues().cwiseMax(1e-6);
      p_i = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
    }
  } else {
    for (Index i = 0; i < m.d(); ++i)
      base.push_back(Matrix::Identity(m.blocks.dim(i), m.blocks.dim(i)));
  }

  std::vector<double> scale(static_cast<size_t>(m.d()), 1.0);
  auto margin_for = [&](const std::vector<double>& s) {
    std::vector<Matrix> blocks;
    for (Index i = 0; i < m.d(); ++i)
      blocks.push_back(s[static_cast<size_t>(i)] * base[static_cast<size_t>(i)]);
    StabilityCertificate cert;
    cert.blocks = m.blocks;
    cert.P = std::move(blocks);
    return certificate_margin(m, cert.assembled());
  };

  double best = margin_for(scale);
  for (int pass = 0; pass < 3; ++pass) {
    const double width = pass == 0 ? 1e2 : (pass == 1 ? 4.0 : 1.5);
    const int points = pass == 0 ? 15 : 9;
    for (Index i = 0; i < m.d(); ++i) {
      double best_here = scale[static_cast<size_t>(i)];
      for (int k = 0; k < points; ++k) {
        const double factor =
            std::pow(width, -1.0 + 2.0 * static_cast<double>(k) / (points - 1));
        std::vector<double> trial = scale;
        trial[static_cast<size_t>(i)] = scale[static_cast<size_t>(i)] * factor;
        const double margin = margin_for(trial);
        if (margin > best) {
          best = margin;
          best_here = trial[static_cast<size_t>(i)];
        }
      }
      scale[static_cast<size_t>(i)] = best_here;
    }
  }
  if (best > 0.0) {
    std::vector<Matrix> blocks;
    for (Index i = 0; i < m.d(); ++i)
      blocks.push_back(scale[static_cast<size_t>(i)] * base[static_cast<size_t>(i)]);
    if (auto cert = try_certificate(m, std::move(blocks))) return cert;
  }
  return std::nullopt;
}

ScaledPsi stabilize_scale(const PsiRealization& psi) {
  const double norm = spectral_norm(psi.F());
  const double lambda = norm > 0.0 ? std::min(1.0, 1.0 / (norm * (1.0 + 1e-6))) : 1.0;
  ScaledPsi out;
  out.lambda = lambda;
  if (lambda == 1.0) {
    out.model = psi;
    return out;
  }
  out.model = PsiRealization(LftModel(psi.lft.p_out, psi.lft.m_in, psi.lft.blocks,
                                      lambda * psi.F(), psi.G(), lambda * psi.H(),
                                      psi.lft.D));
  return out;
}

PsiRealizeResult realize_psi(const TruncatedSeries& taylor, int order_bound) {
  if (taylor.cols() != 1) {
    throw ContractError("realize_psi: series coefficients must be column vectors");
  }
  if (taylor.rows() < 1) {
    throw ContractError("realize_psi: at least one scheduling function required");
  }
  if (max_abs(taylor.at(Word{})) != 0.0) {
    throw RecognizabilityError(
        "realize_psi: the empty-word coefficient must vanish (psi(0) = 0)");
  }

  PsiRealizeResult result;
  LinearRepresentation rep = hankel_realize(taylor, order_bound);
  result.representation_dim = rep.state_dim;
  result.zero_series = rep.state_dim == 0;

  const LftModel embedded =
      representation_to_lft(rep, Matrix::Zero(taylor.rows(), 1));
  PsiRealization minimal(minimize_lft(embedded).model);

  if (auto cert = check_stability(minimal.lft)) {
    result.model = std::move(minimal);
    result.lambda = 1.0;
    result.stability_margin = cert->margin;
    return result;
  }
  ScaledPsi scaled = stabilize_scale(minimal);
  if (auto cert = check_stability(scaled.model.lft)) {
    result.model = std::move(scaled.model);
    result.lambda = scaled.lambda;
    result.stability_margin = cert->margin;
    return result;
  }
  throw RecognizabilityError(
      "realize_psi: no stability certificate found even after argument scaling");
}

}  // namespace lpvlft
