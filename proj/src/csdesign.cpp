#include "cspapi/csdesign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

#include "cspapi/rng.hpp"

namespace cspapi {

namespace {

constexpr long kSubsetCapacity = 100000;

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 0; i < k; ++i) {
    r = r * (n - i) / (i + 1);
    if (r > 100 * kSubsetCapacity) return r;  // enough to trip the capacity check
  }
  return r;
}

bool next_combination(std::vector<int>& c, int n) {
  const int k = static_cast<int>(c.size());
  int i = k - 1;
  while (i >= 0 && c[i] == n - k + i) --i;
  if (i < 0) return false;
  ++c[i];
  for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  return true;
}

bool is_binary(const Eigen::MatrixXd& m) {
  for (int j = 0; j < m.cols(); ++j)
    for (int i = 0; i < m.rows(); ++i)
      if (m(i, j) != 0.0 && m(i, j) != 1.0) return false;
  return true;
}

/// Exact determinant of a small integer matrix (fraction-free Bareiss
/// elimination). Intermediate values stay well inside int64 for the Gram
/// matrices handled here (entries <= m0, size <= 8).
std::int64_t int_det(std::vector<std::int64_t>& a, int k) {
  std::int64_t sign = 1;
  std::int64_t prev = 1;
  for (int col = 0; col < k; ++col) {
    int pivot = -1;
    for (int r = col; r < k; ++r)
      if (a[r * k + col] != 0) {
        pivot = r;
        break;
      }
    if (pivot < 0) return 0;
    if (pivot != col) {
      for (int c = 0; c < k; ++c) std::swap(a[pivot * k + c], a[col * k + c]);
      sign = -sign;
    }
    for (int r = col + 1; r < k; ++r) {
      for (int c = col + 1; c < k; ++c)
        a[r * k + c] = (a[r * k + c] * a[col * k + col] - a[r * k + col] * a[col * k + c]) / prev;
      a[r * k + col] = 0;
    }
    prev = a[col * k + col];
  }
  return sign * a[k * k - 1];
}

/// Integer Gram matrix of a binary matrix; entry (i, j) counts the rows where
/// columns i and j are both active.
std::vector<std::int64_t> integer_gram(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.cols());
  std::vector<std::int64_t> g(static_cast<size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      std::int64_t acc = 0;
      for (int r = 0; r < m.rows(); ++r) acc += static_cast<std::int64_t>(m(r, i) * m(r, j));
      g[static_cast<size_t>(i) * n + j] = acc;
      g[static_cast<size_t>(j) * n + i] = acc;
    }
  return g;
}

void check_subset_args(const Eigen::MatrixXd& m, int k, const char* who) {
  if (k < 1 || k > m.cols())
    throw std::invalid_argument(std::string(who) + ": subset size must be in [1, columns]");
  long count = binomial(static_cast<int>(m.cols()), k);
  if (count > kSubsetCapacity)
    throw CapacityError(std::string(who) + ": subset enumeration capacity exceeded (" +
                        std::to_string(count) + " > " + std::to_string(kSubsetCapacity) + ")");
}

std::vector<std::vector<int>> enumerate_subsets(int n, int k) {
  std::vector<std::vector<int>> subsets;
  std::vector<int> c(k);
  std::iota(c.begin(), c.end(), 0);
  do {
    subsets.push_back(c);
  } while (next_combination(c, n));
  return subsets;
}

/// Fast injectivity scan used by the random search. Returns the minimum
/// subset singular value, certifying exact zeros with the integer
/// determinant. Aborts (returning the running minimum) as soon as the
/// candidate provably cannot beat abort_below.
double sin_scan_binary(const Eigen::MatrixXd& m, const std::vector<std::int64_t>& gram, int k,
                       double abort_below) {
  const int n = static_cast<int>(m.cols());
  std::vector<int> c(k);
  std::iota(c.begin(), c.end(), 0);
  std::vector<std::int64_t> sub(static_cast<size_t>(k) * k);
  Eigen::MatrixXd subd(k, k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  double running = std::numeric_limits<double>::infinity();
  do {
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) sub[static_cast<size_t>(i) * k + j] = gram[static_cast<size_t>(c[i]) * n + c[j]];
    std::vector<std::int64_t> tmp = sub;
    if (int_det(tmp, k) == 0) {
      return 0.0;  // cannot go lower
    } else {
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) subd(i, j) = static_cast<double>(sub[static_cast<size_t>(i) * k + j]);
      eig.compute(subd, Eigen::EigenvaluesOnly);
      double sv = std::sqrt(std::max(0.0, eig.eigenvalues()[0]));
      running = std::min(running, sv);
    }
    if (running < abort_below) return running;
  } while (next_combination(c, n));
  return running;
}

}  // namespace

int l0_norm(const Eigen::VectorXd& x) {
  int c = 0;
  for (int i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) ++c;
  return c;
}

double best_s_term_error(const Eigen::VectorXd& x, int s) {
  if (s < 0) throw std::invalid_argument("best_s_term_error: s must be nonnegative");
  const int n = static_cast<int>(x.size());
  if (s >= n) return 0.0;
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return std::abs(x[a]) > std::abs(x[b]); });
  double acc = 0.0;
  for (int i = s; i < n; ++i) acc += std::abs(x[idx[i]]);
  return acc;
}

SelectionList sample_selection_list(const StructureSpec& spec, std::uint64_t seed) {
  if (spec.block_size < 1 || spec.blocks_per_group < 1 || spec.group_count < 1 || spec.m0 < 1)
    throw std::invalid_argument("sample_selection_list: invalid structure spec");
  Rng rng(seed);
  SelectionList list;
  list.rows.resize(spec.m0);
  for (int r = 0; r < spec.m0; ++r) {
    list.rows[r].assign(spec.blocks_per_group, 0);
    // Each measurement gates one summed block off and reads one uniformly
    // drawn sensor from every other block.
    int off = (spec.blocks_per_group > 1)
                  ? static_cast<int>(rng.next_below(static_cast<std::uint32_t>(spec.blocks_per_group)))
                  : -1;
    for (int b = 0; b < spec.blocks_per_group; ++b)
      if (b != off)
        list.rows[r][b] = 1 + static_cast<int>(rng.next_below(static_cast<std::uint32_t>(spec.block_size)));
  }
  return list;
}

StructuredCsMatrix make_cs_matrix(const SelectionList& list, const StructureSpec& spec) {
  if (static_cast<int>(list.rows.size()) != spec.m0)
    throw std::invalid_argument("make_cs_matrix: selection list must have m0 rows");
  StructuredCsMatrix m;
  m.spec = spec;
  m.entries = Eigen::MatrixXd::Zero(spec.m0, spec.n0());
  for (int r = 0; r < spec.m0; ++r) {
    if (static_cast<int>(list.rows[r].size()) != spec.blocks_per_group)
      throw std::invalid_argument("make_cs_matrix: selection row has wrong length");
    for (int b = 0; b < spec.blocks_per_group; ++b) {
      int sel = list.rows[r][b];
      if (sel < 0 || sel > spec.block_size)
        throw std::invalid_argument("make_cs_matrix: selection entry out of range");
      if (sel > 0) m.entries(r, b * spec.block_size + sel - 1) = 1.0;
    }
  }
  m.origins = {list};
  return m;
}

StructuredCsMatrix assemble_block_diagonal(const std::vector<StructuredCsMatrix>& groups) {
  if (groups.empty()) throw std::invalid_argument("assemble_block_diagonal: no groups");
  for (const auto& g : groups) {
    if (!(g.spec == groups[0].spec))
      throw std::invalid_argument("assemble_block_diagonal: mismatched structure specs");
    if (g.assembled) throw std::invalid_argument("assemble_block_diagonal: input already assembled");
  }
  if (groups.size() == 1) return groups[0];

  const StructureSpec& spec = groups[0].spec;
  const int gc = static_cast<int>(groups.size());
  StructuredCsMatrix out;
  out.spec = spec;
  out.assembled = true;
  out.entries = Eigen::MatrixXd::Zero(static_cast<long>(gc) * spec.m0, static_cast<long>(gc) * spec.n0());
  for (int g = 0; g < gc; ++g) {
    out.entries.block(static_cast<long>(g) * spec.m0, static_cast<long>(g) * spec.n0(), spec.m0,
                      spec.n0()) = groups[g].entries;
    out.origins.push_back(groups[g].origins.front());
  }
  return out;
}

SinReport sin_number(const Eigen::MatrixXd& m, int k, ExecMode mode) {
  check_subset_args(m, k, "sin_number");
  const int n = static_cast<int>(m.cols());
  const bool binary = is_binary(m);
  const std::vector<std::int64_t> gram = binary ? integer_gram(m) : std::vector<std::int64_t>{};

  std::vector<std::vector<int>> subsets = enumerate_subsets(n, k);
  std::vector<double> sigma(subsets.size());

  parallel_for(static_cast<std::int64_t>(subsets.size()), mode, [&](std::int64_t si) {
    const std::vector<int>& c = subsets[si];
    if (binary) {
      std::vector<std::int64_t> sub(static_cast<size_t>(k) * k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          sub[static_cast<size_t>(i) * k + j] = gram[static_cast<size_t>(c[i]) * n + c[j]];
      if (int_det(sub, k) == 0) {
        sigma[si] = 0.0;
        return;
      }
    }
    if (k > m.rows()) {
      sigma[si] = 0.0;  // wide subset has a kernel
      return;
    }
    Eigen::MatrixXd ms(m.rows(), k);
    for (int i = 0; i < k; ++i) ms.col(i) = m.col(c[i]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ms);
    sigma[si] = svd.singularValues().minCoeff();
  });

  std::size_t worst = 0;
  for (std::size_t si = 1; si < sigma.size(); ++si)
    if (sigma[si] < sigma[worst]) worst = si;

  SinReport report;
  report.k = k;
  report.theta = sigma[worst];
  report.worst_subset = subsets[worst];

  Eigen::MatrixXd ms(m.rows(), k);
  for (int i = 0; i < k; ++i) ms.col(i) = m.col(report.worst_subset[i]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ms, Eigen::ComputeFullV);
  Eigen::VectorXd v = svd.matrixV().col(k - 1);
  for (int i = 0; i < k; ++i)
    if (std::abs(v[i]) > 1e-14) {
      if (v[i] < 0) v = -v;
      break;
    }
  report.worst_vector = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < k; ++i) report.worst_vector[report.worst_subset[i]] = v[i];
  return report;
}

RipReport rip_constant(const Eigen::MatrixXd& m, int s, ExecMode mode) {
  check_subset_args(m, s, "rip_constant");
  const int n = static_cast<int>(m.cols());
  std::vector<std::vector<int>> subsets = enumerate_subsets(n, s);
  std::vector<double> dev(subsets.size());

  parallel_for(static_cast<std::int64_t>(subsets.size()), mode, [&](std::int64_t si) {
    const std::vector<int>& c = subsets[si];
    Eigen::MatrixXd ms(m.rows(), s);
    for (int i = 0; i < s; ++i) ms.col(i) = m.col(c[i]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ms);
    double smax = svd.singularValues().maxCoeff();
    double smin = (s > m.rows()) ? 0.0 : svd.singularValues().minCoeff();
    dev[si] = std::max(std::abs(smax * smax - 1.0), std::abs(1.0 - smin * smin));
  });

  RipReport report;
  report.s = s;
  report.delta = *std::max_element(dev.begin(), dev.end());
  return report;
}

DesignResult optimize_sin(const StructureSpec& spec, int k, long n_iter, std::uint64_t seed,
                          ExecMode mode) {
  if (n_iter < 1) throw std::invalid_argument("optimize_sin: n_iter must be positive");
  // Validate the subset capacity once up front.
  check_subset_args(Eigen::MatrixXd::Zero(spec.m0, spec.n0()), k, "optimize_sin");

  std::vector<double> value(static_cast<size_t>(n_iter));
  std::atomic<double> threshold{0.0};

  parallel_for(n_iter, mode, [&](std::int64_t i) {
    SelectionList list = sample_selection_list(spec, mix_seed(seed, static_cast<std::uint64_t>(i)));
    StructuredCsMatrix m = make_cs_matrix(list, spec);
    std::vector<std::int64_t> gram = integer_gram(m.entries);
    // Abort strictly below the shared threshold: candidates tying the best
    // finish their scan, which keeps the iteration-ordered reduction exact.
    double v = sin_scan_binary(m.entries, gram, k, threshold.load(std::memory_order_relaxed));
    value[static_cast<size_t>(i)] = v;
    double cur = threshold.load(std::memory_order_relaxed);
    while (v > cur && !threshold.compare_exchange_weak(cur, v, std::memory_order_relaxed)) {
    }
  });

  DesignResult result;
  result.seed = seed;
  result.iterations_used = n_iter;

  long best_index = -1;
  double best = 0.0;
  for (long i = 0; i < n_iter; ++i) {
    if (value[static_cast<size_t>(i)] > best) {
      best = value[static_cast<size_t>(i)];
      best_index = i;
    }
  }

  if (best_index < 0) {
    // No draw improved on zero; report the empty design.
    result.best_list.rows.assign(spec.m0, std::vector<int>(spec.blocks_per_group, 0));
    result.best_matrix = make_cs_matrix(result.best_list, spec);
    result.best_sin = 0.0;
    return result;
  }

  result.best_list = sample_selection_list(spec, mix_seed(seed, static_cast<std::uint64_t>(best_index)));
  result.best_matrix = make_cs_matrix(result.best_list, spec);
  result.best_sin = sin_number(result.best_matrix.entries, k, mode).theta;
  return result;
}

}  // namespace cspapi
