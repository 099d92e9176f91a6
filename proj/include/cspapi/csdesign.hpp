#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cspapi/parallel.hpp"

namespace cspapi {

/// Raised when an exhaustive subset enumeration would exceed the supported
/// problem size.
class CapacityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Structure of the admissible measurement family: b sensors share a switch
/// (a block), g blocks are summed into one channel (a group), group_count
/// groups run in parallel, and m0 measurements are taken per group.
struct StructureSpec {
  int block_size = 4;
  int blocks_per_group = 4;
  int group_count = 4;
  int m0 = 12;

  int n0() const { return block_size * blocks_per_group; }
  int n_sensors() const { return n0() * group_count; }
  bool operator==(const StructureSpec&) const = default;
};

/// m0 rows of per-block selections; entry 0 turns the block off, entry
/// k in 1..b activates the k-th sensor of the block.
struct SelectionList {
  std::vector<std::vector<int>> rows;
};

/// Binary measurement matrix, either a single m0 x n0 group matrix or the
/// block-diagonal assembly over all groups. Every row has at most one
/// nonzero entry per block.
struct StructuredCsMatrix {
  StructureSpec spec;
  Eigen::MatrixXd entries;
  std::vector<SelectionList> origins;  // one per assembled group
  bool assembled = false;
};

/// Result of the sparse injectivity number: the smallest singular value over
/// all k-column submatrices, with the attaining subset and a unit vector
/// certificate supported on it.
struct SinReport {
  int k = 0;
  double theta = 0.0;
  std::vector<int> worst_subset;
  Eigen::VectorXd worst_vector;
};

/// Smallest constant delta with (1-delta)|x|^2 <= |Mx|^2 <= (1+delta)|x|^2
/// over s-sparse x, computed exhaustively from subset singular values.
struct RipReport {
  int s = 0;
  double delta = 0.0;
};

struct DesignResult {
  StructuredCsMatrix best_matrix;
  double best_sin = 0.0;
  SelectionList best_list;
  long iterations_used = 0;
  std::uint64_t seed = 0;
};

int l0_norm(const Eigen::VectorXd& x);

/// l1 norm of everything but the s largest-magnitude entries (ties keep the
/// lower index).
double best_s_term_error(const Eigen::VectorXd& x, int s);

/// Draws one admissible measurement list: every row gates exactly one block
/// off (uniformly chosen) and selects a uniform sensor in each remaining
/// block. Deterministic for a given seed.
SelectionList sample_selection_list(const StructureSpec& spec, std::uint64_t seed);

StructuredCsMatrix make_cs_matrix(const SelectionList& list, const StructureSpec& spec);

StructuredCsMatrix assemble_block_diagonal(const std::vector<StructuredCsMatrix>& groups);

/// Exhaustive subset-SVD evaluation of the injectivity number; rejects
/// requests with more than 100000 subsets. For binary matrices, singular
/// subsets are certified by an exact integer Gram determinant, so a zero
/// theta is exact rather than an eigenvalue residue.
SinReport sin_number(const Eigen::MatrixXd& m, int k, ExecMode mode = ExecMode::Parallel);

RipReport rip_constant(const Eigen::MatrixXd& m, int s, ExecMode mode = ExecMode::Parallel);

/// Random search over admissible matrices keeping the strict maximizer of
/// the injectivity number at subset size k. Iteration i draws from the
/// stream mix_seed(seed, i), so results do not depend on thread scheduling.
DesignResult optimize_sin(const StructureSpec& spec, int k, long n_iter, std::uint64_t seed,
                          ExecMode mode = ExecMode::Parallel);

}  // namespace cspapi
