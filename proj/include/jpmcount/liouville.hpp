#pragma once

// Joint resonator + JPM density-matrix dynamics in the frame rotating at the
// resonator frequency. Operators are stored as H/hbar (rad/s).
//
// Basis ordering: index = jpm * n_fock + fock, jpm levels {0, 1, 2, m}.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "jpmcount/circuit_model.hpp"

namespace jpm {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;

namespace level {
inline constexpr int kGround = 0;
inline constexpr int kFirst = 1;
inline constexpr int kSecond = 2;
inline constexpr int kMeasured = 3;
}  // namespace level

class HilbertLayout {
 public:
  static constexpr int kJpmLevels = 4;

  explicit HilbertLayout(int n_fock);

  int n_fock() const { return n_fock_; }
  int dim() const { return kJpmLevels * n_fock_; }
  int index(int jpm, int fock) const { return jpm * n_fock_ + fock; }
  int jpm_of(int index) const { return index / n_fock_; }
  int fock_of(int index) const { return index % n_fock_; }

  /// True for basis states whose excitation-number block (fock + jpm level,
  /// or just fock for |m>) is complete in the truncated space.
  bool in_complete_block(int index) const;

 private:
  int n_fock_;
};

/// |i><j| on the JPM, identity on the resonator.
Operator jpm_projector(const HilbertLayout& layout, int i, int j);
/// Truncated annihilation operator on the resonator.
Operator annihilation(const HilbertLayout& layout);
/// a^dag a + |1><1| + 2 |2><2|.
Operator excitation_number(const HilbertLayout& layout);

struct JointState {
  Operator rho;
  double time = 0.0;

  /// |jpm, fock><jpm, fock|.
  static JointState basis(const HilbertLayout& layout, int jpm, int fock);

  double trace_deviation() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;
};

/// Linear map on density matrices acting on column-major vec(rho).
class Superoperator {
 public:
  using Matrix = Eigen::SparseMatrix<Complex>;

  Superoperator() = default;
  Superoperator(int dim, Matrix matrix);

  int dim() const { return dim_; }
  const Matrix& matrix() const { return matrix_; }
  Operator apply(const Operator& rho) const;

  /// Largest |sum_d L(dd, k)| over columns k: zero for trace-preserving maps.
  double max_trace_leak() const;
  /// Largest |L(k, k)|, the fastest single rate in the map.
  double max_diagonal_rate() const;

  Superoperator operator+(const Superoperator& other) const;

  /// Materialize an arbitrary linear map rho -> f(rho).
  template <typename Map>
  static Superoperator from_map(int dim, Map&& map);

 private:
  int dim_ = 0;
  Matrix matrix_;
};

Operator build_hamiltonian_rotating(const CouplingRates& rates, const HilbertLayout& layout);

/// G = A - A^dag with A = -lambda1 |1><0| a + lambda2 |2><1| a.
Operator schrieffer_wolff_generator(const CouplingRates& rates, const HilbertLayout& layout);
/// U = exp(G). Exactly unitary on complete excitation blocks; the top Fock
/// state is the truncation edge.
Operator schrieffer_wolff_unitary(const CouplingRates& rates, const HilbertLayout& layout);

/// (Delta + chi1)|1><1| - chi2 |2><2| + g~ (|2><0| a^2 + h.c.)
///   + (chi1 sz01 - chi2 sz12) a^dag a,  with sz_ij = |j><j| - |i><i|.
Operator build_effective_hamiltonian(const CouplingRates& rates, const HilbertLayout& layout);

struct InteractionFrame {
  Eigen::VectorXd r0;  ///< <0|r|0> on the resonator, diagonal in Fock space
  Operator r;          ///< chi1 (N - 2 sz01) - chi2 (1 + N - 2 sz12)
};
InteractionFrame interaction_frame_generator(const CouplingRates& rates,
                                             const HilbertLayout& layout);

struct JumpOperator {
  double rate = 0.0;
  Operator op;
  std::string label;
};

/// gamma0 D[|m><0|], Gamma10 D[|0><1|], Gamma11 D[|1><1|], gamma1 D[|m><1|],
/// Gamma21 D[|1><2|], Gamma22 D[|2><2|], gamma2 D[|m><2|].
std::vector<JumpOperator> bare_jump_operators(const CouplingRates& rates,
                                              const HilbertLayout& layout);

/// Sum of rate * D[op] over the given jumps.
Superoperator dissipator(std::span<const JumpOperator> jumps, const HilbertLayout& layout);

/// -i[H, .] + bare dissipators.
Superoperator build_lindbladian(const CouplingRates& rates, const HilbertLayout& layout,
                                const Operator& hamiltonian);

/// First-order dressing of the dissipators by the frame change, evaluated
/// block by block on rho.
Operator apply_dressed_correction(const CouplingRates& rates, const HilbertLayout& layout,
                                  const Operator& rho);
Superoperator dressed_correction(const CouplingRates& rates, const HilbertLayout& layout);

enum class JumpFrame {
  kConjugated,         ///< A -> U A U^dag
  kAdjointConjugated,  ///< A -> U^dag A U
};

std::vector<JumpOperator> transformed_jump_operators(std::span<const JumpOperator> jumps,
                                                     const Operator& unitary, JumpFrame frame);

struct EvolveOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 0.0;  ///< 0: unlimited
  double min_step_fraction = 1e-13;  ///< relative to the integration horizon
  bool symmetrize = true;
  double edge_tolerance = 1e-6;
};

struct Trajectory {
  std::vector<JointState> samples;
  std::size_t steps = 0;
  std::size_t rejected_steps = 0;
  double max_edge_population = 0.0;
  bool edge_flag = false;  ///< top Fock state exceeded edge_tolerance
};

/// Adaptive Dormand-Prince 5(4) integration of d rho/dt = L rho, sampled at
/// `times` (ascending, >= initial.time). Throws DomainError on step-size
/// underflow, reporting max|L_kk| times the horizon.
Trajectory evolve(const JointState& initial, const Superoperator& generator,
                  const HilbertLayout& layout, std::span<const double> times,
                  const EvolveOptions& options = {});

/// Total population of |m>, summed over the resonator.
double click_probability(const JointState& state, const HilbertLayout& layout);
double edge_population(const JointState& state, const HilbertLayout& layout);
/// Population of |jpm, fock>.
double population(const JointState& state, const HilbertLayout& layout, int jpm, int fock);

template <typename Map>
Superoperator Superoperator::from_map(int dim, Map&& map) {
  std::vector<Eigen::Triplet<Complex>> triplets;
  Operator unit = Operator::Zero(dim, dim);
  for (int col = 0; col < dim; ++col) {
    for (int row = 0; row < dim; ++row) {
      unit(row, col) = 1.0;
      const Operator image = map(unit);
      unit(row, col) = 0.0;
      const int k = col * dim + row;
      for (int c = 0; c < dim; ++c) {
        for (int r = 0; r < dim; ++r) {
          if (image(r, c) != Complex(0.0)) triplets.emplace_back(c * dim + r, k, image(r, c));
        }
      }
    }
  }
  Matrix m(dim * dim, dim * dim);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return Superoperator(dim, std::move(m));
}

}  // namespace jpm
