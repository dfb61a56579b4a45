#include "jpmcount/liouville.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <fmt/format.h>
#include <stdexcept>

#include "jpmcount/constants.hpp"

namespace jpm {

namespace {

using SparseMatrix = Superoperator::Matrix;

SparseMatrix sparse_of(const Operator& op) {
  SparseMatrix s = op.sparseView(Complex(1.0), 0.0);
  s.makeCompressed();
  return s;
}

// vec(A rho B) = (B^T kron A) vec(rho) for column-major vec.
SparseMatrix sandwich(const Operator& left, const Operator& right) {
  return Eigen::kroneckerProduct(sparse_of(right.transpose()), sparse_of(left)).eval();
}

Eigen::MatrixXcd fock_annihilation(int n) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

void require_compatible(const Operator& op, const HilbertLayout& layout, const char* what) {
  if (op.rows() != layout.dim() || op.cols() != layout.dim()) {
    throw std::invalid_argument(std::string(what) + " does not match the Hilbert layout");
  }
}

}  // namespace

HilbertLayout::HilbertLayout(int n_fock) : n_fock_(n_fock) {
  if (n_fock < 2) throw std::invalid_argument("n_fock must be at least 2");
}

bool HilbertLayout::in_complete_block(int idx) const {
  const int jpm = jpm_of(idx);
  const int fock = fock_of(idx);
  if (jpm == level::kMeasured) return true;
  return jpm + fock <= n_fock_ - 1;
}

Operator jpm_projector(const HilbertLayout& layout, int i, int j) {
  if (i < 0 || j < 0 || i >= HilbertLayout::kJpmLevels || j >= HilbertLayout::kJpmLevels) {
    throw std::invalid_argument("JPM level out of range");
  }
  Operator p = Operator::Zero(layout.dim(), layout.dim());
  for (int n = 0; n < layout.n_fock(); ++n) p(layout.index(i, n), layout.index(j, n)) = 1.0;
  return p;
}

Operator annihilation(const HilbertLayout& layout) {
  Operator a = Operator::Zero(layout.dim(), layout.dim());
  const Eigen::MatrixXcd fock = fock_annihilation(layout.n_fock());
  for (int j = 0; j < HilbertLayout::kJpmLevels; ++j) {
    a.block(j * layout.n_fock(), j * layout.n_fock(), layout.n_fock(), layout.n_fock()) = fock;
  }
  return a;
}

Operator excitation_number(const HilbertLayout& layout) {
  const Operator a = annihilation(layout);
  return a.adjoint() * a + jpm_projector(layout, 1, 1) + 2.0 * jpm_projector(layout, 2, 2);
}

JointState JointState::basis(const HilbertLayout& layout, int jpm, int fock) {
  if (fock < 0 || fock >= layout.n_fock() || jpm < 0 || jpm >= HilbertLayout::kJpmLevels) {
    throw std::invalid_argument("basis state out of range");
  }
  JointState s;
  s.rho = Operator::Zero(layout.dim(), layout.dim());
  const int k = layout.index(jpm, fock);
  s.rho(k, k) = 1.0;
  return s;
}

double JointState::trace_deviation() const { return std::abs(rho.trace() - Complex(1.0)); }

double JointState::hermiticity_error() const {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double JointState::min_eigenvalue() const {
  const Operator h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Superoperator::Superoperator(int dim, Matrix matrix) : dim_(dim), matrix_(std::move(matrix)) {
  if (matrix_.rows() != dim * dim || matrix_.cols() != dim * dim) {
    throw std::invalid_argument("superoperator size does not match dimension");
  }
  matrix_.makeCompressed();
}

Operator Superoperator::apply(const Operator& rho) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) {
    throw std::invalid_argument("density matrix does not match superoperator dimension");
  }
  Eigen::Map<const Eigen::VectorXcd> in(rho.data(), rho.size());
  Eigen::VectorXcd out = matrix_ * in;
  return Eigen::Map<const Operator>(out.data(), dim_, dim_);
}

double Superoperator::max_trace_leak() const {
  Eigen::VectorXcd sums = Eigen::VectorXcd::Zero(matrix_.cols());
  for (int k = 0; k < matrix_.outerSize(); ++k) {
    for (Matrix::InnerIterator it(matrix_, k); it; ++it) {
      const int row = static_cast<int>(it.row());
      if (row % dim_ == row / dim_) sums(it.col()) += it.value();
    }
  }
  return sums.size() == 0 ? 0.0 : sums.cwiseAbs().maxCoeff();
}

double Superoperator::max_diagonal_rate() const {
  double rate = 0.0;
  for (int k = 0; k < matrix_.outerSize(); ++k) {
    for (Matrix::InnerIterator it(matrix_, k); it; ++it) {
      if (it.row() == it.col()) rate = std::max(rate, std::abs(it.value()));
    }
  }
  return rate;
}

Superoperator Superoperator::operator+(const Superoperator& other) const {
  if (other.dim_ != dim_) throw std::invalid_argument("superoperator dimensions differ");
  return Superoperator(dim_, Matrix(matrix_ + other.matrix_));
}

Operator build_hamiltonian_rotating(const CouplingRates& rates, const HilbertLayout& layout) {
  const Operator a = annihilation(layout);
  const Operator p10a = jpm_projector(layout, 1, 0) * a;
  const Operator p21a = jpm_projector(layout, 2, 1) * a;
  return rates.Delta * jpm_projector(layout, 1, 1) + rates.g1 * (p10a + p10a.adjoint()) +
         rates.g2 * (p21a + p21a.adjoint());
}

Operator schrieffer_wolff_generator(const CouplingRates& rates, const HilbertLayout& layout) {
  const Operator a = annihilation(layout);
  const Operator A = -rates.lambda1 * jpm_projector(layout, 1, 0) * a +
                     rates.lambda2 * jpm_projector(layout, 2, 1) * a;
  return A - A.adjoint();
}

Operator schrieffer_wolff_unitary(const CouplingRates& rates, const HilbertLayout& layout) {
  const Operator G = schrieffer_wolff_generator(rates, layout);
  return G.exp();
}

Operator build_effective_hamiltonian(const CouplingRates& rates, const HilbertLayout& layout) {
  const Operator a = annihilation(layout);
  const Operator p00 = jpm_projector(layout, 0, 0);
  const Operator p11 = jpm_projector(layout, 1, 1);
  const Operator p22 = jpm_projector(layout, 2, 2);
  const Operator pair = jpm_projector(layout, 2, 0) * a * a;
  const Operator number = a.adjoint() * a;
  const Operator sz01 = p11 - p00;
  const Operator sz12 = p22 - p11;
  return (rates.Delta + rates.chi1) * p11 - rates.chi2 * p22 +
         rates.g_tilde * (pair + pair.adjoint()) +
         (rates.chi1 * sz01 - rates.chi2 * sz12) * number;
}

InteractionFrame interaction_frame_generator(const CouplingRates& rates,
                                             const HilbertLayout& layout) {
  const Operator a = annihilation(layout);
  const Operator number = a.adjoint() * a;
  const Operator id = Operator::Identity(layout.dim(), layout.dim());
  const Operator sz01 = jpm_projector(layout, 1, 1) - jpm_projector(layout, 0, 0);
  const Operator sz12 = jpm_projector(layout, 2, 2) - jpm_projector(layout, 1, 1);
  InteractionFrame out;
  out.r = rates.chi1 * (number - 2.0 * sz01) - rates.chi2 * (id + number - 2.0 * sz12);
  out.r0.resize(layout.n_fock());
  for (int n = 0; n < layout.n_fock(); ++n) {
    const int k = layout.index(level::kGround, n);
    out.r0(n) = out.r(k, k).real();
  }
  return out;
}

std::vector<JumpOperator> bare_jump_operators(const CouplingRates& rates,
                                              const HilbertLayout& layout) {
  const int m = level::kMeasured;
  return {
      {rates.gamma0, jpm_projector(layout, m, 0), "gamma0"},
      {rates.Gamma10, jpm_projector(layout, 0, 1), "Gamma10"},
      {rates.Gamma11, jpm_projector(layout, 1, 1), "Gamma11"},
      {rates.gamma1, jpm_projector(layout, m, 1), "gamma1"},
      {rates.Gamma21, jpm_projector(layout, 1, 2), "Gamma21"},
      {rates.Gamma22, jpm_projector(layout, 2, 2), "Gamma22"},
      {rates.gamma2, jpm_projector(layout, m, 2), "gamma2"},
  };
}

Superoperator dissipator(std::span<const JumpOperator> jumps, const HilbertLayout& layout) {
  const int dim = layout.dim();
  const Operator id = Operator::Identity(dim, dim);
  SparseMatrix total(dim * dim, dim * dim);
  for (const auto& jump : jumps) {
    if (jump.rate == 0.0) continue;
    require_compatible(jump.op, layout, "jump operator");
    const Operator n = jump.op.adjoint() * jump.op;
    const SparseMatrix term = sandwich(jump.op, jump.op.adjoint()) - 0.5 * sandwich(n, id) -
                              0.5 * sandwich(id, n);
    total += jump.rate * term;
  }
  total.prune(Complex(0.0));
  return Superoperator(dim, std::move(total));
}

Superoperator build_lindbladian(const CouplingRates& rates, const HilbertLayout& layout,
                                const Operator& hamiltonian) {
  require_compatible(hamiltonian, layout, "Hamiltonian");
  const int dim = layout.dim();
  const Operator id = Operator::Identity(dim, dim);
  const Complex minus_i(0.0, -1.0);
  SparseMatrix coherent = minus_i * (sandwich(hamiltonian, id) - sandwich(id, hamiltonian));
  const auto jumps = bare_jump_operators(rates, layout);
  SparseMatrix total = coherent + dissipator(jumps, layout).matrix();
  total.prune(Complex(0.0));
  return Superoperator(dim, std::move(total));
}

namespace {

// Block formulas, valid for Hermitian rho.
Operator dressed_correction_hermitian(const CouplingRates& r, const HilbertLayout& layout,
                                      const Operator& rho) {
  const int nf = layout.n_fock();
  const Eigen::MatrixXcd a = fock_annihilation(nf);
  const Eigen::MatrixXcd ad = a.adjoint();
  auto p = [&](int i, int j) -> Eigen::MatrixXcd { return rho.block(i * nf, j * nf, nf, nf); };
  auto herm = [](const Eigen::MatrixXcd& x) -> Eigen::MatrixXcd { return x + x.adjoint(); };
  constexpr int m = level::kMeasured;

  const double l1 = r.lambda1;
  const double l2 = r.lambda2;
  const double g0 = r.gamma0, g1 = r.gamma1, g2 = r.gamma2;
  const double G10 = r.Gamma10, G21 = r.Gamma21, G11 = r.Gamma11, G22 = r.Gamma22;

  // Recurring rate combinations.
  const double c1p = g1 - g0 + G11 + G10;          // (g1 - g0 + G11 + G10)
  const double c1m = -g1 + g0 - G11 - G10;         // (-g1 + g0 - G11 - G10)
  const double c2a = g2 - g1 + G22 + G21 - G11 - G10;
  const double c2b = g2 - g1 + G22 + G21 + G11 - G10;
  const double c2c = g2 - g1 - G22 + G21 - G11 - G10;

  Eigen::MatrixXcd L[4][4];

  L[0][0] = herm(l2 * G10 * ad * p(2, 1) - 0.5 * l1 * c1p * ad * p(1, 0) +
                 l1 * G10 * a * p(0, 1));
  L[1][1] = herm(0.5 * l2 * c2b * ad * p(2, 1) - l2 * G21 * a * p(1, 2) +
                 0.5 * l1 * (-g1 + g0 + G11 - G10) * a * p(0, 1));
  L[2][2] = herm(0.5 * l2 * c2c * a * p(1, 2));
  L[m][m] = herm(l2 * g1 * ad * p(2, 1) - l1 * g0 * ad * p(1, 0) - l2 * g2 * a * p(1, 2) +
                 l1 * g1 * a * p(0, 1));

  L[0][1] = l1 * G21 * ad * p(2, 2) - 0.5 * l1 * (g1 - g0 - G11 + G10) * ad * p(1, 1) -
            l1 * G10 * p(1, 1) * ad + 0.5 * l1 * c1m * p(0, 0) * ad +
            0.5 * l2 * c2a * p(0, 2) * a;
  L[1][2] = 0.5 * l2 * c2c * ad * p(2, 2) - 0.5 * l1 * c1p * a * p(0, 2) +
            l2 * G21 * p(2, 2) * ad + 0.5 * l2 * c2b * p(1, 1) * ad;
  L[0][2] = 0.5 * l2 * c2a * p(0, 1) * ad - 0.5 * l1 * c1p * ad * p(1, 2);
  L[m][0] = 0.5 * l1 * c1m * p(m, 1) * a;
  L[m][1] = 0.5 * l2 * c2a * p(m, 2) * a - 0.5 * l1 * c1p * p(m, 0) * ad;
  L[m][2] = 0.5 * l2 * c2a * p(m, 1) * ad;

  L[1][0] = L[0][1].adjoint();
  L[2][1] = L[1][2].adjoint();
  L[2][0] = L[0][2].adjoint();
  L[0][m] = L[m][0].adjoint();
  L[1][m] = L[m][1].adjoint();
  L[2][m] = L[m][2].adjoint();

  Operator out(layout.dim(), layout.dim());
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) out.block(i * nf, j * nf, nf, nf) = L[i][j];
  }
  return out;
}

}  // namespace

Operator apply_dressed_correction(const CouplingRates& r, const HilbertLayout& layout,
                                  const Operator& rho) {
  require_compatible(rho, layout, "density matrix");
  // Linear extension: rho = h1 + i h2 with h1, h2 Hermitian.
  const Operator h1 = 0.5 * (rho + rho.adjoint());
  const Operator h2 = Complex(0.0, -0.5) * (rho - rho.adjoint());
  return dressed_correction_hermitian(r, layout, h1) +
         Complex(0.0, 1.0) * dressed_correction_hermitian(r, layout, h2);
}

Superoperator dressed_correction(const CouplingRates& rates, const HilbertLayout& layout) {
  return Superoperator::from_map(layout.dim(), [&](const Operator& rho) {
    return apply_dressed_correction(rates, layout, rho);
  });
}

std::vector<JumpOperator> transformed_jump_operators(std::span<const JumpOperator> jumps,
                                                     const Operator& unitary, JumpFrame frame) {
  std::vector<JumpOperator> out;
  out.reserve(jumps.size());
  for (const auto& jump : jumps) {
    JumpOperator t = jump;
    t.op = frame == JumpFrame::kConjugated ? Operator(unitary * jump.op * unitary.adjoint())
                                           : Operator(unitary.adjoint() * jump.op * unitary);
    out.push_back(std::move(t));
  }
  return out;
}

Trajectory evolve(const JointState& initial, const Superoperator& generator,
                  const HilbertLayout& layout, std::span<const double> times,
                  const EvolveOptions& options) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<Complex>;

  const int dim = layout.dim();
  require_compatible(initial.rho, layout, "initial state");
  if (generator.dim() != dim) {
    throw std::invalid_argument("generator does not match the Hilbert layout");
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k]) || times[k] < initial.time ||
        (k > 0 && times[k] < times[k - 1])) {
      throw std::invalid_argument("sample times must be ascending and not before the state");
    }
  }

  const auto& L = generator.matrix();
  auto rhs = [&L](const State& x, State& dxdt, double /*t*/) {
    Eigen::Map<const Eigen::VectorXcd> in(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXcd> out(dxdt.data(), static_cast<Eigen::Index>(dxdt.size()));
    out.noalias() = L * in;
  };

  State x(initial.rho.data(), initial.rho.data() + initial.rho.size());
  auto as_matrix = [dim](const State& s) {
    return Operator(Eigen::Map<const Operator>(s.data(), dim, dim));
  };
  auto symmetrize = [dim](State& s) {
    Eigen::Map<Operator> rho(s.data(), dim, dim);
    const Operator h = 0.5 * (rho + rho.adjoint());
    rho = h;
  };
  auto edge = [&layout, dim](const State& s) {
    double total = 0.0;
    for (int j = 0; j < HilbertLayout::kJpmLevels; ++j) {
      const int k = layout.index(j, layout.n_fock() - 1);
      total += s[static_cast<std::size_t>(k) * dim + k].real();
    }
    return total;
  };

  Trajectory traj;
  traj.max_edge_population = edge(x);
  const double t0 = initial.time;
  const double horizon = times.empty() ? 0.0 : times.back() - t0;
  const double fastest = generator.max_diagonal_rate();
  const double min_step = options.min_step_fraction * horizon;

  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(options.abs_tol,
                                                                             options.rel_tol);
  double t = t0;
  double dt = fastest > 0.0 ? 0.1 / fastest : horizon;
  if (options.max_step > 0.0) dt = std::min(dt, options.max_step);

  for (const double target : times) {
    while (t < target) {
      double step = std::min(dt, target - t);
      if (options.max_step > 0.0) step = std::min(step, options.max_step);
      const bool landing = step >= target - t;
      const double previous = dt;
      // On success odeint advances t and overwrites step with its next proposal.
      const auto result = stepper.try_step(rhs, x, t, step);
      if (result == odeint::success) {
        ++traj.steps;
        if (landing) t = target;  // absorb rounding in t += step
        if (options.symmetrize) {
          symmetrize(x);
          stepper.reset();  // the cached FSAL derivative is stale after symmetrizing
        }
        traj.max_edge_population = std::max(traj.max_edge_population, edge(x));
        // A short landing step should not shrink the next proposal.
        dt = landing ? std::max(step, previous) : step;
      } else {
        ++traj.rejected_steps;
        dt = step;
        if (dt < min_step) {
          throw DomainError(fmt::format(
              "step size underflow at t = {:.6g} s (step {:.3g} s); max|L_kk| * horizon = {:.3g}",
              t, dt, fastest * horizon));
        }
      }
    }
    JointState sample;
    sample.rho = as_matrix(x);
    sample.time = target;
    traj.samples.push_back(std::move(sample));
  }
  traj.edge_flag = traj.max_edge_population > options.edge_tolerance;
  return traj;
}

double click_probability(const JointState& state, const HilbertLayout& layout) {
  require_compatible(state.rho, layout, "state");
  double total = 0.0;
  for (int n = 0; n < layout.n_fock(); ++n) {
    const int k = layout.index(level::kMeasured, n);
    total += state.rho(k, k).real();
  }
  constexpr double kSlack = 1e-8;
  if (total < -kSlack || total > 1.0 + kSlack) {
    throw DomainError(fmt::format("click probability {:.6g} outside [0, 1]", total));
  }
  return std::clamp(total, 0.0, 1.0);
}

double edge_population(const JointState& state, const HilbertLayout& layout) {
  require_compatible(state.rho, layout, "state");
  double total = 0.0;
  for (int j = 0; j < HilbertLayout::kJpmLevels; ++j) {
    const int k = layout.index(j, layout.n_fock() - 1);
    total += state.rho(k, k).real();
  }
  return total;
}

double population(const JointState& state, const HilbertLayout& layout, int jpm, int fock) {
  require_compatible(state.rho, layout, "state");
  const int k = layout.index(jpm, fock);
  return state.rho(k, k).real();
}

}  // namespace jpm
