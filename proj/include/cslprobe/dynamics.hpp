#ifndef CSLPROBE_DYNAMICS_HPP
#define CSLPROBE_DYNAMICS_HPP

#include <algorithm>
#include <array>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "noise.hpp"
#include "params.hpp"

namespace cslprobe {

/// Positions in the quadrature vector (x1, p1, x2, p2, X, Y).
namespace quad {
inline constexpr int x1 = 0, p1 = 1, x2 = 2, p2 = 3, X = 4, Y = 5;
} // namespace quad

/// The steady state is computed in extended precision: the two mechanical
/// quadrature combinations that decouple from the cavity are damped only by
/// gamma/2, so covariance entries reach ~1e8 and a double-precision V cannot
/// meet the residual bound.
using Real = long double;

template <typename Scalar, int N>
using SquareMatrix = Eigen::Matrix<Scalar, N, N>;

template <typename Scalar = Real>
struct LinearModel {
  using Matrix = SquareMatrix<Scalar, 6>;
  Matrix drift = Matrix::Zero();
  Matrix diffusion = Matrix::Zero();
  /// max(kappa_eff, gamma); sets the stability margin.
  Scalar rate_scale = 0;
};

/// Drift and diffusion of the linearized Langevin equations (interaction
/// frame, so the trap frequencies only enter through the noise rates):
///
///   dX/dt  = -k X + D Y - G1 p1 + G2 p2
///   dY/dt  = -k Y - D X - G1 x1 - G2 x2
///   dx_j/dt = -gamma/2 x_j + (-1)^j G_j Y
///   dp_j/dt = -gamma/2 p_j - G_j X
template <typename Scalar = Real>
LinearModel<Scalar> build_model(const DerivedQuantities& dq, const std::array<NoiseBudget, 2>& noise, bool csl_on) {
  using namespace quad;
  LinearModel<Scalar> m;
  auto& A = m.drift;
  const Scalar half_gamma = Scalar(dq.gamma) / 2;
  const Scalar k = dq.kappa_eff;
  const Scalar G1 = dq.G[0];
  const Scalar G2 = dq.G[1];
  const Scalar delta = dq.config.detuning;

  for (int i : {x1, p1, x2, p2})
    A(i, i) = -half_gamma;
  A(x1, Y) = -G1;
  A(p1, X) = -G1;
  A(x2, Y) = G2;
  A(p2, X) = -G2;
  A(X, p1) = -G1;
  A(X, p2) = G2;
  A(X, X) = -k;
  A(X, Y) = delta;
  A(Y, x1) = -G1;
  A(Y, x2) = -G2;
  A(Y, X) = -delta;
  A(Y, Y) = -k;

  const Scalar s1 = noise[0].total(csl_on);
  const Scalar s2 = noise[1].total(csl_on);
  m.diffusion.diagonal() << s1 / 2, s1 / 2, s2 / 2, s2 / 2, k, k;
  m.rate_scale = std::max<Scalar>(k, Scalar(dq.gamma));
  return m;
}

/// Wraps arbitrary drift/diffusion matrices; the rate scale is the largest
/// diagonal drift magnitude.
template <typename Scalar>
LinearModel<Scalar> make_model(const SquareMatrix<Scalar, 6>& drift, const SquareMatrix<Scalar, 6>& diffusion) {
  LinearModel<Scalar> m{drift, diffusion, drift.diagonal().cwiseAbs().maxCoeff()};
  return m;
}

template <typename Scalar>
struct StabilityReport {
  bool stable = false;
  Scalar abscissa = 0; // max Re(eig(A))
  Scalar margin = 0;   // required: abscissa < -margin
  std::vector<std::complex<Scalar>> eigenvalues;
};

inline constexpr double stability_margin_factor = 1e-9;

template <typename Scalar, int N>
std::vector<std::complex<Scalar>> eigenvalues(const SquareMatrix<Scalar, N>& A) {
  Eigen::EigenSolver<SquareMatrix<Scalar, N>> solver(A, false);
  if (solver.info() != Eigen::Success)
    throw NumericalIntegrityError("eigenvalue solver did not converge");
  std::vector<std::complex<Scalar>> ev(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return ev;
}

/// Stable means every eigenvalue of the drift sits left of
/// -1e-9 * rate_scale, which also keeps the Lyapunov system nonsingular.
template <typename Scalar, int N>
StabilityReport<Scalar> stability(const SquareMatrix<Scalar, N>& A, Scalar rate_scale) {
  StabilityReport<Scalar> r;
  r.eigenvalues = eigenvalues<Scalar, N>(A);
  r.abscissa = r.eigenvalues.front().real();
  r.margin = Scalar(stability_margin_factor) * rate_scale;
  r.stable = r.abscissa < -r.margin;
  return r;
}

template <typename Scalar>
StabilityReport<Scalar> is_stable(const LinearModel<Scalar>& model) {
  return stability<Scalar, 6>(model.drift, model.rate_scale);
}

inline constexpr double lyapunov_residual_bound = 1e-10;
inline constexpr double lyapunov_condition_warning = 1e12;

template <typename Scalar, int N>
struct LyapunovSolution {
  SquareMatrix<Scalar, N> V;
  Scalar residual = 0;  // ||AV + VA^T + D||_F / ||D||_F
  Scalar condition = 0; // reciprocal of the LU rcond estimate
  bool ill_conditioned = false;
};

template <typename Scalar, int N>
Scalar lyapunov_residual(const SquareMatrix<Scalar, N>& A, const SquareMatrix<Scalar, N>& D,
                         const SquareMatrix<Scalar, N>& V) {
  const Scalar dn = D.norm();
  const Scalar rn = (A * V + V * A.transpose() + D).norm();
  return dn > 0 ? rn / dn : rn;
}

/// Solves A V + V A^T = -D through the vectorized form
/// (I (x) A + A (x) I) vec(V) = -vec(D), with two steps of iterative
/// refinement, then symmetrizes. No stability check is made here.
template <typename Scalar, int N>
LyapunovSolution<Scalar, N> solve_lyapunov_unchecked(const SquareMatrix<Scalar, N>& A,
                                                    const SquareMatrix<Scalar, N>& D) {
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  constexpr int n2 = N * N;

  // Column-major vec: vec(AV) = (I (x) A) vec V, vec(V A^T) = (A (x) I) vec V.
  Dense K = Dense::Zero(n2, n2);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < N; ++k) {
        K(i + N * j, k + N * j) += A(i, k);
        K(i + N * j, i + N * k) += A(j, k);
      }

  Vec rhs(n2);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i)
      rhs(i + N * j) = -D(i, j);

  Eigen::PartialPivLU<Dense> lu(K);
  Vec x = lu.solve(rhs);
  for (int step = 0; step < 2; ++step)
    x += lu.solve(rhs - K * x);

  LyapunovSolution<Scalar, N> sol;
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i)
      sol.V(i, j) = x(i + N * j);
  sol.V = ((sol.V + sol.V.transpose()) / Scalar(2)).eval();
  sol.residual = lyapunov_residual<Scalar, N>(A, D, sol.V);
  const Scalar rc = lu.rcond();
  sol.condition = rc > 0 ? Scalar(1) / rc : std::numeric_limits<Scalar>::infinity();
  sol.ill_conditioned = sol.condition > Scalar(lyapunov_condition_warning);
  return sol;
}

/// Steady-state covariance of a stable model. Throws InstabilityError when no
/// steady state exists and NumericalIntegrityError when the residual bound is
/// missed.
template <typename Scalar>
LyapunovSolution<Scalar, 6> solve_lyapunov(const LinearModel<Scalar>& model) {
  const auto st = is_stable(model);
  if (!st.stable) {
    std::ostringstream os;
    os << "drift matrix is not stable (spectral abscissa " << static_cast<double>(st.abscissa)
       << " s^-1); no steady state exists";
    throw InstabilityError(os.str());
  }
  auto sol = solve_lyapunov_unchecked<Scalar, 6>(model.drift, model.diffusion);
  if (!(sol.residual <= Scalar(lyapunov_residual_bound))) {
    std::ostringstream os;
    os << "Lyapunov residual " << static_cast<double>(sol.residual) << " exceeds " << lyapunov_residual_bound;
    throw NumericalIntegrityError(os.str());
  }
  return sol;
}

/// Block-diagonal symplectic form, (+) over modes of [[0, 1], [-1, 0]].
template <typename Scalar, int N>
SquareMatrix<Scalar, N> symplectic_form() {
  static_assert(N % 2 == 0);
  SquareMatrix<Scalar, N> omega = SquareMatrix<Scalar, N>::Zero();
  for (int i = 0; i < N; i += 2) {
    omega(i, i + 1) = 1;
    omega(i + 1, i) = -1;
  }
  return omega;
}

/// Smallest eigenvalue of the Hermitian matrix V + i Omega / 2. A bona fide
/// covariance matrix has this >= 0.
template <typename Scalar, int N>
Scalar uncertainty_margin(const SquareMatrix<Scalar, N>& V) {
  using Complex = std::complex<Scalar>;
  Eigen::Matrix<Complex, N, N> M = V.template cast<Complex>();
  M += Complex(0, Scalar(0.5)) * symplectic_form<Scalar, N>().template cast<Complex>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Complex, N, N>> solver(M, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericalIntegrityError("Hermitian eigenvalue solver did not converge");
  return solver.eigenvalues().minCoeff();
}

template <typename Scalar, int N>
Scalar min_eigenvalue(const SquareMatrix<Scalar, N>& V) {
  Eigen::SelfAdjointEigenSolver<SquareMatrix<Scalar, N>> solver(V, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericalIntegrityError("symmetric eigenvalue solver did not converge");
  return solver.eigenvalues().minCoeff();
}

inline constexpr double physicality_tolerance = 1e-9;

template <typename Scalar, int N>
bool is_physical(const SquareMatrix<Scalar, N>& V, Scalar tol = Scalar(physicality_tolerance)) {
  return min_eigenvalue<Scalar, N>(V) > 0 && uncertainty_margin<Scalar, N>(V) >= -tol;
}

} // namespace cslprobe

#endif // CSLPROBE_DYNAMICS_HPP
