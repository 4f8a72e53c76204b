#ifndef CSLPROBE_ENTANGLEMENT_HPP
#define CSLPROBE_ENTANGLEMENT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "dynamics.hpp"
#include "error.hpp"

namespace cslprobe {

/// Covariance of the two mechanical modes, ordered (x1, p1, x2, p2), with
/// vacuum variance 1/2.
template <typename Scalar = Real>
struct MechanicalState {
  using Matrix = SquareMatrix<Scalar, 4>;
  using Block = SquareMatrix<Scalar, 2>;

  Matrix V = Matrix::Identity() / Scalar(2);

  Block local_first() const { return V.template block<2, 2>(0, 0); }
  Block local_second() const { return V.template block<2, 2>(2, 2); }
  Block cross() const { return V.template block<2, 2>(0, 2); }
};

template <typename Scalar>
MechanicalState<Scalar> mechanical_block(const SquareMatrix<Scalar, 6>& V) {
  return {V.template topLeftCorner<4, 4>()};
}

/// p2 -> -p2, i.e. P V P with P = diag(1, 1, 1, -1).
template <typename Scalar>
MechanicalState<Scalar> partial_transpose(const MechanicalState<Scalar>& s) {
  MechanicalState<Scalar> t = s;
  t.V.row(quad::p2) = -t.V.row(quad::p2);
  t.V.col(quad::p2) = -t.V.col(quad::p2);
  return t;
}

inline constexpr double symplectic_agreement_tolerance = 1e-9;
inline constexpr double spurious_real_part_tolerance = 1e-9;

template <typename Scalar>
struct SymplecticMin {
  Scalar from_eigenvalues = 0;
  Scalar closed_form = 0;
  Scalar value = 0;
};

/// Symplectic spectrum from the eigenvalues of Omega V, which come in pairs
/// +-i nu. Returns the smaller nu.
template <typename Scalar>
Scalar symplectic_min_by_eigenvalues(const SquareMatrix<Scalar, 4>& V) {
  const SquareMatrix<Scalar, 4> M = symplectic_form<Scalar, 4>() * V;
  Eigen::EigenSolver<SquareMatrix<Scalar, 4>> solver(M, false);
  if (solver.info() != Eigen::Success)
    throw NumericalIntegrityError("eigenvalue solver did not converge on Omega V");
  const Scalar tol = Scalar(spurious_real_part_tolerance) * V.norm();
  Scalar nu = std::numeric_limits<Scalar>::infinity();
  for (const auto& ev : solver.eigenvalues()) {
    if (std::abs(ev.real()) > tol) {
      std::ostringstream os;
      os << "Omega V has an eigenvalue with real part " << static_cast<double>(ev.real())
         << "; the matrix is not positive definite";
      throw NumericalIntegrityError(os.str());
    }
    nu = std::min(nu, std::abs(ev.imag()));
  }
  return nu;
}

/// Two-mode closed form: nu_-^2 = (S - sqrt(S^2 - 4 det V)) / 2 with
/// S = det A + det B + 2 det C, evaluated as 2 det V / (S + sqrt(...)).
template <typename Scalar>
Scalar symplectic_min_closed_form(const SquareMatrix<Scalar, 4>& V) {
  const auto A = V.template block<2, 2>(0, 0);
  const auto B = V.template block<2, 2>(2, 2);
  const auto C = V.template block<2, 2>(0, 2);
  const Scalar invariant = A.determinant() + B.determinant() + Scalar(2) * C.determinant();
  const Scalar det = Eigen::PartialPivLU<SquareMatrix<Scalar, 4>>(V).determinant();
  const Scalar disc = std::max<Scalar>(invariant * invariant - Scalar(4) * det, 0);
  const Scalar denom = invariant + std::sqrt(disc);
  if (!(det > 0) || !(denom > 0))
    throw NumericalIntegrityError("covariance matrix is not positive definite");
  return std::sqrt(Scalar(2) * det / denom);
}

/// Smallest symplectic eigenvalue of the partially transposed state, computed
/// along two independent routes that must agree to 1e-9 relative.
template <typename Scalar>
SymplecticMin<Scalar> symplectic_eigen_min(const MechanicalState<Scalar>& state) {
  const auto transposed = partial_transpose(state);
  SymplecticMin<Scalar> r;
  r.from_eigenvalues = symplectic_min_by_eigenvalues<Scalar>(transposed.V);
  r.closed_form = symplectic_min_closed_form<Scalar>(transposed.V);
  const Scalar gap = std::abs(r.from_eigenvalues - r.closed_form);
  if (gap > Scalar(symplectic_agreement_tolerance) * r.closed_form) {
    std::ostringstream os;
    os.precision(17);
    os << "symplectic eigenvalue paths disagree: " << static_cast<double>(r.from_eigenvalues) << " vs "
       << static_cast<double>(r.closed_form);
    throw NumericalIntegrityError(os.str());
  }
  r.value = r.closed_form;
  return r;
}

/// E_N = max(0, -ln(2 nu_-)) from a minimal symplectic eigenvalue.
template <typename Scalar>
Scalar log_negativity_from(Scalar nu_min) {
  return std::max<Scalar>(0, -std::log(Scalar(2) * nu_min));
}

template <typename Scalar>
Scalar log_negativity(const MechanicalState<Scalar>& state) {
  return log_negativity_from(symplectic_eigen_min(state).value);
}

} // namespace cslprobe

#endif // CSLPROBE_ENTANGLEMENT_HPP
