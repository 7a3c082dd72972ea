#ifndef CRN_KINETICS_HPP
#define CRN_KINETICS_HPP

#include "crn/network.hpp"

#include <Eigen/Core>

#include <vector>

namespace crn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Orthonormal basis of the stoichiometric subspace im Gamma. The column
/// count comes from the exact rank, so no floating rank threshold is ever
/// involved; only the orthonormalization itself is numeric.
class ReducedBasis {
 public:
  /// variant selects among equivalent orthonormalizations (column order is
  /// permuted by the seed); spectra of reduced operators must not depend on it.
  explicit ReducedBasis(const Network& net, unsigned variant = 0);

  const Matrix& columns() const { return basis_; }
  int dimension() const { return static_cast<int>(basis_.cols()); }
  int ambient() const { return static_cast<int>(basis_.rows()); }

  /// || (I - B B^t) v ||
  double off_subspace_norm(const Vector& v) const;

 private:
  Matrix basis_;
};

/// Mass-action dynamics x' = Gamma v(x), v_j = k_j * x^(reactant_j).
///
/// Immutable after construction; all evaluation methods are const and safe to
/// call concurrently from multiple threads.
class MassActionSystem {
 public:
  MassActionSystem(Network net, std::vector<double> rate_constants);

  const Network& network() const { return net_; }
  const std::vector<double>& rate_constants() const { return k_; }
  int dim() const { return net_.n_species(); }

  const Matrix& gamma() const { return gamma_double_; }
  const RationalMatrix& gamma_exact() const { return gamma_exact_; }

  /// Monomial rates; false on domain violation or non-finite result.
  /// Boundary states with integer exponents use the continuous extension
  /// (0^0 = 1); a fractional exponent of a non-positive entry fails.
  bool rates_into(const Vector& x, Vector& v) const noexcept;
  bool rhs_into(const Vector& x, Vector& dx) const noexcept;

  /// Throwing wrappers (EvaluationError).
  Vector rates(const Vector& x) const;
  Vector rhs(const Vector& x) const;

  /// Analytic Jacobian of the right-hand side, n x n.
  Matrix jacobian(const Vector& x) const;

  /// Rates of a subset of reactions (columns of v), used by the slow-fast
  /// machinery for the split-reaction rate vector.
  Vector rates_subset(const Vector& x, const std::vector<int>& reactions) const;

 private:
  struct Term {
    int species;
    double exponent;
    long long int_exponent;
    bool integral;
  };

  double monomial(const Vector& x, int reaction) const noexcept;
  double monomial_derivative(const Vector& x, int reaction, int species) const noexcept;

  Network net_;
  std::vector<double> k_;
  std::vector<std::vector<Term>> terms_;
  RationalMatrix gamma_exact_;
  Matrix gamma_double_;
};

/// B^t (Gamma Dv(x)) B: the Jacobian restricted to the stoichiometric
/// subspace; its eigenvalues are the relevant spectrum for nondegeneracy.
Matrix reduced_jacobian(const MassActionSystem& sys, const Vector& x, const ReducedBasis& basis);

} // namespace crn

#endif
