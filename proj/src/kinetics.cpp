#include "crn/kinetics.hpp"

#include "crn/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace crn {

ReducedBasis::ReducedBasis(const Network& net, unsigned variant) {
  const RationalMatrix gamma_exact = stoichiometric_matrix(net);
  const int rank = gamma_exact.rank();
  const Matrix gamma = gamma_exact.to_double();
  const int n = static_cast<int>(gamma.rows());

  Matrix cols = gamma;
  if (variant != 0 && gamma.cols() > 1) {
    // deterministic column shuffle keyed by the variant
    std::vector<int> order(gamma.cols());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    unsigned state = variant;
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
      state = state * 1664525u + 1013904223u;
      std::swap(order[i], order[state % (i + 1)]);
    }
    for (int j = 0; j < gamma.cols(); ++j) cols.col(j) = gamma.col(order[j]);
  }

  if (rank == 0) {
    basis_ = Matrix::Zero(n, 0);
    return;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(cols);
  Matrix q = qr.householderQ() * Matrix::Identity(n, rank);
  basis_ = q;

  // Validate span: every Gamma column must project into the basis.
  for (int j = 0; j < gamma.cols(); ++j) {
    const Vector g = gamma.col(j);
    if (off_subspace_norm(g) > 1e-10 * (1.0 + g.norm()))
      throw NumericsError("ReducedBasis: orthonormalization failed to span the stoichiometric subspace");
  }
}

double ReducedBasis::off_subspace_norm(const Vector& v) const {
  if (basis_.cols() == 0) return v.norm();
  return (v - basis_ * (basis_.transpose() * v)).norm();
}

namespace {
constexpr double kOverflowGuard = 1e150;
}

MassActionSystem::MassActionSystem(Network net, std::vector<double> rate_constants)
    : net_(std::move(net)), k_(std::move(rate_constants)) {
  if (static_cast<int>(k_.size()) != net_.n_reactions())
    throw std::invalid_argument("MassActionSystem: need one rate constant per reaction");
  for (double k : k_)
    if (!(k > 0) || !std::isfinite(k)) throw std::invalid_argument("MassActionSystem: rate constants must be positive");

  terms_.resize(net_.n_reactions());
  for (int j = 0; j < net_.n_reactions(); ++j) {
    for (const auto& [idx, coeff] : net_.reactions[j].reactant.terms()) {
      Term t;
      t.species = idx;
      t.exponent = to_double(coeff);
      t.integral = denominator(coeff) == 1 && numerator(coeff) <= 64;
      t.int_exponent = t.integral ? numerator(coeff).convert_to<long long>() : 0;
      terms_[j].push_back(t);
    }
  }
  gamma_exact_ = stoichiometric_matrix(net_);
  gamma_double_ = gamma_exact_.to_double();
}

double MassActionSystem::monomial(const Vector& x, int reaction) const noexcept {
  double m = 1.0;
  for (const Term& t : terms_[reaction]) {
    const double xi = x[t.species];
    if (t.integral) {
      double p = 1.0;
      for (long long e = 0; e < t.int_exponent; ++e) p *= xi;
      m *= p;
    } else {
      if (!(xi > 0)) return std::numeric_limits<double>::quiet_NaN();
      m *= std::pow(xi, t.exponent);
    }
    if (std::abs(m) > kOverflowGuard) return std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

double MassActionSystem::monomial_derivative(const Vector& x, int reaction, int species) const noexcept {
  // d/dx_s of prod x_i^{a_i} = a_s x_s^{a_s - 1} prod_{i != s} x_i^{a_i}
  double m = 1.0;
  bool present = false;
  for (const Term& t : terms_[reaction]) {
    const double xi = x[t.species];
    if (t.species == species) {
      present = true;
      if (t.integral) {
        double p = 1.0;
        for (long long e = 1; e < t.int_exponent; ++e) p *= xi;
        m *= static_cast<double>(t.int_exponent) * p;
      } else {
        if (!(xi > 0)) return std::numeric_limits<double>::quiet_NaN();
        m *= t.exponent * std::pow(xi, t.exponent - 1.0);
      }
    } else {
      if (t.integral) {
        double p = 1.0;
        for (long long e = 0; e < t.int_exponent; ++e) p *= xi;
        m *= p;
      } else {
        if (!(xi > 0)) return std::numeric_limits<double>::quiet_NaN();
        m *= std::pow(xi, t.exponent);
      }
    }
    if (std::abs(m) > kOverflowGuard) return std::numeric_limits<double>::quiet_NaN();
  }
  return present ? m : 0.0;
}

bool MassActionSystem::rates_into(const Vector& x, Vector& v) const noexcept {
  if (x.size() != dim()) return false;
  v.resize(net_.n_reactions());
  for (int j = 0; j < net_.n_reactions(); ++j) {
    const double m = monomial(x, j);
    if (!std::isfinite(m)) return false;
    v[j] = k_[j] * m;
    if (!std::isfinite(v[j])) return false;
  }
  return true;
}

bool MassActionSystem::rhs_into(const Vector& x, Vector& dx) const noexcept {
  Vector v;
  if (!rates_into(x, v)) return false;
  dx.noalias() = gamma_double_ * v;
  return dx.allFinite();
}

Vector MassActionSystem::rates(const Vector& x) const {
  Vector v;
  if (!rates_into(x, v)) throw EvaluationError("mass-action rate evaluation failed (domain or overflow)");
  return v;
}

Vector MassActionSystem::rhs(const Vector& x) const {
  Vector dx;
  if (!rhs_into(x, dx)) throw EvaluationError("mass-action rhs evaluation failed (domain or overflow)");
  return dx;
}

Matrix MassActionSystem::jacobian(const Vector& x) const {
  const int n = dim();
  const int r = net_.n_reactions();
  Matrix dv(r, n);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < n; ++i) {
      const double d = monomial_derivative(x, j, i);
      if (!std::isfinite(d)) throw EvaluationError("mass-action Jacobian evaluation failed");
      dv(j, i) = k_[j] * d;
    }
  return gamma_double_ * dv;
}

Vector MassActionSystem::rates_subset(const Vector& x, const std::vector<int>& reactions) const {
  Vector out(reactions.size());
  for (std::size_t i = 0; i < reactions.size(); ++i) {
    const double m = monomial(x, reactions[i]);
    if (!std::isfinite(m)) throw EvaluationError("mass-action rate evaluation failed (domain or overflow)");
    out[i] = k_[reactions[i]] * m;
  }
  return out;
}

Matrix reduced_jacobian(const MassActionSystem& sys, const Vector& x, const ReducedBasis& basis) {
  const Matrix j = sys.jacobian(x);
  return basis.columns().transpose() * j * basis.columns();
}

} // namespace crn
