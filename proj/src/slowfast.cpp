#include "crn/slowfast.hpp"

#include "crn/errors.hpp"
#include "crn/kernels.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace crn {

namespace {

bool positive(const Vector& x) { return (x.array() > 0).all(); }

/// out_i = prod_j base_j ^ E(i, j); requires positive base entries wherever
/// the exponent is nonzero.
Vector vector_power(const Vector& base, const RationalMatrix& exponents) {
  Vector out(exponents.rows());
  for (int i = 0; i < exponents.rows(); ++i) {
    double p = 1.0;
    for (int j = 0; j < exponents.cols(); ++j) {
      const Rational& e = exponents(i, j);
      if (e == 0) continue;
      const double b = base[j];
      if (!(b > 0)) throw NumericsError("vector_power: non-positive base with nonzero exponent");
      p *= std::pow(b, to_double(e));
    }
    out[i] = p;
  }
  return out;
}

nlohmann::json matrix_to_json(const RationalMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(rational_to_string(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

} // namespace

void SlowFastModel::split_y(const Vector& y_full, Vector& y_hat, Vector& y_doublehat) const {
  y_hat.resize(m);
  y_doublehat.resize(k);
  for (int i = 0; i < m; ++i) y_hat[i] = y_full[hat_rows[i]];
  for (int j = 0; j < k; ++j) y_doublehat[j] = y_full[doublehat_rows[j]];
}

Vector SlowFastModel::join_y(const Vector& y_hat, const Vector& y_doublehat) const {
  Vector y(m + k);
  for (int i = 0; i < m; ++i) y[hat_rows[i]] = y_hat[i];
  for (int j = 0; j < k; ++j) y[doublehat_rows[j]] = y_doublehat[j];
  return y;
}

SlowFastModel decompose(const EnlargementRecord& record) {
  if (record.kind != EnlargeKind::Split) throw NumericsError("decompose: record is not a Split enlargement");
  const int m = record.beta.cols();
  const int total = record.beta.rows();
  if (m < 1) throw NumericsError("decompose: empty beta");

  SlowFastModel sfm;
  sfm.record = record;
  sfm.n = record.base.n_species();
  sfm.m = m;
  sfm.k = total - m;

  sfm.hat_rows = independent_row_selection(record.beta, m);
  if (sfm.hat_rows.empty()) throw NumericsError("decompose: beta has rank < m");
  std::vector<bool> used(total, false);
  for (int r : sfm.hat_rows) used[r] = true;
  for (int r = 0; r < total; ++r)
    if (!used[r]) sfm.doublehat_rows.push_back(r);

  sfm.beta_hat = record.beta.select_rows(sfm.hat_rows);
  sfm.beta_hat_inv = sfm.beta_hat.inverse();
  sfm.doublehat_beta = record.beta.select_rows(sfm.doublehat_rows);
  sfm.delta = -(sfm.doublehat_beta * sfm.beta_hat_inv).transpose();
  sfm.gamma = -(record.c_matrix * sfm.beta_hat_inv).transpose();
  sfm.v_exponent = sfm.beta_hat_inv.transpose();

  sfm.conserved_offset = Vector::Ones(sfm.k);
  sfm.alpha_bhinv = (record.alpha * sfm.beta_hat_inv).to_double();
  sfm.delta_t = sfm.delta.transpose().to_double();
  sfm.beta_hat_d = sfm.beta_hat.to_double();

  // exact check: delta^t y_hat + y_doublehat is conserved by the enlarged
  // network (the combination annihilates every stoichiometric column)
  const RationalMatrix result_gamma = stoichiometric_matrix(record.result);
  for (int j = 0; j < sfm.k; ++j) {
    std::vector<Rational> row(record.result.n_species());
    for (int i = 0; i < m; ++i) row.at(record.new_species_indices[sfm.hat_rows[i]]) = sfm.delta(i, j);
    row.at(record.new_species_indices[sfm.doublehat_rows[j]]) = 1;
    for (int col = 0; col < result_gamma.cols(); ++col) {
      Rational dot = 0;
      for (int i = 0; i < result_gamma.rows(); ++i) dot += row[i] * result_gamma(i, col);
      if (dot != 0) throw NumericsError("decompose: conserved combination fails to annihilate the result network");
    }
  }
  return sfm;
}

std::pair<Vector, Vector> phi_map(const SlowFastModel& sfm, const Vector& x, const Vector& y_full) {
  Vector y_hat, y_dh;
  sfm.split_y(y_full, y_hat, y_dh);
  if (sfm.k > 0) {
    const Vector gap = sfm.delta_t * y_hat + y_dh - sfm.conserved_offset;
    if (gap.cwiseAbs().maxCoeff() > 1e-12 * (1.0 + y_full.cwiseAbs().maxCoeff()))
      throw NumericsError("phi_map: state is off the invariant hyperplane");
  }
  return {x - sfm.alpha_bhinv * y_hat, y_hat};
}

std::pair<Vector, Vector> phi_inverse(const SlowFastModel& sfm, const Vector& z, const Vector& y_hat) {
  const Vector x = z + sfm.alpha_bhinv * y_hat;
  const Vector y_dh = sfm.conserved_offset - sfm.delta_t * y_hat;
  return {x, sfm.join_y(y_hat, y_dh)};
}

std::pair<Vector, Vector> psi_map(const Vector& z, const Vector& y_hat, double eps) {
  if (!(eps > 0)) throw NumericsError("psi_map: eps must be positive");
  return {z, y_hat / eps};
}

std::pair<Vector, Vector> psi_inverse(const Vector& z, const Vector& w, double eps) {
  if (!(eps > 0)) throw NumericsError("psi_inverse: eps must be positive");
  return {z, w * eps};
}

namespace {

Vector split_rates(const SlowFastModel& sfm, const MassActionSystem& base, const Vector& state) {
  if (static_cast<int>(sfm.record.split_reactions.size()) != sfm.m)
    throw NumericsError("slow-fast evaluation needs a record produced by split_reactions");
  return base.rates_subset(state, sfm.record.split_reactions);
}

/// v_split(x) - w^{beta_hat^t} o dh^{doublehat^t} o x^{c^t}
Vector fast_residual(const SlowFastModel& sfm, const MassActionSystem& base, const Vector& x_eval, const Vector& w,
                     const Vector& dh) {
  Vector value = split_rates(sfm, base, x_eval);
  const Vector w_pow = vector_power(w, sfm.beta_hat.transpose());
  const Vector x_pow = vector_power(x_eval, sfm.record.c_matrix.transpose());
  Vector dh_pow = Vector::Ones(sfm.m);
  if (sfm.k > 0) dh_pow = vector_power(dh, sfm.doublehat_beta.transpose());
  return value - (w_pow.array() * dh_pow.array() * x_pow.array()).matrix();
}

} // namespace

std::pair<Vector, Vector> system_rhs(const SlowFastModel& sfm, const MassActionSystem& base, SystemVariant variant,
                                     const Vector& z, const Vector& w, double eps) {
  switch (variant) {
    case SystemVariant::SlowEps:
    case SystemVariant::FastEps: {
      if (!(eps > 0)) throw NumericsError("system_rhs: eps must be positive");
      const Vector x_arg = z + eps * (sfm.alpha_bhinv * w);
      const Vector dh = sfm.conserved_offset - eps * (sfm.delta_t * w);
      if (!positive(x_arg) || !positive(w) || (sfm.k > 0 && !positive(dh)))
        throw NumericsError("system_rhs: outside the positivity domain");
      const Vector residual = sfm.beta_hat_d * fast_residual(sfm, base, x_arg, w, dh);
      if (variant == SystemVariant::SlowEps) return {base.rhs(x_arg), residual / eps};
      return {eps * base.rhs(x_arg), residual};
    }
    case SystemVariant::SlowZero:
    case SystemVariant::FastZero: {
      if (!positive(z) || !positive(w)) throw NumericsError("system_rhs: outside the positivity domain");
      const Vector residual = sfm.beta_hat_d * fast_residual(sfm, base, z, w, Vector::Ones(sfm.k));
      if (variant == SystemVariant::SlowZero) return {base.rhs(z), residual};
      return {Vector::Zero(z.size()), residual};
    }
  }
  throw NumericsError("system_rhs: unknown variant");
}

Vector critical_manifold(const SlowFastModel& sfm, const MassActionSystem& base, const Vector& z) {
  if (!positive(z)) throw NumericsError("critical_manifold: z must be positive");
  const Vector v_split = split_rates(sfm, base, z);
  const Vector big_v = vector_power(v_split, sfm.v_exponent);
  const Vector z_gamma = vector_power(z, sfm.gamma);
  return (big_v.array() * z_gamma.array()).matrix();
}

Matrix layer_jacobian(const SlowFastModel& sfm, const MassActionSystem& base, const Vector& z, const Vector& w) {
  (void)base;
  if (!positive(z) || !positive(w)) throw NumericsError("layer_jacobian: z and w must be positive");
  const Vector w_pow = vector_power(w, sfm.beta_hat.transpose());
  const Vector z_pow = vector_power(z, sfm.record.c_matrix.transpose());
  const Vector d = (w_pow.array() * z_pow.array()).matrix();
  return -sfm.beta_hat_d * d.asDiagonal() * sfm.beta_hat_d.transpose() * w.cwiseInverse().asDiagonal();
}

EpsilonBound epsilon_bound(const SlowFastModel& sfm, const MassActionSystem& base, const OrbitTube& tube,
                           double eps0_cap, std::uint64_t seed) {
  if (tube.samples.empty()) throw NumericsError("epsilon_bound: empty tube");
  if (!(eps0_cap > 0)) throw NumericsError("epsilon_bound: eps0 cap must be positive");

  EpsilonBound bound;
  bound.eps0_cap = eps0_cap;

  // distance to the orthant boundary: exact min-coordinate arithmetic on boxes
  double d_min = std::numeric_limits<double>::infinity();
  for (const Vector& s : tube.samples) d_min = std::min(d_min, s.minCoeff() - tube.radius);
  if (!(d_min > 0)) throw NumericsError("epsilon_bound: tube touches the orthant boundary");
  bound.d_boundary = d_min;

  const auto manifold_norm = [&](const Vector& z) { return critical_manifold(sfm, base, z).norm(); };
  const int n = sfm.n;

  // level 0: box centers plus corners (corners skipped in high dimension)
  std::vector<Vector> points = tube.samples;
  if (tube.radius > 0 && n <= 12) {
    for (const Vector& s : tube.samples)
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        Vector corner = s;
        for (int i = 0; i < n; ++i) corner[i] += (mask & (1u << i)) ? tube.radius : -tube.radius;
        points.push_back(corner);
      }
  }
  double sup = kernels::max_over_points(points, manifold_norm);
  bound.audit.push_back({static_cast<int>(points.size() / std::max<std::size_t>(tube.samples.size(), 1)), sup});

  if (tube.radius > 0) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    int per_box = 32;
    for (int level = 0; level < 12; ++level, per_box *= 2) {
      std::vector<Vector> batch;
      batch.reserve(tube.samples.size() * per_box);
      for (const Vector& s : tube.samples)
        for (int i = 0; i < per_box; ++i) {
          Vector p = s;
          for (int d = 0; d < n; ++d) p[d] += tube.radius * unit(rng);
          batch.push_back(p);
        }
      const double batch_sup = kernels::max_over_points(batch, manifold_norm);
      const double merged = std::max(sup, batch_sup);
      bound.audit.push_back({per_box, merged});
      const bool settled = merged - sup < 0.01 * merged;
      sup = merged;
      if (settled && level >= 1) break;
    }
  }

  // the sup over a zero-radius tube is exact; sampled sups get a 5% margin
  bound.k_sup = tube.radius > 0 ? 2.0 * sup * 1.05 : 2.0 * sup;

  bound.norm_alpha_bhinv = sfm.alpha_bhinv.jacobiSvd().singularValues().size()
                               ? sfm.alpha_bhinv.jacobiSvd().singularValues()[0]
                               : 0.0;
  bound.norm_delta_t = sfm.k > 0 ? sfm.delta_t.jacobiSvd().singularValues()[0] : 0.0;

  double eps1 = eps0_cap;
  if (bound.norm_alpha_bhinv > 0) eps1 = std::min(eps1, bound.d_boundary / (2.0 * bound.k_sup * bound.norm_alpha_bhinv));
  if (sfm.k > 0 && bound.norm_delta_t > 0) eps1 = std::min(eps1, 1.0 / (2.0 * bound.k_sup * bound.norm_delta_t));
  bound.eps1 = eps1;
  return bound;
}

Vector lifted_initial_condition(const SlowFastModel& sfm, const MassActionSystem& base, const Vector& z0, double eps) {
  if (!(eps > 0)) throw NumericsError("lifted_initial_condition: eps must be positive");
  const Vector w = critical_manifold(sfm, base, z0);
  const Vector y_hat = eps * w;
  auto [x, y_full] = phi_inverse(sfm, z0, y_hat);
  if (!positive(x) || !positive(y_full))
    throw NumericsError("lifted_initial_condition: positivity violated (eps too large for this point)");

  Vector state(sfm.record.result.n_species());
  for (int i = 0; i < sfm.n; ++i) state[sfm.record.species_map[i]] = x[i];
  for (std::size_t r = 0; r < sfm.record.new_species_indices.size(); ++r)
    state[sfm.record.new_species_indices[r]] = y_full[static_cast<Eigen::Index>(r)];
  return state;
}

Vector to_base_coordinates(const SlowFastModel& sfm, const Vector& full_state) {
  Vector x(sfm.n), y_full(sfm.m + sfm.k);
  for (int i = 0; i < sfm.n; ++i) x[i] = full_state[sfm.record.species_map[i]];
  for (std::size_t r = 0; r < sfm.record.new_species_indices.size(); ++r)
    y_full[static_cast<Eigen::Index>(r)] = full_state[sfm.record.new_species_indices[r]];
  Vector y_hat, y_dh;
  sfm.split_y(y_full, y_hat, y_dh);
  return x - sfm.alpha_bhinv * y_hat;
}

nlohmann::json slowfast_to_json(const SlowFastModel& sfm) {
  nlohmann::json j;
  j["m"] = sfm.m;
  j["k"] = sfm.k;
  j["pivot_rows"] = sfm.hat_rows;
  j["beta"] = matrix_to_json(sfm.record.beta);
  j["beta_hat"] = matrix_to_json(sfm.beta_hat);
  j["beta_hat_inv"] = matrix_to_json(sfm.beta_hat_inv);
  j["doublehat_beta"] = matrix_to_json(sfm.doublehat_beta);
  j["delta"] = matrix_to_json(sfm.delta);
  j["gamma"] = matrix_to_json(sfm.gamma);
  j["v_exponent"] = matrix_to_json(sfm.v_exponent);
  j["alpha"] = matrix_to_json(sfm.record.alpha);
  j["c"] = matrix_to_json(sfm.record.c_matrix);
  j["split_reactions"] = sfm.record.split_reactions;
  j["conserved_offset"] = std::vector<double>(sfm.conserved_offset.data(),
                                              sfm.conserved_offset.data() + sfm.conserved_offset.size());
  return j;
}

nlohmann::json epsilon_bound_to_json(const EpsilonBound& bound) {
  nlohmann::json j;
  j["k_sup"] = bound.k_sup;
  j["d_boundary"] = bound.d_boundary;
  j["norm_alpha_beta_hat_inv"] = bound.norm_alpha_bhinv;
  j["norm_delta_t"] = bound.norm_delta_t;
  j["eps0_cap"] = bound.eps0_cap;
  j["eps1"] = bound.eps1;
  j["note"] = "eps1 is conditional on the perturbation threshold eps0 >= eps0_cap";
  nlohmann::json audit = nlohmann::json::array();
  for (const auto& a : bound.audit) audit.push_back({{"samples_per_box", a.samples_per_box}, {"sup", a.sup_estimate}});
  j["audit"] = audit;
  return j;
}

} // namespace crn
