#include "crn/kernels.hpp"

#include "crn/errors.hpp"

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace crn::kernels {

namespace {

double directed_sup_min(const std::vector<Vector>& a, const std::vector<Vector>& b, bool parallel) {
  double sup = 0.0;
  const auto body = [&](std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vector& q : b) best = std::min(best, (a[i] - q).norm());
    return best;
  };
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for reduction(max : sup) schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(a.size()); ++i)
      sup = std::max(sup, body(static_cast<std::size_t>(i)));
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) sup = std::max(sup, body(i));
  }
  return sup;
}

double hausdorff_impl(const std::vector<Vector>& a, const std::vector<Vector>& b, bool parallel) {
  if (a.empty() || b.empty()) throw NumericsError("hausdorff_distance: empty point set");
  return std::max(directed_sup_min(a, b, parallel), directed_sup_min(b, a, parallel));
}

double max_impl(const std::vector<Vector>& points, const std::function<double(const Vector&)>& f, bool parallel) {
  if (points.empty()) throw NumericsError("max_over_points: empty point set");
  double best = -std::numeric_limits<double>::infinity();
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for reduction(max : best) schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(points.size()); ++i)
      best = std::max(best, f(points[static_cast<std::size_t>(i)]));
  } else {
    for (const Vector& p : points) best = std::max(best, f(p));
  }
  return best;
}

void batch_impl(const MassActionSystem& sys, const std::vector<Vector>& states, Matrix& out, bool parallel) {
  out.resize(sys.dim(), static_cast<Eigen::Index>(states.size()));
  const auto body = [&](std::size_t j) {
    Vector dx;
    if (sys.rhs_into(states[j], dx))
      out.col(static_cast<Eigen::Index>(j)) = dx;
    else
      out.col(static_cast<Eigen::Index>(j)).setConstant(std::numeric_limits<double>::quiet_NaN());
  };
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long j = 0; j < static_cast<long long>(states.size()); ++j) body(static_cast<std::size_t>(j));
  } else {
    for (std::size_t j = 0; j < states.size(); ++j) body(j);
  }
}

} // namespace

double hausdorff_distance(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  return hausdorff_impl(a, b, true);
}

double hausdorff_distance_serial(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  return hausdorff_impl(a, b, false);
}

double max_over_points(const std::vector<Vector>& points, const std::function<double(const Vector&)>& f) {
  return max_impl(points, f, true);
}

double max_over_points_serial(const std::vector<Vector>& points, const std::function<double(const Vector&)>& f) {
  return max_impl(points, f, false);
}

void batch_rhs(const MassActionSystem& sys, const std::vector<Vector>& states, Matrix& out) {
  batch_impl(sys, states, out, true);
}

void batch_rhs_serial(const MassActionSystem& sys, const std::vector<Vector>& states, Matrix& out) {
  batch_impl(sys, states, out, false);
}

} // namespace crn::kernels
