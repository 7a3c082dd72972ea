#ifndef CRN_KERNELS_HPP
#define CRN_KERNELS_HPP

#include "crn/kinetics.hpp"

#include <functional>
#include <vector>

namespace crn::kernels {

/// Data-parallel inner loops, each in an OpenMP flavour and a serial
/// reference flavour. The reductions are max/min over identical value sets,
/// so both flavours return bit-identical results; the test suite asserts
/// exactly that, and bench/ compares their throughput.

/// Symmetric Hausdorff distance between two finite point clouds.
double hausdorff_distance(const std::vector<Vector>& a, const std::vector<Vector>& b);
double hausdorff_distance_serial(const std::vector<Vector>& a, const std::vector<Vector>& b);

/// max_i f(points[i]); f must be thread-safe.
double max_over_points(const std::vector<Vector>& points, const std::function<double(const Vector&)>& f);
double max_over_points_serial(const std::vector<Vector>& points, const std::function<double(const Vector&)>& f);

/// Right-hand sides for a batch of states. States that fail to evaluate
/// produce NaN columns. out is resized to dim x states.
void batch_rhs(const MassActionSystem& sys, const std::vector<Vector>& states, Matrix& out);
void batch_rhs_serial(const MassActionSystem& sys, const std::vector<Vector>& states, Matrix& out);

} // namespace crn::kernels

#endif
