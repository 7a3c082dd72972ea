#ifndef CRN_RATIONAL_HPP
#define CRN_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

namespace crn {

/// Exact rational scalar used for all structural computations (stoichiometry,
/// rank, kernels). Floating point never enters validity checks.
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Formats p/q, or just p when q == 1.
std::string rational_to_string(const Rational& q);

/// Parses "p", "p/q" or a finite decimal ("0.5") into an exact rational.
/// Returns nullopt on malformed input. Sign is accepted ("-3/2").
std::optional<Rational> parse_rational(const std::string& text);

} // namespace crn

#endif
