#ifndef CRN_PARSER_HPP
#define CRN_PARSER_HPP

#include "crn/network.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace crn {

/// A rate-constant value: either a positive decimal literal, or eps^power
/// resolved once a concrete epsilon is bound.
struct RateSpec {
  double value = 1.0;
  int eps_power = 0;
  bool is_eps = false;

  static RateSpec literal(double v) { return {v, 0, false}; }
  static RateSpec eps_pow(int p) { return {1.0, p, true}; }

  double resolve(double eps) const;
  std::string to_string() const;
};

/// Parses "0.5" or "eps^-2"; throws std::invalid_argument on malformed or
/// non-positive values.
RateSpec parse_rate_value(const std::string& text);

struct ParsedNetwork {
  Network net;
  /// Per-reaction rate annotation from `@ ... k=VALUE`, if present.
  std::vector<std::optional<RateSpec>> rates;
};

/// Line-oriented network-file parser.
///
/// Grammar per line (after '#' comments are stripped):
///   complex ARROW complex [@ [label] [k=VALUE[,VALUE]]]
/// where complex is `0` or `coeff? NAME (+ coeff? NAME)*`, coeff a nonnegative
/// decimal or fraction p/q, and ARROW is `->` or `<->`. A `<->` line expands
/// to the forward reaction followed by the reverse (labels L and L_rev, rates
/// k=forward,reverse). An optional first directive `species: A B ...` pins the
/// species order; otherwise species appear in first-mention order.
ParsedNetwork parse_network(const std::string& text);

/// Parses a standalone complex string (e.g. "Z + 2 U") against an existing
/// species list; unknown species are an error unless allow_new is set, in
/// which case they are appended to `net`.
Complex parse_complex(const std::string& text, Network& net, bool allow_new = false);

/// Canonical text for one complex ("0", "X + 2 Y", "1/2 X").
std::string format_complex(const Network& net, const Complex& cx);

/// Canonical serialization; inverse of parse_network up to label handling.
/// Emits a `species:` directive only when first-mention order would not
/// reproduce the stored species order.
std::string serialize_network(const Network& net, const std::vector<std::optional<RateSpec>>* rates = nullptr);

/// Key-value rate file: lines `label = value`, '#' comments.
std::map<std::string, RateSpec> parse_rate_file(const std::string& text);

} // namespace crn

#endif
