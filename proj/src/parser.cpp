#include "crn/parser.hpp"

#include "crn/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

namespace crn {

double RateSpec::resolve(double eps) const {
  if (!is_eps) return value;
  if (eps <= 0) throw std::invalid_argument("RateSpec: eps must be positive");
  return std::pow(eps, eps_power);
}

std::string RateSpec::to_string() const {
  if (is_eps) return "eps^" + std::to_string(eps_power);
  std::ostringstream os;
  os << value;
  return os.str();
}

RateSpec parse_rate_value(const std::string& text) {
  if (text.rfind("eps^", 0) == 0) {
    const std::string p = text.substr(4);
    std::size_t used = 0;
    int power = 0;
    try {
      power = std::stoi(p, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad eps power in rate value '" + text + "'");
    }
    if (used != p.size()) throw std::invalid_argument("bad eps power in rate value '" + text + "'");
    return RateSpec::eps_pow(power);
  }
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !std::isfinite(v) || v <= 0)
    throw std::invalid_argument("rate value '" + text + "' is not a positive number");
  return RateSpec::literal(v);
}

namespace {

enum class TokKind { Number, Name, Plus, Arrow, RevArrow, At, Equals, Caret, Comma, Minus, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  Rational number;
  int col = 0;
};

// NAME = (alpha | '_') (alnum | '_' | '\'' | '-')* where '-' is consumed only
// when not immediately followed by '>', so "X-p->Y" splits as X-p, ->, Y.
class LineLexer {
 public:
  LineLexer(const std::string& line, int line_no) : line_(line), line_no_(line_no) {}

  std::vector<Token> tokens() {
    std::vector<Token> out;
    while (true) {
      skip_ws();
      if (pos_ >= line_.size() || line_[pos_] == '#') break;
      out.push_back(next());
    }
    out.push_back({TokKind::End, "", 0, static_cast<int>(pos_) + 1});
    return out;
  }

 private:
  void skip_ws() {
    while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const { throw ParseError(line_no_, static_cast<int>(at) + 1, msg); }

  Token next() {
    const std::size_t start = pos_;
    const char c = line_[pos_];
    auto single = [&](TokKind k) {
      ++pos_;
      return Token{k, std::string(1, c), 0, static_cast<int>(start) + 1};
    };
    if (c == '+') return single(TokKind::Plus);
    if (c == '@') return single(TokKind::At);
    if (c == '=') return single(TokKind::Equals);
    if (c == '^') return single(TokKind::Caret);
    if (c == ',') return single(TokKind::Comma);
    if (c == '<') {
      if (line_.compare(pos_, 3, "<->") == 0) {
        pos_ += 3;
        return {TokKind::RevArrow, "<->", 0, static_cast<int>(start) + 1};
      }
      fail("unexpected '<'", start);
    }
    if (c == '-') {
      if (pos_ + 1 < line_.size() && line_[pos_ + 1] == '>') {
        pos_ += 2;
        return {TokKind::Arrow, "->", 0, static_cast<int>(start) + 1};
      }
      ++pos_;
      return {TokKind::Minus, "-", 0, static_cast<int>(start) + 1};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < line_.size() &&
             (std::isdigit(static_cast<unsigned char>(line_[end])) || line_[end] == '.' || line_[end] == '/'))
        ++end;
      const std::string raw = line_.substr(pos_, end - pos_);
      auto q = parse_rational(raw);
      if (!q) fail("malformed number '" + raw + "'", start);
      pos_ = end;
      return {TokKind::Number, raw, *q, static_cast<int>(start) + 1};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_ + 1;
      while (end < line_.size()) {
        const char d = line_[end];
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '\'') {
          ++end;
        } else if (d == '-' && !(end + 1 < line_.size() && line_[end + 1] == '>')) {
          ++end;
        } else {
          break;
        }
      }
      std::string name = line_.substr(pos_, end - pos_);
      pos_ = end;
      return {TokKind::Name, name, 0, static_cast<int>(start) + 1};
    }
    fail(std::string("unexpected character '") + c + "'", start);
  }

  const std::string& line_;
  int line_no_;
  std::size_t pos_ = 0;
};

class LineParser {
 public:
  LineParser(std::vector<Token> toks, int line_no) : toks_(std::move(toks)), line_no_(line_no) {}

  const Token& peek() const { return toks_[idx_]; }
  Token take() { return toks_[idx_++]; }
  bool at(TokKind k) const { return peek().kind == k; }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_no_, peek().col, msg); }

  Complex complex(Network& net, bool allow_new) {
    Complex cx;
    if (at(TokKind::Minus)) fail("negative coefficient");
    if (at(TokKind::Number) && peek().number == 0 && toks_[idx_ + 1].kind != TokKind::Name) {
      take();
      return cx;  // the empty complex, written "0"
    }
    while (true) {
      Rational coeff = 1;
      if (at(TokKind::Minus)) fail("negative coefficient");
      if (at(TokKind::Number)) {
        coeff = take().number;
      }
      if (!at(TokKind::Name)) fail("expected species name");
      const Token name = take();
      int idx = net.species_index(name.text);
      if (idx < 0) {
        if (!allow_new) throw ParseError(line_no_, name.col, "unknown species '" + name.text + "'");
        idx = net.add_species(name.text);
      }
      cx.add(idx, coeff);
      if (!at(TokKind::Plus)) break;
      take();
    }
    return cx;
  }

  int line_no() const { return line_no_; }

 private:
  std::vector<Token> toks_;
  std::size_t idx_ = 0;
  int line_no_;
};

struct LineMeta {
  std::string label;
  std::vector<RateSpec> rates;
};

LineMeta parse_meta(LineParser& p) {
  LineMeta meta;
  while (!p.at(TokKind::End)) {
    if (!p.at(TokKind::Name)) p.fail("expected label or k=VALUE after '@'");
    Token head = p.take();
    if (head.text == "k" && p.at(TokKind::Equals)) {
      p.take();
      while (true) {
        std::string value;
        if (p.at(TokKind::Name) && p.peek().text == "eps") {
          p.take();
          if (!p.at(TokKind::Caret)) p.fail("expected '^' after eps");
          p.take();
          std::string sign;
          if (p.at(TokKind::Minus)) {
            p.take();
            sign = "-";
          }
          if (!p.at(TokKind::Number)) p.fail("expected integer eps power");
          value = "eps^" + sign + p.take().text;
        } else if (p.at(TokKind::Number)) {
          value = p.take().text;
          // allow exponent-style suffix tokens like 1.5e-3 lexed as number+name
          if (p.at(TokKind::Name) && (p.peek().text == "e" || p.peek().text[0] == 'e')) {
            value += p.take().text;
            if (p.at(TokKind::Minus)) {
              value += p.take().text;
              if (!p.at(TokKind::Number)) p.fail("malformed rate value");
              value += p.take().text;
            }
          }
        } else {
          p.fail("expected rate value");
        }
        try {
          meta.rates.push_back(parse_rate_value(value));
        } catch (const std::invalid_argument& e) {
          p.fail(e.what());
        }
        if (p.at(TokKind::Comma))
          p.take();
        else
          break;
      }
    } else {
      if (!meta.label.empty()) p.fail("duplicate label on one line");
      meta.label = head.text;
    }
  }
  return meta;
}

} // namespace

Complex parse_complex(const std::string& text, Network& net, bool allow_new) {
  LineLexer lex(text, 1);
  LineParser p(lex.tokens(), 1);
  Complex cx = p.complex(net, allow_new);
  if (!p.at(TokKind::End)) p.fail("trailing input after complex");
  return cx;
}

ParsedNetwork parse_network(const std::string& text) {
  ParsedNetwork out;
  std::set<std::string> labels;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  bool saw_rule = false;

  auto push_reaction = [&](Reaction r, std::optional<RateSpec> rate, int at_line) {
    if (!r.label.empty()) {
      if (labels.count(r.label)) throw ParseError(at_line, 1, "duplicate reaction label '" + r.label + "'");
      labels.insert(r.label);
    }
    out.net.reactions.push_back(std::move(r));
    out.rates.push_back(std::move(rate));
  };

  while (std::getline(stream, line)) {
    ++line_no;

    // species order directive: `species: A B C`, before any reaction line
    const std::size_t first_nonws = line.find_first_not_of(" \t\r");
    if (first_nonws != std::string::npos && line.compare(first_nonws, 8, "species:") == 0) {
      if (saw_rule || !out.net.species.empty())
        throw ParseError(line_no, 1, "species directive must come first");
      std::istringstream rest(line.substr(first_nonws + 8));
      std::string name;
      while (rest >> name) {
        if (!name.empty() && name[0] == '#') break;
        out.net.add_species(name);
      }
      continue;
    }

    LineLexer lex(line, line_no);
    std::vector<Token> toks = lex.tokens();
    if (toks.front().kind == TokKind::End) continue;

    LineParser p(std::move(toks), line_no);
    saw_rule = true;
    Complex reactant = p.complex(out.net, true);
    bool reversible = false;
    if (p.at(TokKind::Arrow)) {
      p.take();
    } else if (p.at(TokKind::RevArrow)) {
      reversible = true;
      p.take();
    } else {
      p.fail("expected '->' or '<->'");
    }
    Complex product = p.complex(out.net, true);
    LineMeta meta;
    if (p.at(TokKind::At)) {
      p.take();
      meta = parse_meta(p);
    }
    if (!p.at(TokKind::End)) p.fail("trailing input after reaction");
    if (!meta.rates.empty() && static_cast<int>(meta.rates.size()) != (reversible ? 2 : 1))
      p.fail(reversible ? "reversible line needs k=forward,reverse" : "irreversible line takes one k value");

    std::optional<RateSpec> fwd_rate, rev_rate;
    if (!meta.rates.empty()) {
      fwd_rate = meta.rates[0];
      if (reversible) rev_rate = meta.rates[1];
    }
    push_reaction({reactant, product, meta.label}, fwd_rate, line_no);
    if (reversible) {
      std::string rev_label = meta.label.empty() ? std::string() : meta.label + "_rev";
      push_reaction({product, reactant, rev_label}, rev_rate, line_no);
    }
  }
  return out;
}

std::string format_complex(const Network& net, const Complex& cx) {
  if (cx.empty()) return "0";
  std::string s;
  for (const auto& [idx, coeff] : cx.terms()) {
    if (!s.empty()) s += " + ";
    if (coeff != 1) {
      s += rational_to_string(coeff);
      s += " ";
    }
    s += net.species.at(idx);
  }
  return s;
}

std::string serialize_network(const Network& net, const std::vector<std::optional<RateSpec>>* rates) {
  std::ostringstream os;

  // Determine whether first-mention order reproduces the species order.
  std::vector<bool> seen(net.species.size(), false);
  std::vector<int> mention_order;
  for (const Reaction& r : net.reactions)
    for (const Complex* cx : {&r.reactant, &r.product})
      for (const auto& [idx, coeff] : cx->terms())
        if (!seen[idx]) {
          seen[idx] = true;
          mention_order.push_back(idx);
        }
  bool natural = mention_order.size() == net.species.size();
  for (std::size_t i = 0; natural && i < mention_order.size(); ++i) natural = mention_order[i] == static_cast<int>(i);
  if (!natural) {
    os << "species:";
    for (const auto& s : net.species) os << " " << s;
    os << "\n";
  }

  for (int j = 0; j < net.n_reactions(); ++j) {
    const Reaction& r = net.reactions[j];
    os << format_complex(net, r.reactant) << " -> " << format_complex(net, r.product);
    const bool has_rate = rates && (*rates)[j].has_value();
    if (!r.label.empty() || has_rate) {
      os << " @";
      if (!r.label.empty()) os << " " << r.label;
      if (has_rate) os << " k=" << (*rates)[j]->to_string();
    }
    os << "\n";
  }
  return os.str();
}

std::map<std::string, RateSpec> parse_rate_file(const std::string& text) {
  std::map<std::string, RateSpec> out;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string label, eq, value;
    if (!(ls >> label)) continue;
    if (!(ls >> eq) || eq != "=" || !(ls >> value)) throw ParseError(line_no, 1, "expected `label = value`");
    std::string extra;
    if (ls >> extra) throw ParseError(line_no, 1, "trailing input after rate value");
    try {
      out[label] = parse_rate_value(value);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, 1, e.what());
    }
  }
  return out;
}

} // namespace crn
