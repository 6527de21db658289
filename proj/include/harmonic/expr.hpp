#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "harmonic/harmonic_map.hpp"

namespace harmonic {

/// Parse failure with a 1-based column (counted in code points).
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::size_t column, const std::string& what)
      : Error(kind, "column " + std::to_string(column) + ": " + what), column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

struct ParseOptions {
  std::size_t trunc = 32;
};

namespace expr_detail {

enum class Tok { Number, Imag, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, LBracket, RBracket, Comma, Semi, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  std::size_t column = 1;
};

inline std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.column = column();
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < src_.size() &&
                                                          std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        out.push_back(number(t));
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
        t.kind = Tok::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
        out.push_back(t);
      } else {
        t.text = std::string(1, c);
        switch (c) {
          case '+': t.kind = Tok::Plus; break;
          case '-': t.kind = Tok::Minus; break;
          case '*': t.kind = Tok::Star; break;
          case '/': t.kind = Tok::Slash; break;
          case '^': t.kind = Tok::Caret; break;
          case '(': t.kind = Tok::LParen; break;
          case ')': t.kind = Tok::RParen; break;
          case '[': t.kind = Tok::LBracket; break;
          case ']': t.kind = Tok::RBracket; break;
          case ',': t.kind = Tok::Comma; break;
          case ';': t.kind = Tok::Semi; break;
          default: {
            // report the whole UTF-8 sequence
            std::size_t len = 1;
            while (pos_ + len < src_.size() && (static_cast<unsigned char>(src_[pos_ + len]) & 0xC0) == 0x80) ++len;
            throw ParseError(ErrorKind::SyntaxError, t.column,
                             "unexpected character '" + std::string(src_.substr(pos_, len)) + "'");
          }
        }
        ++pos_;
        out.push_back(t);
      }
    }
  }

 private:
  std::size_t column() const {
    std::size_t col = 1;
    for (std::size_t i = 0; i < pos_; ++i)
      if ((static_cast<unsigned char>(src_[i]) & 0xC0) != 0x80) ++col;
    return col;
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  Token number(Token t) {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        digits();
      else
        pos_ = save;
    }
    t.text = std::string(src_.substr(start, pos_ - start));
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    if (*first == '.') {
      // from_chars needs a leading digit
      std::string tmp = "0" + t.text;
      std::from_chars(tmp.data(), tmp.data() + tmp.size(), t.number);
    } else {
      const auto res = std::from_chars(first, last, t.number);
      if (res.ec != std::errc()) throw ParseError(ErrorKind::SyntaxError, t.column, "malformed number");
    }
    t.kind = Tok::Number;
    if (pos_ < src_.size() && src_[pos_] == 'i' &&
        !(pos_ + 1 < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_ + 1])) || src_[pos_ + 1] == '_'))) {
      ++pos_;
      t.kind = Tok::Imag;
      t.text += 'i';
    }
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

// Intermediate value: a polynomial (truncated series) or a Moebius transform.
struct Value {
  std::optional<TaylorSeries> poly;
  std::optional<MoebiusTransform> moeb;
  bool has_z = false;

  bool is_constant() const { return poly && !has_z; }
  cplx constant() const { return (*poly)[0]; }
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::size_t trunc) : toks_(std::move(toks)), n_(trunc) {}

  HarmonicMap harmonic() {
    Value h = zero(), g = zero();
    bool first = true;
    while (true) {
      bool negate = false;
      std::size_t sign_col = peek().column;
      if (!first || peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
        if (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
          negate = next().kind == Tok::Minus;
        } else if (!first) {
          break;
        }
      }
      if (peek().kind == Tok::Ident && peek().text == "conj") {
        const std::size_t col = next().column;
        expect(Tok::LParen, "'(' after conj");
        Value inner = expr();
        expect(Tok::RParen, "')'");
        if (peek().kind == Tok::Star || peek().kind == Tok::Slash || peek().kind == Tok::Caret)
          throw ParseError(ErrorKind::NestedConj, col, "conj(...) must be a top-level summand");
        g = add(g, negate ? neg(inner, sign_col) : inner, col);
      } else {
        // the sign was already consumed; reapply it to the term
        Value t = term();
        h = add(h, negate ? neg(t, sign_col) : t, sign_col);
      }
      first = false;
      if (peek().kind != Tok::Plus && peek().kind != Tok::Minus) break;
    }
    if (peek().kind != Tok::End)
      throw ParseError(ErrorKind::SyntaxError, peek().column, "expected '+', '-' or end of input, found " + describe(peek()));
    return {finish(h), finish(g)};
  }

  Value constant_expr() {
    const std::size_t col = peek().column;
    Value v = expr();
    if (peek().kind != Tok::End)
      throw ParseError(ErrorKind::SyntaxError, peek().column, "expected end of input, found " + describe(peek()));
    if (!v.is_constant()) throw ParseError(ErrorKind::SyntaxError, col, "expected a constant");
    return v;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k)
      throw ParseError(ErrorKind::SyntaxError, peek().column, std::string("expected ") + what + ", found " + describe(peek()));
    return next();
  }

  Value zero() const { return Value{TaylorSeries(n_), std::nullopt, false}; }
  Value constant(cplx c) const { return Value{TaylorSeries::constant(c, n_), std::nullopt, false}; }

  AnalyticFn finish(const Value& v) const {
    if (v.moeb) return *v.moeb;
    return *v.poly;
  }

  [[noreturn]] static void mix_error(std::size_t col) {
    throw ParseError(ErrorKind::SyntaxError, col, "a mobius[...] term can only be combined with constants");
  }

  Value neg(const Value& v, std::size_t) const {
    if (v.moeb) {
      const auto& m = *v.moeb;
      return Value{std::nullopt, MoebiusTransform(-m.a(), -m.b(), m.c(), m.d()), true};
    }
    return Value{cplx(-1.0) * *v.poly, std::nullopt, v.has_z};
  }

  Value add(const Value& x, const Value& y, std::size_t col) const {
    if (x.poly && y.poly) return Value{*x.poly + *y.poly, std::nullopt, x.has_z || y.has_z};
    // x + 0 keeps a Moebius term intact (used when summing parts)
    if (x.moeb && y.poly && y.poly->is_zero() && !y.has_z) return x;
    if (y.moeb && x.poly && x.poly->is_zero() && !x.has_z) return y;
    const Value& m = x.moeb ? x : y;
    const Value& k = x.moeb ? y : x;
    if (!k.is_constant()) mix_error(col);
    const auto& t = *m.moeb;
    const cplx c = k.constant();
    return Value{std::nullopt, MoebiusTransform(t.a() + c * t.c(), t.b() + c * t.d(), t.c(), t.d()), true};
  }

  Value mul(const Value& x, const Value& y, std::size_t col) const {
    if (x.poly && y.poly) return Value{*x.poly * *y.poly, std::nullopt, x.has_z || y.has_z};
    const Value& m = x.moeb ? x : y;
    const Value& k = x.moeb ? y : x;
    if (!k.is_constant()) mix_error(col);
    const auto& t = *m.moeb;
    const cplx c = k.constant();
    return Value{std::nullopt, MoebiusTransform(c * t.a(), c * t.b(), t.c(), t.d()), true};
  }

  Value div(const Value& x, const Value& y, std::size_t col) const {
    if (y.moeb) {
      if (!x.is_constant()) mix_error(col);
      const auto& t = *y.moeb;
      const cplx c = x.constant();
      return Value{std::nullopt, MoebiusTransform(c * t.c(), c * t.d(), t.a(), t.b()), true};
    }
    if (y.has_z) throw ParseError(ErrorKind::NonlinearDivision, col, "division by an expression in z");
    const cplx c = y.constant();
    if (c == cplx{}) throw ParseError(ErrorKind::SyntaxError, col, "division by zero");
    if (x.moeb) {
      const auto& t = *x.moeb;
      return Value{std::nullopt, MoebiusTransform(t.a(), t.b(), c * t.c(), c * t.d()), true};
    }
    return Value{(1.0 / c) * *x.poly, std::nullopt, x.has_z};
  }

  Value expr() {
    Value v = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const Token& op = next();
      const bool minus = op.kind == Tok::Minus;
      const std::size_t col = op.column;
      Value r = term();
      v = add(v, minus ? neg(r, col) : r, col);
    }
    return v;
  }

  Value term() {
    Value v = unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const Token& op = next();
      const bool is_div = op.kind == Tok::Slash;
      const std::size_t col = op.column;
      Value r = unary();
      v = is_div ? div(v, r, col) : mul(v, r, col);
    }
    return v;
  }

  Value unary() {
    if (peek().kind == Tok::Minus) {
      const std::size_t col = next().column;
      return neg(unary(), col);
    }
    if (peek().kind == Tok::Plus) {
      next();
      return unary();
    }
    return power();
  }

  Value power() {
    Value b = base();
    if (peek().kind == Tok::Caret) {
      const std::size_t col = next().column;
      const Token& e = peek();
      if (e.kind != Tok::Number || e.text.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError(ErrorKind::SyntaxError, e.column, "expected an unsigned integer exponent, found " + describe(e));
      unsigned long k = 0;
      const auto [end, ec] = std::from_chars(e.text.data(), e.text.data() + e.text.size(), k);
      if (ec != std::errc{} || end != e.text.data() + e.text.size()) k = ~0ul;
      next();
      if (b.moeb) {
        if (k != 1) throw ParseError(ErrorKind::SyntaxError, col, "powers of mobius[...] are not supported");
        return b;
      }
      if (k > 4096) throw ParseError(ErrorKind::SyntaxError, e.column, "exponent too large");
      return Value{series_pow(*b.poly, static_cast<unsigned>(k)), std::nullopt, b.has_z && k > 0};
    }
    return b;
  }

  Value base() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: next(); return constant(t.number);
      case Tok::Imag: next(); return constant(cplx(0.0, t.number));
      case Tok::LParen: {
        next();
        Value v = expr();
        expect(Tok::RParen, "')'");
        return v;
      }
      case Tok::Ident: {
        if (t.text == "z") {
          next();
          return Value{TaylorSeries::identity(n_), std::nullopt, true};
        }
        if (t.text == "i") {
          next();
          return constant(cplx(0.0, 1.0));
        }
        if (t.text == "conj")
          throw ParseError(ErrorKind::NestedConj, t.column, "conj(...) must be a top-level summand");
        if (t.text == "mobius") return mobius();
        throw ParseError(ErrorKind::SyntaxError, t.column, "unknown identifier " + describe(t));
      }
      default:
        throw ParseError(ErrorKind::SyntaxError, t.column,
                         "expected a number, 'z', '(', 'conj' or 'mobius', found " + describe(t));
    }
  }

  Value mobius() {
    const std::size_t col = next().column;
    expect(Tok::LBracket, "'[' after mobius");
    cplx e[4];
    const Tok seps[4] = {Tok::Comma, Tok::Semi, Tok::Comma, Tok::RBracket};
    const char* names[4] = {"','", "';'", "','", "']'"};
    for (int k = 0; k < 4; ++k) {
      const std::size_t ecol = peek().column;
      Value v = expr();
      if (!v.is_constant()) throw ParseError(ErrorKind::SyntaxError, ecol, "mobius entries must be constants");
      e[k] = v.constant();
      expect(seps[k], names[k]);
    }
    try {
      return Value{std::nullopt, MoebiusTransform(e[0], e[1], e[2], e[3]), true};
    } catch (const Error& err) {
      throw ParseError(ErrorKind::SyntaxError, col, err.what());
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t n_;
};

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string fmt_complex(cplx c) {
  std::string s = "(" + fmt_double(c.real());
  const double im = c.imag();
  s += (std::signbit(im) ? "-" : "+") + fmt_double(std::abs(im)) + "i)";
  return s;
}

}  // namespace expr_detail

/// Parse `text` into a harmonic map. Top-level conj(E) summands form the
/// co-analytic part g = E; everything else forms h. Polynomial parts are
/// truncated at opt.trunc.
inline HarmonicMap parse_harmonic(std::string_view text, const ParseOptions& opt = {}) {
  expr_detail::Lexer lex(text);
  expr_detail::Parser p(lex.run(), opt.trunc);
  return p.harmonic();
}

/// Parse a constant complex expression such as "0.5", "2i" or "(1-0.5i)".
inline cplx parse_complex(std::string_view text) {
  expr_detail::Lexer lex(text);
  expr_detail::Parser p(lex.run(), 0);
  return p.constant_expr().constant();
}

/// Text form that parses back to the same map (17 significant digits).
inline std::string print_analytic(const AnalyticFn& f) {
  using expr_detail::fmt_complex;
  if (const auto* m = std::get_if<MoebiusTransform>(&f))
    return "mobius[" + fmt_complex(m->a()) + "," + fmt_complex(m->b()) + ";" + fmt_complex(m->c()) + "," +
           fmt_complex(m->d()) + "]";
  const auto& s = std::get<TaylorSeries>(f);
  std::string out;
  for (std::size_t n = 0; n <= s.order(); ++n) {
    if (s[n] == cplx{}) continue;
    if (!out.empty()) out += " + ";
    out += fmt_complex(s[n]);
    if (n >= 1) out += "*z^" + std::to_string(n);
  }
  return out.empty() ? "0" : out;
}

inline std::string print_harmonic(const HarmonicMap& f) {
  return print_analytic(f.h) + " + conj(" + print_analytic(f.g) + ")";
}

}  // namespace harmonic
