#include "btq/parser.hpp"

#include <cctype>
#include <charconv>

namespace btq {

namespace {

class Parser {
 public:
  Parser(const std::string& text, ModelKind kind) : text_(text), kind_(kind) {}

  Observable parse() {
    Observable f = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(pos_, message); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Observable expr() {
    Observable acc = term();
    for (;;) {
      if (eat('+'))
        acc += term();
      else if (eat('-'))
        acc -= term();
      else
        return acc;
    }
  }

  Observable term() {
    Observable acc = factor();
    while (eat('*')) acc *= factor();
    return acc;
  }

  Observable factor() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Observable inner = expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    if (c == '-') {
      ++pos_;
      return -factor();
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return atom();
    fail("unexpected character");
  }

  Observable number() {
    double value = 0.0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return Observable::constant(kind_, Complex(value, 0));
  }

  Observable atom() {
    const std::size_t start = pos_;
    std::string name;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])))) {
      name.push_back(text_[pos_]);
      ++pos_;
    }
    if (name == "x1" || name == "x2" || name == "x3") {
      if (kind_ != ModelKind::Sphere) {
        pos_ = start;
        fail("atom '" + name + "' requires the sphere model");
      }
      if (name == "x1") return Observable::x1();
      if (name == "x2") return Observable::x2();
      return Observable::x3();
    }
    if (name == "c" || name == "s") {
      if (kind_ != ModelKind::Torus) {
        pos_ = start;
        fail("atom '" + name + "(a,b)' requires the torus model");
      }
      if (!eat('(')) fail("expected '(' after '" + name + "'");
      const int a = integer();
      if (!eat(',')) fail("expected ',' in '" + name + "(a,b)'");
      const int b = integer();
      if (!eat(')')) fail("expected ')' in '" + name + "(a,b)'");
      return name == "c" ? Observable::fourier_cos(a, b) : Observable::fourier_sin(a, b);
    }
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  int integer() {
    skip_ws();
    bool negative = false;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      negative = text_[pos_] == '-';
      ++pos_;
    }
    int value = 0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) fail("expected integer");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return negative ? -value : value;
  }

  const std::string& text_;
  ModelKind kind_;
  std::size_t pos_ = 0;
};

}  // namespace

Observable parse_observable(const std::string& text, ModelKind kind) {
  return Parser(text, kind).parse();
}

}  // namespace btq
