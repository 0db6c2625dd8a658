#ifndef KK_EXPRESSION_HPP
#define KK_EXPRESSION_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Arithmetic expression DSL used for scenario field definitions.
//
// Grammar (PEG, whitespace skipped between tokens):
//   expr   <- term (('+' / '-') term)*
//   term   <- unary (('*' / '/') unary)*
//   unary  <- '-' unary / power
//   power  <- atom ('^' unary)?          # right associative, binds above unary '-'
//   atom   <- number / ident ('(' expr ')')? / '(' expr ')'
//
// Variables: t x y z. Functions: sin cos exp log sqrt tanh.
// Named constants: pi, e, plus caller-supplied bindings.

namespace kk {

struct ParseError : std::runtime_error {
  size_t offset;
  std::string expected;
  ParseError(std::string msg, size_t off, std::string exp)
      : std::runtime_error(msg + " at offset " + std::to_string(off) +
                           (exp.empty() ? "" : " (expected " + exp + ")")),
        offset(off),
        expected(std::move(exp)) {}
};

class Expression {
public:
  enum class Fn { sin, cos, exp, log, sqrt, tanh };

  struct Node {
    enum class Kind { num, var, sym, neg, bin, call } kind;
    double num = 0;        // num
    int var = 0;           // var: slot 0..3 for t,x,y,z
    std::string name;      // sym
    char op = 0;           // bin: + - * / ^
    Fn fn = Fn::sin;       // call
    int a = -1, b = -1;    // child indices
  };

  using Vars = std::array<double, 4>;

  double eval(const Vars& v) const { return eval_node(root_, v); }
  double operator()(const Vars& v) const { return eval(v); }

  std::string print() const { return print_node(root_, 0); }
  bool depends_on(int slot) const { return depends_node(root_, slot); }
  bool is_constant() const {
    for (int s = 0; s < 4; ++s)
      if (depends_on(s)) return false;
    return true;
  }

  static Expression parse(const std::string& src, const std::map<std::string, double>& consts = {});

private:
  std::vector<Node> nodes_;
  int root_ = -1;

  double eval_node(int i, const Vars& v) const {
    const Node& n = nodes_[i];
    switch (n.kind) {
      case Node::Kind::num: return n.num;
      case Node::Kind::sym: return n.num;
      case Node::Kind::var: return v[n.var];
      case Node::Kind::neg: return -eval_node(n.a, v);
      case Node::Kind::bin: {
        double l = eval_node(n.a, v), r = eval_node(n.b, v);
        switch (n.op) {
          case '+': return l + r;
          case '-': return l - r;
          case '*': return l * r;
          case '/': return l / r;
          default: return std::pow(l, r);
        }
      }
      case Node::Kind::call: {
        double x = eval_node(n.a, v);
        switch (n.fn) {
          case Fn::sin: return std::sin(x);
          case Fn::cos: return std::cos(x);
          case Fn::exp: return std::exp(x);
          case Fn::log: return std::log(x);
          case Fn::sqrt: return std::sqrt(x);
          default: return std::tanh(x);
        }
      }
    }
    return 0;
  }

  static int prec_of(const Node& n) {
    switch (n.kind) {
      case Node::Kind::bin:
        if (n.op == '+' || n.op == '-') return 1;
        if (n.op == '*' || n.op == '/') return 2;
        return 4;  // ^
      case Node::Kind::neg: return 3;
      default: return 5;
    }
  }

  std::string print_node(int i, int min_prec) const {
    const Node& n = nodes_[i];
    const int p = prec_of(n);
    std::string s;
    switch (n.kind) {
      case Node::Kind::num: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", n.num);
        s = buf;
        break;
      }
      case Node::Kind::var: s = std::string(1, "txyz"[n.var]); break;
      case Node::Kind::sym: s = n.name; break;
      case Node::Kind::neg: s = "-" + print_node(n.a, 3); break;
      case Node::Kind::bin:
        if (n.op == '^')
          s = print_node(n.a, 5) + "^" + print_node(n.b, 3);
        else
          s = print_node(n.a, p) + std::string(1, n.op) + print_node(n.b, p + 1);
        break;
      case Node::Kind::call: {
        static const char* names[] = {"sin", "cos", "exp", "log", "sqrt", "tanh"};
        s = std::string(names[static_cast<int>(n.fn)]) + "(" + print_node(n.a, 0) + ")";
        return s;  // calls never need outer parens
      }
    }
    if (p < min_prec) return "(" + s + ")";
    return s;
  }

  bool depends_node(int i, int slot) const {
    const Node& n = nodes_[i];
    switch (n.kind) {
      case Node::Kind::var: return n.var == slot;
      case Node::Kind::neg: return depends_node(n.a, slot);
      case Node::Kind::bin: return depends_node(n.a, slot) || depends_node(n.b, slot);
      case Node::Kind::call: return depends_node(n.a, slot);
      default: return false;
    }
  }

  friend class ExprParser;
};

class ExprParser {
public:
  ExprParser(const std::string& src, const std::map<std::string, double>& consts)
      : src_(src), consts_(consts) {}

  Expression run() {
    if (src_.find_first_not_of(" \t\r\n") == std::string::npos)
      throw ParseError("empty expression", 0, "expression");
    Expression e;
    out_ = &e;
    e.root_ = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) throw ParseError("trailing input", pos_, "end of input");
    return e;
  }

private:
  const std::string& src_;
  const std::map<std::string, double>& consts_;
  size_t pos_ = 0;
  Expression* out_ = nullptr;

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\r' ||
                                  src_[pos_] == '\n'))
      ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < src_.size() && src_[pos_] == c;
  }
  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  int add(Expression::Node n) {
    out_->nodes_.push_back(std::move(n));
    return static_cast<int>(out_->nodes_.size()) - 1;
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      skip_ws();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
        char op = src_[pos_++];
        int rhs = parse_term();
        Expression::Node n;
        n.kind = Expression::Node::Kind::bin;
        n.op = op;
        n.a = lhs;
        n.b = rhs;
        lhs = add(n);
      } else
        return lhs;
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      skip_ws();
      if (pos_ < src_.size() && (src_[pos_] == '*' || src_[pos_] == '/')) {
        char op = src_[pos_++];
        int rhs = parse_unary();
        Expression::Node n;
        n.kind = Expression::Node::Kind::bin;
        n.op = op;
        n.a = lhs;
        n.b = rhs;
        lhs = add(n);
      } else
        return lhs;
    }
  }

  int parse_unary() {
    if (accept('-')) {
      int a = parse_unary();
      Expression::Node n;
      n.kind = Expression::Node::Kind::neg;
      n.a = a;
      return add(n);
    }
    return parse_power();
  }

  int parse_power() {
    int base = parse_atom();
    if (accept('^')) {
      int expo = parse_unary();  // right associative
      Expression::Node n;
      n.kind = Expression::Node::Kind::bin;
      n.op = '^';
      n.a = base;
      n.b = expo;
      return add(n);
    }
    return base;
  }

  int parse_atom() {
    skip_ws();
    if (pos_ >= src_.size())
      throw ParseError("unexpected end of input", pos_, "number, identifier or '('");
    char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      int e = parse_expr();
      if (!accept(')')) throw ParseError("unbalanced parenthesis", pos_, "')'");
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') return parse_ident();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_,
                     "number, identifier or '('");
  }

  int parse_number() {
    size_t start = pos_;
    while (pos_ < src_.size() && ((src_[pos_] >= '0' && src_[pos_] <= '9') || src_[pos_] == '.'))
      ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      size_t mark = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') {
        while (pos_ < src_.size() && src_[pos_] >= '0' && src_[pos_] <= '9') ++pos_;
      } else
        pos_ = mark;  // 'e' was an identifier boundary, not an exponent
    }
    try {
      size_t used = 0;
      double v = std::stod(src_.substr(start, pos_ - start), &used);
      if (used != pos_ - start) throw std::invalid_argument("partial");
      Expression::Node n;
      n.kind = Expression::Node::Kind::num;
      n.num = v;
      return add(n);
    } catch (const std::exception&) {
      throw ParseError("malformed number", start, "numeric literal");
    }
  }

  int parse_ident() {
    size_t start = pos_;
    while (pos_ < src_.size() &&
           ((src_[pos_] >= 'a' && src_[pos_] <= 'z') || (src_[pos_] >= 'A' && src_[pos_] <= 'Z') ||
            (src_[pos_] >= '0' && src_[pos_] <= '9') || src_[pos_] == '_'))
      ++pos_;
    std::string id = src_.substr(start, pos_ - start);

    static const std::map<std::string, Expression::Fn> fns = {
        {"sin", Expression::Fn::sin},   {"cos", Expression::Fn::cos},
        {"exp", Expression::Fn::exp},   {"log", Expression::Fn::log},
        {"sqrt", Expression::Fn::sqrt}, {"tanh", Expression::Fn::tanh}};
    if (auto it = fns.find(id); it != fns.end()) {
      if (!accept('(')) throw ParseError("function '" + id + "' needs an argument", pos_, "'('");
      int a = parse_expr();
      if (!accept(')')) throw ParseError("unbalanced parenthesis", pos_, "')'");
      Expression::Node n;
      n.kind = Expression::Node::Kind::call;
      n.fn = it->second;
      n.a = a;
      return add(n);
    }

    if (id.size() == 1) {
      const std::string vars = "txyz";
      size_t slot = vars.find(id[0]);
      if (slot != std::string::npos) {
        Expression::Node n;
        n.kind = Expression::Node::Kind::var;
        n.var = static_cast<int>(slot);
        return add(n);
      }
    }

    double value;
    if (id == "pi")
      value = 3.14159265358979323846;
    else if (id == "e")
      value = 2.71828182845904523536;
    else if (auto it = consts_.find(id); it != consts_.end())
      value = it->second;
    else
      throw ParseError("unknown identifier '" + id + "'", start,
                       "variable t/x/y/z, function, or bound constant");
    Expression::Node n;
    n.kind = Expression::Node::Kind::sym;
    n.name = id;
    n.num = value;
    return add(n);
  }
};

inline Expression Expression::parse(const std::string& src,
                                    const std::map<std::string, double>& consts) {
  return ExprParser(src, consts).run();
}

}  // namespace kk

#endif
