#include "conjscope/expr.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <utility>

#include "conjscope/errors.hpp"

namespace conjscope {

namespace {

NodePtr make_node(Op op, std::vector<NodePtr> args = {}) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

NodePtr make_var(std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->name = std::move(name);
  return n;
}

NodePtr make_pow(NodePtr base, int exponent) {
  auto n = std::make_shared<Node>();
  n->op = Op::Pow;
  n->exponent = exponent;
  n->args = {std::move(base)};
  return n;
}

struct FunctionName {
  std::string_view name;
  Op op;
};

constexpr std::array<FunctionName, 7> kUnaryFunctions{{
    {"sin", Op::Sin},
    {"cos", Op::Cos},
    {"tan", Op::Tan},
    {"exp", Op::Exp},
    {"log", Op::Log},
    {"sqrt", Op::Sqrt},
    {"abs", Op::Abs},
}};

std::string_view function_name(Op op) {
  for (const auto& f : kUnaryFunctions) {
    if (f.op == op) return f.name;
  }
  return "?";
}

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr e = expression();
    skip_ws();
    if (pos_ != text_.size()) throw SyntaxError(pos_, "end of input");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\n' || text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) throw SyntaxError(pos_, std::string("'") + c + "'");
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(Op::Add, {lhs, term()});
      } else if (accept('-')) {
        lhs = make_node(Op::Sub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(Op::Mul, {lhs, unary()});
      } else if (accept('/')) {
        lhs = make_node(Op::Div, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_node(Op::Neg, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    while (accept('^')) base = make_pow(base, integer_exponent());
    return base;
  }

  int integer_exponent() {
    const bool paren = accept('(');
    const bool negative = accept('-');
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    if (pos_ == start) throw SyntaxError(start, "integer exponent");
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc()) throw SyntaxError(start, "integer exponent");
    if (paren) expect(')');
    return negative ? -value : value;
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && is_digit(text_[p])) {
        pos_ = p;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
      }
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) throw SyntaxError(start, "number");
    return make_const(v);
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, "expression");
    const char c = text_[pos_];
    if (is_digit(c) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      NodePtr e = expression();
      expect(')');
      return e;
    }
    if (is_ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
      std::string name(text_.substr(start, pos_ - start));
      skip_ws();
      const bool call = pos_ < text_.size() && text_[pos_] == '(';
      if (!call) return make_var(std::move(name));
      ++pos_;
      if (name == "pow") {
        NodePtr base = expression();
        expect(',');
        const int n = integer_exponent();
        expect(')');
        return make_pow(base, n);
      }
      for (const auto& f : kUnaryFunctions) {
        if (f.name == name) {
          NodePtr arg = expression();
          expect(')');
          return make_node(f.op, {arg});
        }
      }
      throw UnknownFunction(name);
    }
    throw SyntaxError(pos_, "expression");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::Const: {
      std::array<char, 32> buf{};
      const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
      std::string s(buf.data(), ptr);
      if (n.value < 0 || std::signbit(n.value)) {
        out += "(" + s + ")";
      } else {
        out += s;
      }
      return;
    }
    case Op::Var:
      out += n.name;
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const char* sym = n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? " * " : " / ";
      out += "(";
      print(*n.args[0], out);
      out += sym;
      print(*n.args[1], out);
      out += ")";
      return;
    }
    case Op::Neg:
      out += "(-";
      print(*n.args[0], out);
      out += ")";
      return;
    case Op::Pow:
      out += "(";
      print(*n.args[0], out);
      out += "^";
      if (n.exponent < 0) {
        out += "(" + std::to_string(n.exponent) + ")";
      } else {
        out += std::to_string(n.exponent);
      }
      out += ")";
      return;
    default:
      out += function_name(n.op);
      out += "(";
      print(*n.args[0], out);
      out += ")";
      return;
  }
}

void collect_variables(const Node& n, std::vector<std::string>& out) {
  if (n.op == Op::Var) {
    if (std::find(out.begin(), out.end(), n.name) == out.end()) out.push_back(n.name);
    return;
  }
  for (const auto& a : n.args) collect_variables(*a, out);
}

template <class T>
T apply_unary(Op op, const T& x) {
  using std::abs;
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  using std::tan;
  switch (op) {
    case Op::Neg: return -x;
    case Op::Sin: return sin(x);
    case Op::Cos: return cos(x);
    case Op::Tan: return tan(x);
    case Op::Exp: return exp(x);
    case Op::Log: return log(x);
    case Op::Sqrt: return sqrt(x);
    case Op::Abs: return abs(x);
    default: return x;
  }
}

double int_pow(double x, int n) { return std::pow(x, n); }
HyperDual int_pow(const HyperDual& x, int n) { return pow(x, n); }

}  // namespace

Expr::Expr() : root_(make_const(0.0)) {}
Expr::Expr(NodePtr root) : root_(std::move(root)) {}

Expr Expr::parse(std::string_view text) { return Expr(Parser(text).parse()); }
Expr Expr::constant(double v) { return Expr(make_const(v)); }
Expr Expr::variable(std::string name) { return Expr(make_var(std::move(name))); }

std::string to_string(const Node& node) {
  std::string out;
  print(node, out);
  return out;
}

std::string Expr::str() const { return to_string(*root_); }

std::vector<std::string> Expr::variables() const {
  std::vector<std::string> out;
  collect_variables(*root_, out);
  return out;
}

bool Expr::depends_on(std::string_view name) const {
  const auto vars = variables();
  return std::find(vars.begin(), vars.end(), name) != vars.end();
}

bool structurally_equal(const Node& a, const Node& b) {
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  if (a.op == Op::Const && a.value != b.value) return false;
  if (a.op == Op::Var && a.name != b.name) return false;
  if (a.op == Op::Pow && a.exponent != b.exponent) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  }
  return true;
}

bool Expr::structurally_equal(const Expr& other) const {
  return conjscope::structurally_equal(*root_, *other.root_);
}

ExprProgram::ExprProgram(Expr expr, std::vector<std::string> free_vars, ParamMap params)
    : expr_(std::move(expr)), free_vars_(std::move(free_vars)), params_(std::move(params)) {
  compile(expr_.root_ptr());
  std::size_t depth = 0;
  for (const auto& ins : tape_) {
    switch (ins.op) {
      case Op::Const:
      case Op::Var:
        ++depth;
        break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
        --depth;
        break;
      default:
        break;
    }
    max_depth_ = std::max(max_depth_, depth);
  }
}

void ExprProgram::compile(const NodePtr& node) {
  for (const auto& a : node->args) compile(a);
  Instr ins{node->op, -1, 0.0, node->exponent, node.get()};
  if (node->op == Op::Const) {
    ins.constant = node->value;
  } else if (node->op == Op::Var) {
    const auto it = std::find(free_vars_.begin(), free_vars_.end(), node->name);
    if (it != free_vars_.end()) {
      ins.slot = static_cast<int>(it - free_vars_.begin());
    } else if (const auto p = params_.find(node->name); p != params_.end()) {
      ins.op = Op::Const;
      ins.constant = p->second;
    } else {
      throw UnboundName(node->name);
    }
  }
  tape_.push_back(ins);
}

template <class T>
T ExprProgram::run(std::span<const T> values) const {
  if (values.size() < free_vars_.size()) {
    throw UnboundName(free_vars_[values.size()]);
  }
  std::vector<T> stack;
  stack.reserve(max_depth_);
  for (const auto& ins : tape_) {
    switch (ins.op) {
      case Op::Const:
        stack.emplace_back(ins.constant);
        break;
      case Op::Var:
        stack.push_back(values[static_cast<std::size_t>(ins.slot)]);
        break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div: {
        T rhs = stack.back();
        stack.pop_back();
        T& lhs = stack.back();
        if (ins.op == Op::Add) {
          lhs = lhs + rhs;
        } else if (ins.op == Op::Sub) {
          lhs = lhs - rhs;
        } else if (ins.op == Op::Mul) {
          lhs = lhs * rhs;
        } else {
          if (value_of(rhs) == 0.0) throw DomainError("division by zero", to_string(*ins.node));
          lhs = lhs / rhs;
        }
        break;
      }
      case Op::Pow: {
        T& x = stack.back();
        if (ins.exponent < 0 && value_of(x) == 0.0) {
          throw DomainError("division by zero", to_string(*ins.node));
        }
        x = int_pow(x, ins.exponent);
        break;
      }
      case Op::Log:
        if (!(value_of(stack.back()) > 0.0)) {
          throw DomainError("log of non-positive value", to_string(*ins.node));
        }
        stack.back() = apply_unary(ins.op, stack.back());
        break;
      case Op::Sqrt:
        if (value_of(stack.back()) < 0.0) {
          throw DomainError("sqrt of negative value", to_string(*ins.node));
        }
        stack.back() = apply_unary(ins.op, stack.back());
        break;
      default:
        stack.back() = apply_unary(ins.op, stack.back());
        break;
    }
  }
  return stack.back();
}

double ExprProgram::eval(std::span<const double> values) const { return run<double>(values); }
HyperDual ExprProgram::eval(std::span<const HyperDual> values) const { return run<HyperDual>(values); }

namespace {

template <class T, class Map>
std::vector<T> bind_by_name(const std::vector<std::string>& vars, const Map& bindings) {
  std::vector<T> values;
  values.reserve(vars.size());
  for (const auto& v : vars) {
    const auto it = bindings.find(v);
    if (it == bindings.end()) throw UnboundName(v);
    values.push_back(it->second);
  }
  return values;
}

}  // namespace

double ExprProgram::eval(const std::map<std::string, double, std::less<>>& bindings) const {
  const auto values = bind_by_name<double>(free_vars_, bindings);
  return run<double>(values);
}

HyperDual ExprProgram::eval(const std::map<std::string, HyperDual, std::less<>>& bindings) const {
  const auto values = bind_by_name<HyperDual>(free_vars_, bindings);
  return run<HyperDual>(values);
}

bool ExprProgram::is_constant_zero() const {
  return tape_.size() == 1 && tape_[0].op == Op::Const && tape_[0].constant == 0.0;
}

SecondPartials second_partials(const ExprProgram& prog,
                               const std::map<std::string, double, std::less<>>& point,
                               std::string_view i, std::string_view j) {
  const auto& vars = prog.free_vars();
  if (std::find(vars.begin(), vars.end(), i) == vars.end()) throw UnboundName(std::string(i));
  if (std::find(vars.begin(), vars.end(), j) == vars.end()) throw UnboundName(std::string(j));
  std::vector<HyperDual> values;
  values.reserve(vars.size());
  for (const auto& v : vars) {
    const auto it = point.find(v);
    if (it == point.end()) throw UnboundName(v);
    HyperDual h(it->second);
    if (v == i) h.e1 = 1.0;
    if (v == j) h.e2 = 1.0;
    values.push_back(h);
  }
  const HyperDual r = prog.eval(std::span<const HyperDual>(values));
  return {r.re, r.e1, r.e2, r.e12};
}

}  // namespace conjscope
