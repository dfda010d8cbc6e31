#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "conjscope/hyperdual.hpp"

namespace conjscope {

enum class Op {
  Const,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Pow,
  Sin,
  Cos,
  Tan,
  Exp,
  Log,
  Sqrt,
  Abs,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Const;
  double value = 0.0;    // Const
  std::string name;      // Var
  int exponent = 0;      // Pow
  std::vector<NodePtr> args;
};

using ParamMap = std::map<std::string, double, std::less<>>;

/// Immutable expression tree. Copies share the tree.
class Expr {
 public:
  Expr();  // the constant 0
  explicit Expr(NodePtr root);

  /// Recursive-descent parse. Precedence: ^ binds tighter than unary minus,
  /// which binds tighter than * and /, then + and -. Exponents must be
  /// integer literals; functions need parentheses.
  static Expr parse(std::string_view text);

  static Expr constant(double v);
  static Expr variable(std::string name);

  const Node& root() const { return *root_; }
  const NodePtr& root_ptr() const { return root_; }

  /// Fully parenthesised rendering that re-parses to the same tree.
  std::string str() const;

  /// Names referenced by the tree, in order of first appearance.
  std::vector<std::string> variables() const;
  bool depends_on(std::string_view name) const;

  bool structurally_equal(const Expr& other) const;

 private:
  NodePtr root_;
};

std::string to_string(const Node& node);
bool structurally_equal(const Node& a, const Node& b);

/// An expression compiled against an ordered list of free variables, with
/// named parameters folded in as constants. Evaluation is a stack machine
/// over a postfix tape and has no mutable state, so one program may be
/// evaluated from many threads at once.
class ExprProgram {
 public:
  ExprProgram() = default;
  /// Throws UnboundName if the tree references a name that is neither a free
  /// variable nor a parameter.
  ExprProgram(Expr expr, std::vector<std::string> free_vars, ParamMap params = {});

  const Expr& expr() const { return expr_; }
  const std::vector<std::string>& free_vars() const { return free_vars_; }
  const ParamMap& params() const { return params_; }

  double eval(std::span<const double> values) const;
  HyperDual eval(std::span<const HyperDual> values) const;

  /// Name-keyed evaluation. Every free variable must be bound.
  double eval(const std::map<std::string, double, std::less<>>& bindings) const;
  HyperDual eval(const std::map<std::string, HyperDual, std::less<>>& bindings) const;

  bool is_constant_zero() const;

 private:
  struct Instr {
    Op op;
    int slot;         // Var: index into values
    double constant;  // Const
    int exponent;     // Pow
    const Node* node; // for diagnostics
  };

  template <class T>
  T run(std::span<const T> values) const;
  void compile(const NodePtr& node);

  Expr expr_;
  std::vector<std::string> free_vars_;
  ParamMap params_;
  std::vector<Instr> tape_;
  std::size_t max_depth_ = 0;
};

/// Value and derivatives of a program at a point along coordinates i and j.
struct SecondPartials {
  double value;
  double d_i;
  double d_j;
  double d_ij;
};

SecondPartials second_partials(const ExprProgram& prog,
                               const std::map<std::string, double, std::less<>>& point,
                               std::string_view i, std::string_view j);

}  // namespace conjscope
