#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <thread>

#include "conjscope/errors.hpp"
#include "conjscope/expr.hpp"
#include "conjscope/hyperdual.hpp"
#include "doctest.h"

using namespace conjscope;

namespace {

double eval_at(const std::string& text, std::map<std::string, double, std::less<>> b) {
  std::vector<std::string> vars;
  for (const auto& [k, v] : b) vars.push_back(k);
  return ExprProgram(Expr::parse(text), vars).eval(b);
}

}  // namespace

TEST_CASE("parse builds the expected tree") {
  const Expr e = Expr::parse("-x1 - eps*x2");
  const Node& root = e.root();
  REQUIRE(root.op == Op::Sub);
  REQUIRE(root.args.size() == 2);
  CHECK(root.args[0]->op == Op::Neg);
  CHECK(root.args[0]->args[0]->op == Op::Var);
  CHECK(root.args[0]->args[0]->name == "x1");
  CHECK(root.args[1]->op == Op::Mul);
  CHECK(root.args[1]->args[0]->name == "eps");
  CHECK(root.args[1]->args[1]->name == "x2");

  const Expr zero = Expr::parse("0");
  CHECK(zero.root().op == Op::Const);
  CHECK(zero.root().value == 0.0);
}

TEST_CASE("syntax errors carry the byte offset") {
  try {
    Expr::parse("sin(");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(Expr::parse("1 +"), SyntaxError);
  CHECK_THROWS_AS(Expr::parse("(x"), SyntaxError);
  CHECK_THROWS_AS(Expr::parse("x^1.5"), SyntaxError);
  CHECK_THROWS_AS(Expr::parse("sinh(x)"), UnknownFunction);
  CHECK_THROWS_AS(Expr::parse("sin x"), SyntaxError);
}

TEST_CASE("precedence: pow over unary minus over products over sums") {
  CHECK(eval_at("-x^2", {{"x", 3.0}}) == doctest::Approx(-9.0));
  CHECK(eval_at("2*3^2", {}) == doctest::Approx(18.0));
  CHECK(eval_at("1 - 2 - 3", {}) == doctest::Approx(-4.0));
  CHECK(eval_at("8/4/2", {}) == doctest::Approx(1.0));
  CHECK(eval_at("-2*-3", {}) == doctest::Approx(6.0));
  CHECK(eval_at("2^-1", {}) == doctest::Approx(0.5));
}

TEST_CASE("plain and hyper-dual evaluation") {
  CHECK(eval_at("x*y", {{"x", 2.0}, {"y", 3.0}}) == 6.0);

  const ExprProgram prod(Expr::parse("x*y"), {"x", "y"});
  const HyperDual r = prod.eval(std::map<std::string, HyperDual, std::less<>>{
      {"x", HyperDual(2, 1, 0, 0)}, {"y", HyperDual(3, 0, 1, 0)}});
  CHECK(r == HyperDual(6, 3, 2, 1));

  const ExprProgram s(Expr::parse("sin(x)"), {"x"});
  const HyperDual q = s.eval(std::map<std::string, HyperDual, std::less<>>{{"x", HyperDual(0, 1, 1, 0)}});
  CHECK(q.re == 0.0);
  CHECK(q.e1 == 1.0);
  CHECK(q.e2 == 1.0);
  CHECK(q.e12 == 0.0);
}

TEST_CASE("zero seeds reproduce the plain value exactly") {
  const ExprProgram p(Expr::parse("exp(sin(x)*y) / (1 + x^2) - sqrt(abs(y)) + log(2 + cos(x*y))"), {"x", "y"});
  const std::vector<double> v{0.37, -1.4};
  const std::vector<HyperDual> h{HyperDual(0.37), HyperDual(-1.4)};
  CHECK(p.eval(std::span<const HyperDual>(h)).re == p.eval(std::span<const double>(v)));
}

TEST_CASE("hyper-dual multiplication rule") {
  const HyperDual a(1.5, 0.2, -0.7, 0.3);
  const HyperDual b(-2.0, 1.1, 0.4, -0.9);
  const HyperDual c = a * b;
  CHECK(c.e12 == doctest::Approx(a.re * b.e12 + a.e1 * b.e2 + a.e2 * b.e1 + a.e12 * b.re));
}

TEST_CASE("second partials match the worked examples") {
  const ExprProgram a(Expr::parse("x^2*y"), {"x", "y"});
  const auto pa = second_partials(a, {{"x", 3.0}, {"y", 2.0}}, "x", "y");
  CHECK(pa.value == doctest::Approx(18));
  CHECK(pa.d_i == doctest::Approx(12));
  CHECK(pa.d_j == doctest::Approx(9));
  CHECK(pa.d_ij == doctest::Approx(6));

  const ExprProgram b(Expr::parse("exp(x)"), {"x"});
  const auto pb = second_partials(b, {{"x", 0.0}}, "x", "x");
  CHECK(pb.value == 1.0);
  CHECK(pb.d_i == 1.0);
  CHECK(pb.d_j == 1.0);
  CHECK(pb.d_ij == 1.0);

  // Independent oracle: central differences with h = 1e-5.
  const ExprProgram c(Expr::parse("x*y - y^3/3"), {"x", "y"});
  const auto pc = second_partials(c, {{"x", 1.0}, {"y", 2.0}}, "y", "y");
  const auto f = [&c](double y) { return c.eval(std::map<std::string, double, std::less<>>{{"x", 1.0}, {"y", y}}); };
  const double h = 1e-5;
  const double fd1 = (f(2 + h) - f(2 - h)) / (2 * h);
  const double fd2 = (f(2 + h) - 2 * f(2) + f(2 - h)) / (h * h);
  CHECK(pc.value == doctest::Approx(-2.0 / 3.0));
  CHECK(std::abs(pc.d_i - fd1) < 1e-8);
  CHECK(std::abs(pc.d_ij - fd2) < 1e-4);  // second differences lose ~half the digits
  CHECK(pc.d_i == doctest::Approx(-3.0));
  CHECK(pc.d_ij == doctest::Approx(-4.0));
}

TEST_CASE("random expressions: AD partials agree with central differences") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::vector<std::string> atoms{"x", "y", "z", "0.7", "1.3"};
  const std::vector<std::string> unary{"sin", "cos", "exp", "tan"};
  std::uniform_int_distribution<std::size_t> pick_atom(0, atoms.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_unary(0, unary.size() - 1);
  std::uniform_int_distribution<int> pick_op(0, 5);

  const std::function<std::string(int)> gen = [&](int depth) -> std::string {
    if (depth == 0) return atoms[pick_atom(rng)];
    switch (pick_op(rng)) {
      case 0: return "(" + gen(depth - 1) + " + " + gen(depth - 1) + ")";
      case 1: return "(" + gen(depth - 1) + " - " + gen(depth - 1) + ")";
      case 2: return "(" + gen(depth - 1) + " * " + gen(depth - 1) + ")";
      case 3: return "(" + gen(depth - 1) + ")^2";
      case 4: return unary[pick_unary(rng)] + "(0.5*" + gen(depth - 1) + ")";
      default: return "(" + gen(depth - 1) + ") / (2 + (" + gen(depth - 1) + ")^2)";
    }
  };

  const std::vector<std::string> vars{"x", "y", "z"};
  int checked = 0;
  for (int k = 0; k < 100; ++k) {
    const std::string text = gen(3);
    const ExprProgram p(Expr::parse(text), vars);
    std::map<std::string, double, std::less<>> pt{{"x", u(rng)}, {"y", u(rng)}, {"z", u(rng)}};
    const std::string i = vars[k % 3];
    const std::string j = vars[(k / 3) % 3];
    const auto sp = second_partials(p, pt, i, j);
    const double h = 1e-5;
    const auto at = [&](double di, double dj) {
      auto q = pt;
      q[i] += di;
      q[j] += dj;
      return p.eval(q);
    };
    const double fd_i = (at(h, 0) - at(-h, 0)) / (2 * h);
    const double fd_ij = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
    // Central difference of the (separately verified) first partial along j;
    // a plain second difference at h = 1e-5 carries ~1e-6 rounding noise.
    const auto grad_i = [&](double dj) {
      auto q = pt;
      q[j] += dj;
      return second_partials(p, q, i, j).d_i;
    };
    const double fd_ij_grad = (grad_i(h) - grad_i(-h)) / (2 * h);
    const double scale_1 = std::max(1.0, std::abs(fd_i));
    const double scale_2 = std::max(1.0, std::abs(fd_ij));
    INFO(text);
    CHECK(std::abs(sp.d_i - fd_i) / scale_1 < 1e-6);
    CHECK(std::abs(sp.d_ij - fd_ij_grad) / scale_2 < 1e-6);
    CHECK(std::abs(sp.d_ij - fd_ij) / scale_2 < 1e-4);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("printing round-trips to a structurally identical tree") {
  for (const char* text : {"-x1 - eps*x2", "sin(x)^3 / (1 + y)", "-(a - b) - -c", "exp(-t)*abs(x - 2)",
                           "x^2^3", "1e-3*x + 2.5E+2", "sqrt(log(1 + x^2))"}) {
    const Expr e = Expr::parse(text);
    const Expr again = Expr::parse(e.str());
    INFO(text);
    CHECK(e.structurally_equal(again));
    CHECK(again.str() == e.str());
  }
}

TEST_CASE("unbound names and domain errors") {
  CHECK_THROWS_AS(ExprProgram(Expr::parse("x + q"), {"x"}), UnboundName);
  CHECK_NOTHROW(ExprProgram(Expr::parse("x + q"), {"x"}, {{"q", 1.0}}));

  const ExprProgram lg(Expr::parse("log(x - 1)"), {"x"});
  try {
    lg.eval(std::map<std::string, double, std::less<>>{{"x", 0.5}});
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.subexpression().find("log") != std::string::npos);
  }
  const ExprProgram dv(Expr::parse("1/x"), {"x"});
  CHECK_THROWS_AS(dv.eval(std::map<std::string, double, std::less<>>{{"x", 0.0}}), DomainError);
}

TEST_CASE("evaluation is deterministic and thread-safe") {
  const ExprProgram p(Expr::parse("sin(x)*exp(y) - x^3*y + tan(0.3*x)"), {"x", "y"});
  std::vector<double> pts;
  for (int k = 0; k < 200; ++k) pts.push_back(-1.0 + 0.01 * k);
  std::vector<double> ref;
  for (double x : pts) ref.push_back(p.eval(std::vector<double>{x, 0.5 * x}));

  std::vector<std::vector<double>> results(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (double x : pts) results[static_cast<std::size_t>(t)].push_back(p.eval(std::vector<double>{x, 0.5 * x}));
    });
  }
  for (auto& th : threads) th.join();
  for (const auto& r : results) CHECK(r == ref);
}
