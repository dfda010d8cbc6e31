#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <random>

#include "conjscope/catalog.hpp"
#include "conjscope/errors.hpp"
#include "conjscope/frames.hpp"
#include "conjscope/jacobi.hpp"
#include "doctest.h"
#include "random_systems.hpp"

using namespace conjscope;
using std::numbers::pi;

namespace {

MatrixFunction constant(const Mat& K) {
  return [K](double) { return K; };
}

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

Mat perturbed_K(double eps) {
  Mat K(2, 2);
  K << 1, eps, -eps, 1;
  return K;
}

std::vector<Vec> samples(const std::function<Vec(double)>& w, double r, int N) {
  std::vector<Vec> out;
  for (int k = 0; k < N; ++k) out.push_back(w(r * k / (N - 1)));
  return out;
}

Vec e1(double v) { return Vec::Constant(1, v); }

}  // namespace

TEST_CASE("scalar harmonic: P = sin(ωt)/ω, Q = cos(ωt)") {
  const double w = 1.7;
  const JacobiSolution js = integrate_jacobi(constant(scalar(w * w)), 1, 6.0);
  CHECK(js.P(0.0)(0, 0) == 0.0);
  CHECK(js.Q(0.0)(0, 0) == 1.0);
  for (double t : js.sample_times(3)) {
    CHECK(std::abs(js.P(t)(0, 0) - std::sin(w * t) / w) < 1e-8);
    CHECK(std::abs(js.Q(t)(0, 0) - std::cos(w * t)) < 1e-8);
  }
}

TEST_CASE("K = 0 gives P = t I") {
  const JacobiSolution js = integrate_jacobi(constant(Mat::Zero(3, 3)), 3, 4.0);
  for (double t : {0.5, 2.0, 4.0}) CHECK((js.P(t) - t * Mat::Identity(3, 3)).norm() < 1e-12);
  CHECK(find_conjugate_times(js).empty());
}

TEST_CASE("perturbed pair: P is the real form of sin(ωt)/ω") {
  for (double eps : {0.0, 0.05, 0.3}) {
    const auto oracle = perturbed_pair_oracle(eps, 7.0);
    const JacobiSolution js = integrate_jacobi(constant(perturbed_K(eps)), 2, 7.0);
    for (double t : js.sample_times(2)) {
      const std::complex<double> z = oracle.z(t);
      // Multiplication by z on C = R² with K acting on (x, y) as 1 - iε.
      Mat expect(2, 2);
      expect << z.real(), -z.imag(), z.imag(), z.real();
      INFO(eps);
      CHECK((js.P(t) - expect).cwiseAbs().maxCoeff() < 1e-8);
      CHECK(std::abs(js.sigma_min(t) - oracle.sigma(t)) < 1e-8);
    }
  }
}

TEST_CASE("conjugate times: worked examples") {
  const auto simple = find_conjugate_times(integrate_jacobi(constant(scalar(1.0)), 1, 7.0));
  REQUIRE(simple.size() == 2);
  CHECK(std::abs(simple[0].t_star - pi) < 1e-6);
  CHECK(std::abs(simple[1].t_star - 2 * pi) < 1e-6);
  CHECK(simple[0].multiplicity == 1);
  CHECK(simple[1].multiplicity == 1);

  const JacobiSolution js0 = integrate_jacobi(constant(perturbed_K(0.0)), 2, 7.0);
  const auto dbl = find_conjugate_times(js0);
  REQUIRE(dbl.size() == 2);
  for (int k = 0; k < 2; ++k) {
    CHECK(std::abs(dbl[static_cast<std::size_t>(k)].t_star - (k + 1) * pi) < 1e-6);
    CHECK(dbl[static_cast<std::size_t>(k)].multiplicity == 2);
    CHECK(dbl[static_cast<std::size_t>(k)].kernel_basis.size() == 2);
    for (const Vec& v : dbl[static_cast<std::size_t>(k)].kernel_basis) {
      const double t = dbl[static_cast<std::size_t>(k)].t_star;
      CHECK((js0.P(t) * v).norm() <= 1e-6 * js0.Q(t).norm());
    }
  }

  CHECK(find_conjugate_times(integrate_jacobi(constant(perturbed_K(0.05)), 2, 3 * pi)).empty());
}

TEST_CASE("multiplicity from coincident scalar tracks") {
  Mat K = Mat::Zero(3, 3);
  K.diagonal() << 1.0, 1.0, 4.0;
  const auto ct = find_conjugate_times(integrate_jacobi(constant(K), 3, 4.0));
  // Zeros: π/2 (from 4), π (1, 1 and 4 together).
  REQUIRE(ct.size() == 2);
  CHECK(std::abs(ct[0].t_star - pi / 2) < 1e-6);
  CHECK(ct[0].multiplicity == 1);
  CHECK(std::abs(ct[1].t_star - pi) < 1e-6);
  CHECK(ct[1].multiplicity == 3);
}

TEST_CASE("PᵀQ stays symmetric for symmetric K") {
  const auto K = [](double t) {
    Mat k(2, 2);
    k << 1 + 0.5 * std::sin(t), 0.3 * std::cos(2 * t), 0.3 * std::cos(2 * t), 2 - 0.2 * t;
    return k;
  };
  const JacobiSolution js = integrate_jacobi(K, 2, 6.0);
  double worst = 0.0;
  for (double t : js.sample_times()) {
    const Mat W = js.P(t).transpose() * js.Q(t);
    worst = std::max(worst, (W - W.transpose()).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("scalar comparison: λ ≥ κ puts the first zero before π/√κ") {
  const double kappa = 2.5;
  const auto lambda = [kappa](double t) { return Mat::Constant(1, 1, kappa + 0.8 * std::sin(t) * std::sin(t)); };
  const auto ct = find_conjugate_times(integrate_jacobi(lambda, 1, 4.0));
  REQUIRE(!ct.empty());
  CHECK(ct[0].t_star <= pi / std::sqrt(kappa) + 1e-6);
  const JacobiSolution js = integrate_jacobi(lambda, 1, 4.0);
  const auto grid = js.sample_times();
  CHECK(js.sigma_min(grid[1]) > 0.0);
}

TEST_CASE("rank drop detection on a prescribed matrix function") {
  // diag(sin t, sin 2t): zeros at π/2 (1), π (2).
  const MatrixFunction M = [](double t) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = std::sin(t);
    m(1, 1) = std::sin(2 * t);
    return m;
  };
  std::vector<double> grid;
  for (int k = 0; k <= 400; ++k) grid.push_back(4.0 * k / 400.0);
  const auto ct = detect_rank_drops(M, grid);
  REQUIRE(ct.size() == 2);
  CHECK(std::abs(ct[0].t_star - pi / 2) < 1e-6);
  CHECK(ct[0].multiplicity == 1);
  CHECK(std::abs(ct[1].t_star - pi) < 1e-6);
  CHECK(ct[1].multiplicity == 2);
}

TEST_CASE("windowed minimum ignores the initial rise") {
  std::vector<double> grid;
  for (int k = 0; k <= 200; ++k) grid.push_back(6.0 * k / 200.0);
  const auto m = windowed_minimum([](double t) { return std::abs(std::sin(t)) + 0.1; }, grid);
  REQUIRE(m.has_value());
  CHECK(std::abs(*m - 0.1) < 1e-9);
  CHECK_FALSE(windowed_minimum([](double t) { return t; }, grid).has_value());
}

TEST_CASE("index functional: worked values") {
  const double r = 2.0;
  const int N = 401;
  const auto flat = index_functional(constant(scalar(0.0)), samples([r](double t) { return e1(std::sin(pi * t / r)); }, r, N), r);
  CHECK(std::abs(flat - pi * pi / (2 * r)) < 1e-6);

  const auto before = index_functional(constant(scalar(1.0)), samples([](double t) { return e1(std::sin(2 * t)); }, pi / 2, N), pi / 2);
  CHECK(before > 0.0);

  // Past the first conjugate time some section has negative index.
  const double r2 = 3 * pi / 2;
  double best = 1e300;
  for (int k = 1; k <= 3; ++k) {
    const auto w = samples([r2, k](double t) { return e1(std::sin(k * pi * t / r2)); }, r2, N);
    best = std::min(best, index_functional(constant(scalar(1.0)), w, r2));
  }
  CHECK(best < 0.0);

  CHECK_THROWS_AS(index_functional(constant(scalar(1.0)), samples([](double t) { return e1(1.0 + t); }, 1.0, 11), 1.0),
                  EndpointNotZero);
}

TEST_CASE("index functional is non-negative before the first conjugate time") {
  const auto K = [](double t) { return Mat::Constant(1, 1, 1.0 + 0.5 * std::cos(t)); };
  const auto ct = find_conjugate_times(integrate_jacobi(K, 1, 8.0));
  REQUIRE(!ct.empty());
  const double r = 0.95 * ct[0].t_star;
  for (int k = 1; k <= 5; ++k) {
    const auto w = samples([r, k](double t) { return e1(std::sin(k * pi * t / r) + 0.3 * std::sin(2 * k * pi * t / r)); }, r, 801);
    CHECK(index_functional(K, w, r) >= -1e-9 * r);
  }
}

TEST_CASE("variational oracle: worked examples") {
  const double w = 2.0;
  const DynamicPair h(make_sode(std::vector<std::string>{"-omega^2*x1"}, {{"omega", w}}));
  Vec x0(2);
  x0 << 0.3, 0.7;
  const auto r = variational_oracle(h, x0, 2.0);
  REQUIRE(r.times.size() == 1);
  CHECK(std::abs(r.times[0].t_star - pi / w) < 1e-6);
  CHECK(r.times[0].multiplicity == 1);

  const DynamicPair pp(make_sode(std::vector<std::string>{"-x1", "-x2"}));
  Vec p0(4);
  p0 << 0.1, 0.2, 0.3, -0.4;
  const auto d = variational_oracle(pp, p0, 7.0);
  REQUIRE(d.times.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(std::abs(d.times[k].t_star - (k + 1) * pi) < 1e-6);
    CHECK(d.times[k].multiplicity == 2);
  }

  // Nonautonomous lift uses the (2m + 1)-column basis.
  const DynamicPair forced(make_sode(std::vector<std::string>{"-x1 + 0.3*sin(t)"}));
  Vec f0(3);
  f0 << 0.0, 0.2, 0.1;
  const auto f = variational_oracle(forced, f0, 4.0);
  REQUIRE(f.times.size() == 1);
  CHECK(std::abs(f.times[0].t_star - pi) < 1e-6);
}

TEST_CASE("oracle and normal-frame pipeline agree on random systems") {
  for (const auto& rs : testing::random_sode_suite(20)) {
    const auto pair = std::make_shared<const DynamicPair>(rs.model());
    const FrameTransport ft = transport_normal_frame(pair, rs.x0, 2.0);
    const JacobiSolution js = integrate_jacobi([&ft](double t) { return ft.K_normal(t); }, rs.m, 2.0);
    const auto main = find_conjugate_times(js);
    const auto oracle = variational_oracle(*pair, rs.x0, 2.0).times;
    INFO(rs.F[0]);
    REQUIRE(main.size() == oracle.size());
    for (std::size_t k = 0; k < main.size(); ++k) {
      CHECK(std::abs(main[k].t_star - oracle[k].t_star) < 1e-6);
      CHECK(main[k].multiplicity == oracle[k].multiplicity);
    }
  }
}
