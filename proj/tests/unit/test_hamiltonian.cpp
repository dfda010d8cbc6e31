#include <cmath>
#include <memory>
#include <random>

#include "conjscope/bounds.hpp"
#include "conjscope/catalog.hpp"
#include "conjscope/errors.hpp"
#include "conjscope/frames.hpp"
#include "conjscope/hamiltonian.hpp"
#include "doctest.h"
#include "random_systems.hpp"

using namespace conjscope;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<Expr> parse_all(std::initializer_list<const char*> v) {
  std::vector<Expr> out;
  for (const char* s : v) out.push_back(Expr::parse(s));
  return out;
}

// Free particle on T*R²: X = p·∂q, V = span{∂p}, coordinates (q1, q2, p1, p2).
GenericModel free_particle() {
  GenericModel g;
  g.coords = {"q1", "q2", "p1", "p2"};
  g.X = parse_all({"p1", "p2", "0", "0"});
  g.V = {parse_all({"0", "0", "1", "0"}), parse_all({"0", "0", "0", "1"})};
  return g;
}

PairPtr make_pair(const DynamicPairModel& m) { return std::make_shared<const DynamicPair>(m); }

std::vector<Vec> random_points(int n, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec> out;
  for (int k = 0; k < count; ++k) {
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = u(rng);
    out.push_back(x);
  }
  return out;
}

}  // namespace

TEST_CASE("antisymmetric completion") {
  std::vector<std::vector<std::optional<Expr>>> partial(2, std::vector<std::optional<Expr>>(2));
  partial[0][1] = Expr::parse("x1");
  const SigmaExprs s = complete_antisymmetric(partial);
  CHECK(s[0][1].str() == "x1");
  CHECK(s[1][0].str() == Expr::parse("-x1").str());
  CHECK(s[0][0].str() == "0");
  partial[1][0] = Expr::parse("x2");
  CHECK_THROWS_AS(complete_antisymmetric(partial), PreconditionViolation);

  const auto pair = make_pair(make_sode(std::vector<std::string>{"-x1"}));
  SigmaExprs bad = testing::canonical_sigma(1);
  bad[1][0] = Expr::parse("2");
  const SemiHamiltonian h(pair, bad);
  CHECK_THROWS_AS(h.sigma(vec({0.1, 0.2})), PreconditionViolation);
}

TEST_CASE("Lagrangian condition") {
  const auto fp = make_pair(free_particle());
  const SemiHamiltonian canon(fp, testing::canonical_sigma(2));
  CHECK(check_lagrangian(canon, random_points(4, 5, 1)) == 0.0);

  GenericModel mixed = free_particle();
  mixed.V = {parse_all({"1", "0", "0", "0"}), parse_all({"0", "0", "1", "0"})};
  const SemiHamiltonian not_lag(make_pair(mixed), testing::canonical_sigma(2));
  CHECK(check_lagrangian(not_lag, random_points(4, 5, 2)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(induced_metric(not_lag, vec({0.1, 0.2, 0.3, 0.4})), PreconditionViolation);

  for (const auto& rs : testing::random_sode_suite(6)) {
    const SemiHamiltonian sh(make_pair(rs.model()), testing::canonical_sigma(rs.m));
    CHECK(check_lagrangian(sh, {rs.x0}) == 0.0);
  }
}

TEST_CASE("induced metric of the free particle is the identity after the sign flip") {
  const SemiHamiltonian sh(make_pair(free_particle()), testing::canonical_sigma(2));
  const InducedMetric g = induced_metric(sh, vec({0.2, -0.1, 0.5, 0.7}));
  CHECK(g.flipped);
  CHECK(g.definite);
  CHECK((g.g - Mat::Identity(2, 2)).norm() < 1e-14);
  CHECK(g.symmetry_residual <= 1e-10);
  CHECK(g.min_abs_eigenvalue == doctest::Approx(1.0));
}

TEST_CASE("semi-invariance") {
  const SemiHamiltonian fp(make_pair(free_particle()), testing::canonical_sigma(2));
  CHECK(check_semi_invariance(fp, random_points(4, 5, 3)) <= 1e-10);

  // X = p(1 + q²)∂q does not preserve dq∧dp.
  GenericModel g;
  g.coords = {"q", "p"};
  g.X = parse_all({"p*(1 + q^2)", "0"});
  g.V = {parse_all({"0", "1"})};
  const SemiHamiltonian bad(make_pair(g), testing::canonical_sigma(1));
  CHECK(check_semi_invariance(bad, {vec({0.5, 0.8})}) > 1e-3);

  for (int seed = 0; seed < 6; ++seed) {
    const auto rp = testing::random_potential(100 + static_cast<std::uint64_t>(seed), 1 + seed % 3);
    const SemiHamiltonian sh(make_pair(make_sode(rp.F)), testing::canonical_sigma(rp.m));
    INFO(rp.P);
    CHECK(check_semi_invariance(sh, random_points(2 * rp.m, 5, 7)) <= 1e-8);
  }
}

TEST_CASE("self-adjointness of K") {
  CHECK(check_K_selfadjoint(Mat::Identity(2, 2), Mat::Zero(2, 2)) == 0.0);
  Mat K(2, 2);
  K << 1, 0.2, -0.2, 1;
  // ‖gK - (gK)ᵀ‖_F / ‖gK‖_F = 2√2·ε / √(2 + 2ε²).
  CHECK(check_K_selfadjoint(Mat::Identity(2, 2), K) == doctest::Approx(2 * 0.2 / std::sqrt(1 + 0.04)));

  for (int seed = 0; seed < 6; ++seed) {
    const auto rp = testing::random_potential(200 + static_cast<std::uint64_t>(seed), 1 + seed % 3);
    const auto pair = make_pair(make_sode(rp.F));
    const SemiHamiltonian sh(pair, testing::canonical_sigma(rp.m));
    const InducedMetric g = induced_metric(sh, rp.x0);
    CHECK(g.definite);
    CHECK(g.symmetry_residual <= 1e-10);
    CHECK(check_K_selfadjoint(g.g, curvature_at(*pair, rp.x0)) <= 1e-8);
  }
}

TEST_CASE("normal-frame properties along Hamiltonian trajectories") {
  for (int seed = 0; seed < 6; ++seed) {
    const auto rp = testing::random_potential(300 + static_cast<std::uint64_t>(seed), 1 + seed % 3);
    const auto pair = make_pair(make_sode(rp.F));
    const SemiHamiltonian sh(pair, testing::canonical_sigma(rp.m));
    const FrameTransport ft = transport_normal_frame(pair, rp.x0, 2.0);
    const Mat g0 = induced_metric_normal(sh, ft, 0.0);
    double drift = 0.0;
    double horizontal = 0.0;
    for (double t : ft.sample_times()) {
      drift = std::max(drift, (induced_metric_normal(sh, ft, t) - g0).cwiseAbs().maxCoeff());
      horizontal = std::max(horizontal, horizontal_lagrangian_residual(sh, ft.x(t), ft.G(t)));
    }
    INFO(rp.P);
    CHECK(drift <= 1e-7);
    CHECK(horizontal <= 1e-8);
  }
}

TEST_CASE("skew perturbation with the flat metric is flagged") {
  const BuiltSystem b = build("perturbed_pair", {{"eps", "0.1"}});
  const DynamicPair pair(b.model);
  const Mat K = curvature_at(pair, b.default_x0);
  CHECK(check_K_selfadjoint(Mat::Identity(2, 2), K) > 1e-3);
}
