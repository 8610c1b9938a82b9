#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "thinplate/density.hpp"
#include "thinplate/density_checks.hpp"
#include "thinplate/quadratic_forms.hpp"

#include <cmath>

using namespace thinplate;

namespace {

DensityPtr logdet2() { return make_density({DensityKind::LogDet, 2.0}); }
DensityPtr invdet2() { return make_density({DensityKind::InvDet, 2.0}); }

// W + F12: breaks frame indifference.
class BrokenDensity : public EnergyDensity {
 public:
  std::string name() const override { return "broken"; }
  double energy(const Mat3& F) const override { return base_->energy(F) + F(0, 1); }

 private:
  DensityPtr base_ = logdet2();
};

}  // namespace

TEST_CASE("eval_W at the well and under compression") {
  const auto W = logdet2();
  CHECK(eval_W(*W, Mat3::Identity()) == 0.0);

  std::mt19937_64 rng(7);
  for (int n = 0; n < 20; ++n) CHECK(eval_W(*W, random_rotation(rng)) < 1e-14);

  const double expected = 3.0 + 9.0 * std::log(2.0) * std::log(2.0);
  CHECK(eval_W(*W, 2.0 * Mat3::Identity()) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(7.32408).epsilon(1e-6));

  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1.0;
  for (const auto& d : {logdet2(), invdet2(), make_density({DensityKind::SaintVenantLike, 2.0})})
    CHECK(std::isinf(eval_W(*d, reflect)));
}

TEST_CASE("eval_DW is zero on SO(3) and matches central differences") {
  const auto W = logdet2();
  CHECK(eval_DW(*W, Mat3::Identity()).norm() == 0.0);

  std::mt19937_64 rng(11);
  for (int n = 0; n < 10; ++n) CHECK(eval_DW(*W, random_rotation(rng)).norm() < 1e-10);

  const Mat3 F = Vec3(2.0, 1.0, 1.0).asDiagonal();
  auto w = [&](const Mat3& G) { return W->energy(G); };
  Mat3 fd;
  const double step = 1e-6;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Mat3 Fp = F, Fm = F;
      Fp(i, j) += step;
      Fm(i, j) -= step;
      fd(i, j) = (w(Fp) - w(Fm)) / (2 * step);
    }
  CHECK((eval_DW(*W, F) - fd).norm() / fd.norm() < 1e-6);

  Mat3 bad = Mat3::Identity();
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(eval_DW(*W, bad), std::domain_error);
}

TEST_CASE("analytic stress and Hessian agree with finite differences for all built-ins") {
  for (auto kind : {DensityKind::LogDet, DensityKind::InvDet, DensityKind::SaintVenantLike})
    for (double p : {2.0, 3.0}) {
      CAPTURE(to_string(kind));
      CAPTURE(p);
      const auto W = make_density({kind, p});
      std::mt19937_64 rng(5);
      for (int n = 0; n < 100; ++n) {
        const Mat3 F = random_positive_matrix(rng, 0.2, 5.0);
        const Mat3 fd = W->fd_stress(F);
        CHECK((W->stress(F) - fd).norm() / std::max(fd.norm(), 1e-8) < 1e-6);
        const Mat9 H = W->hessian(F);
        const Mat9 Hfd = W->fd_hessian(F);
        CHECK((H - Hfd).norm() / std::max(Hfd.norm(), 1e-8) < 1e-5);
      }
    }
}

TEST_CASE("hessian_at_identity for LogDet p=2 is 2|sym F|^2 + 2(tr F)^2") {
  const auto W = logdet2();
  const Tensor4 L = hessian_at_identity(*W);
  const Mat9 fd = oracle::fd_hessian9([&](const Mat3& F) { return W->energy(F); }, Mat3::Identity(), 1e-4);
  CHECK((L.matrix() - fd).norm() < 1e-5);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int n = 0; n < 100; ++n) {
    Mat3 F;
    for (int i = 0; i < 9; ++i) F(i / 3, i % 3) = normal(rng);
    const double formula = 2.0 * sym(F).squaredNorm() + 2.0 * F.trace() * F.trace();
    CHECK(L.quadratic(F) == doctest::Approx(formula).epsilon(1e-12));
    CHECK(L.quadratic(F) == doctest::Approx(L.quadratic(sym(F))).epsilon(1e-12));
    CHECK(std::abs(L.quadratic(skew(F))) < 1e-12);
  }
  Mat3 e11 = Mat3::Zero();
  e11(0, 0) = 1.0;
  CHECK(L.quadratic(e11) == doctest::Approx(4.0).epsilon(1e-12));

  const Mat9 raw = W->hessian(Mat3::Identity());
  CHECK((raw - raw.transpose()).norm() <= 1e-9 * raw.norm());
}

TEST_CASE("every built-in annihilates antisymmetric matrices at Id") {
  for (auto kind : {DensityKind::LogDet, DensityKind::InvDet, DensityKind::SaintVenantLike}) {
    const Tensor4 L = hessian_at_identity(*make_density({kind, 2.0}));
    Mat3 A;
    A << 0, 1, -2, -1, 0, 0.5, 2, -0.5, 0;
    CHECK(std::abs(L.quadratic(A)) < 1e-12);
  }
}

TEST_CASE("compute_Q2 against brute force and the isotropic closed form") {
  const double mu = 1.0, lambda = 2.0;
  auto q3 = [&](const Eigen::Matrix3d& F) {
    const double t = F.trace();
    return 2.0 * mu * (0.5 * (F + F.transpose())).squaredNorm() + lambda * t * t;
  };
  const QuadForm2 Q2 = compute_Q2(Tensor4::isotropic(mu, lambda));
  const double lambda2 = 2.0 * mu * lambda / (2.0 * mu + lambda);
  CHECK((Q2.matrix() - QuadForm2::isotropic(mu, lambda2).matrix()).norm() < 1e-12);

  for (int a = 0; a < 3; ++a) {
    QuadForm2::Coords e = QuadForm2::Coords::Zero();
    e[a] = 1.0;
    const Eigen::Matrix2d G = QuadForm2::from_coords(e);
    CHECK(std::abs(Q2(G) - oracle::brute_force_relaxation(q3, G)) <= 1e-9);
  }
  CHECK(Q2(Eigen::Matrix2d::Identity()) == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(Q2(Eigen::Matrix2d::Zero()) == 0.0);

  // Q2 only sees sym G.
  Eigen::Matrix2d G;
  G << 0.3, 1.0, -0.4, -0.7;
  CHECK(Q2(G) == doctest::Approx(Q2(0.5 * (G + G.transpose()))).epsilon(1e-14));
}

TEST_CASE("Q2 never exceeds Q3 of a symmetric completion") {
  const Tensor4 L = hessian_at_identity(*logdet2());
  const QuadForm2 Q2 = compute_Q2(L);
  CHECK(Q2.matrix().selfadjointView<Eigen::Upper>().ldlt().isPositive());
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  for (int n = 0; n < 200; ++n) {
    Eigen::Matrix2d G;
    G << normal(rng), normal(rng), 0, normal(rng);
    G(1, 0) = G(0, 1);
    Mat3 F = Mat3::Zero();
    F.topLeftCorner<2, 2>() = G;
    F(0, 2) = F(2, 0) = normal(rng);
    F(1, 2) = F(2, 1) = normal(rng);
    F(2, 2) = normal(rng);
    CHECK(Q2(G) <= L.quadratic(F) + 1e-12);
    CHECK(Q2(G) == doctest::Approx(L.quadratic(optimal_completion(L, G))).epsilon(1e-12));
  }
}

TEST_CASE("compute_Q2 reports a degenerate relaxation") {
  Mat9 m = Mat9::Zero();
  m(0, 0) = m(4, 4) = 1.0;  // no stiffness at all in the out-of-plane entries
  CHECK_THROWS_WITH_AS(compute_Q2(Tensor4(m)), doctest::Contains("relaxation degenerate"), std::runtime_error);
}

TEST_CASE("frame indifference check with a negative control") {
  CHECK(check_frame_indifference(*logdet2(), 1000, 1).max_abs_violation <= 1e-10);
  CHECK(check_frame_indifference(*invdet2(), 1000, 1).max_abs_violation <= 1e-10);
  CHECK(check_frame_indifference(BrokenDensity{}, 100, 1).max_abs_violation > 1e-3);
}

TEST_CASE("coercivity ratio") {
  const auto W = logdet2();
  const auto rep = check_coercivity(*W, 1000, 2);
  CHECK(rep.min_ratio >= 0.5);
  CHECK(rep.excluded > 0);
  std::mt19937_64 rng(1);
  CHECK(std::isnan(coercivity_ratio(*W, random_rotation(rng))));
  CHECK(coercivity_ratio(*W, 2.0 * Mat3::Identity()) == doctest::Approx(eval_W(*W, 2.0 * Mat3::Identity()) / 3.0));
  CHECK(coercivity_ratio(*W, 2.0 * Mat3::Identity()) == doctest::Approx(2.44136).epsilon(1e-5));
}

TEST_CASE("Ball growth ratio stays bounded under compression") {
  std::vector<double> dets;
  for (int j = 1; j <= 6; ++j) dets.push_back(std::pow(10.0, -j));
  const auto W = logdet2();
  CHECK(ball_ratio(*W, Mat3::Identity()) == 0.0);

  const auto rep = check_ball_growth(*W, dets, 1000, 4);
  REQUIRE(rep.trend.size() == 6);
  CHECK(std::isfinite(rep.empirical_k));
  // One-parameter scan: W grows like (log t)^2 while |DW F^T| grows like |log t|.
  for (std::size_t j = 2; j < rep.trend.size(); ++j) CHECK(rep.trend[j] < rep.trend[j - 1]);
  for (double r : rep.trend) CHECK(r <= 2.0 * rep.trend.front());

  const auto inv = check_ball_growth(*invdet2(), dets, 100, 4);
  for (double r : inv.trend) CHECK(r <= 2.0 * inv.trend.front());
}

TEST_CASE("density suite passes for the built-in densities") {
  for (const auto& W : {logdet2(), invdet2()})
    for (const auto& rec : run_density_suite(*W, 42)) {
      CAPTURE(rec.check);
      CAPTURE(rec.statistic);
      CHECK(rec.pass);
      const auto j = to_json(rec);
      CHECK(j.contains("threshold"));
    }
}

TEST_CASE("make_density rejects invalid parameters") {
  CHECK_THROWS_AS(make_density({DensityKind::LogDet, 1.5}), std::invalid_argument);
  CHECK_THROWS_AS(make_density({DensityKind::LogDet, 2.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(density_kind_from_string("neo-hooke"), std::invalid_argument);
  DensitySpec fd{DensityKind::LogDet, 2.0, 0.5, false};
  const auto W = make_density(fd);
  const Mat3 F = Vec3(1.2, 0.9, 1.1).asDiagonal();
  CHECK((W->stress(F) - logdet2()->stress(F)).norm() < 1e-7);
}

TEST_CASE("compute_Q2 matches brute force for every built-in density") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (DensityKind k : {DensityKind::LogDet, DensityKind::InvDet, DensityKind::SaintVenantLike}) {
    for (double p : {2.0, 3.0}) {
      const Tensor4 L = hessian_at_identity(*make_density({k, p}));
      const QuadForm2 Q2 = compute_Q2(L);
      auto q3 = [&](const Eigen::Matrix3d& F) { return L.quadratic(F); };
      for (int n = 0; n < 4; ++n) {
        Eigen::Matrix2d G;
        G << normal(rng), normal(rng), normal(rng), normal(rng);
        CAPTURE(to_string(k));
        CHECK(std::abs(Q2(G) - oracle::brute_force_relaxation(q3, G)) <= 1e-9 * (1.0 + std::abs(Q2(G))));
      }
    }
  }
}
