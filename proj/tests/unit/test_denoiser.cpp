#include "mvg/denoiser.hpp"
#include "mvg/diffusion.hpp"
#include "mvg/random.hpp"
#include "mvg/toydata.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace mvg {
namespace {

Mixture random_mixture(Index dim, Index k, std::uint64_t seed) {
  const NoiseStream rng(seed);
  Mixture m;
  m.weights.resize(k);
  m.means.resize(dim, k);
  m.variances.resize(k);
  for (Index c = 0; c < k; ++c) {
    const auto stage = static_cast<std::uint32_t>(c);
    m.weights(c) = 0.2 + rng.uniform(StreamTag::kTest, stage, 0, 0);
    m.variances(c) = 0.05 + rng.uniform(StreamTag::kTest, stage, 0, 1);
    m.means.col(c) = rng.normal_tensor({dim}, StreamTag::kTest, stage, 1).values();
  }
  m.weights /= m.weights.sum();
  return m;
}

TEST(Mixture, ValidatesWeightsAndVariances) {
  Mixture m = Mixture::single(Eigen::VectorXd::Zero(2), 1.0);
  EXPECT_NO_THROW(m.validate());
  m.weights(0) = 0.9;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m = Mixture::single(Eigen::VectorXd::Zero(2), 0.0);
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(Mixture, LogDensityMatchesDirectSum) {
  const Mixture m = random_mixture(3, 4, 5);
  const Eigen::Vector3d x(0.3, -0.1, 0.8);
  double p = 0.0;
  for (Index k = 0; k < 4; ++k) {
    const double v = m.variances(k);
    p += m.weights(k) * std::exp(-(x - m.means.col(k)).squaredNorm() / (2 * v)) /
         std::pow(2 * M_PI * v, 1.5);
  }
  EXPECT_NEAR(m.log_density(x), std::log(p), 1e-12);
}

TEST(GmmEps, StandardNormalPriorIsScaledIdentity) {
  const NoiseSchedule s = build_default_schedule(50);
  const Mixture prior = Mixture::single(Eigen::VectorXd::Zero(3), 1.0);
  const Tensor x = Tensor::from_values({3}, {0.4, -1.2, 2.5});
  for (int t : {1, 10, 50}) {
    const Tensor eps = mixture_eps(x, t, prior, s);
    const double scale = std::sqrt(1.0 - s.alpha_bar(t));
    for (Index i = 0; i < 3; ++i) EXPECT_NEAR(eps[i], scale * x[i], 1e-14);
  }
}

TEST(GmmEps, ZeroNoiseLimitVanishes) {
  const NoiseSchedule s = build_schedule(1, 1e-300, 1e-300);
  const Mixture m = random_mixture(4, 3, 9);
  const Tensor eps = mixture_eps(Tensor::from_values({4}, {0.1, 0.2, 0.3, 0.4}), 1, m, s);
  EXPECT_EQ(eps.values().norm(), 0.0);
}

TEST(GmmEps, SymmetricPairAtOrigin) {
  const NoiseSchedule s = build_default_schedule(50);
  const Mixture a = Mixture::single(Eigen::Vector2d(1.5, -0.5), 0.3);
  const Mixture b = Mixture::single(Eigen::Vector2d(-1.5, 0.5), 0.3);
  const Mixture m = Mixture::combine(a, 0.5, b, 0.5);
  const Tensor eps = mixture_eps(Tensor({2}), 20, m, s);
  EXPECT_NEAR(eps.values().norm(), 0.0, 1e-15);
}

TEST(GmmEps, MatchesFiniteDifferenceScore) {
  const NoiseSchedule s = build_default_schedule(50);
  const Mixture m = random_mixture(6, 3, 17);
  const NoiseStream rng(3);
  for (std::uint32_t p = 0; p < 40; ++p) {
    const int t = 1 + static_cast<int>(p % 50);
    const Tensor x = rng.normal_tensor({6}, StreamTag::kTest, p, 7);
    const Mixture pt = m.diffused(s.alpha_bar(t));
    Eigen::VectorXd fd(6);
    const double h = 1e-4;
    for (Index i = 0; i < 6; ++i) {
      Eigen::VectorXd up = x.values(), dn = x.values();
      up(i) += h;
      dn(i) -= h;
      fd(i) = (pt.log_density(up) - pt.log_density(dn)) / (2 * h);
    }
    fd *= -std::sqrt(1.0 - s.alpha_bar(t));
    const Tensor eps = mixture_eps(x, t, m, s);
    EXPECT_LE((eps.values() - fd).norm(), 1e-5 * fd.norm()) << "probe " << p;
  }
}

TEST(GmmEps, MonteCarloPosteriorMean) {
  // Self-normalized importance sampling of E[eps | x_t] with x0 ~ prior.
  const NoiseSchedule s = build_default_schedule(50);
  const int t = 25;
  const double a = s.alpha_bar(t);
  const Eigen::Vector2d mu(0.5, -0.3);
  const double var = 0.8;
  const Mixture prior = Mixture::single(mu, var);
  const Eigen::Vector2d xt(0.9, 0.1);
  const NoiseStream rng(99);
  const int n = 100000;
  Eigen::ArrayXd logw(n);
  Eigen::MatrixXd eps(2, n);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector2d x0;
    x0(0) = mu(0) + std::sqrt(var) * rng.normal(StreamTag::kTest, 0, 0, 2ull * i);
    x0(1) = mu(1) + std::sqrt(var) * rng.normal(StreamTag::kTest, 0, 0, 2ull * i + 1);
    eps.col(i) = (xt - std::sqrt(a) * x0) / std::sqrt(1 - a);
    logw(i) = -0.5 * eps.col(i).squaredNorm();
  }
  const Eigen::ArrayXd w = (logw - logw.maxCoeff()).exp();
  const double wsum = w.sum();
  const Eigen::Vector2d est = eps * w.matrix() / wsum;
  const Tensor exact = mixture_eps(Tensor({2}, xt), t, prior, s);
  for (Index d = 0; d < 2; ++d) {
    const Eigen::ArrayXd dev = eps.row(d).array().transpose() - est(d);
    const double se = std::sqrt((w.square() * dev.square()).sum()) / wsum;
    EXPECT_LE(std::abs(est(d) - exact[d]), 3.0 * se) << "dim " << d;
  }
}

TEST(GmmEps, ErrorsAreSignalled) {
  const NoiseSchedule s = build_default_schedule(50);
  const Mixture m = Mixture::single(Eigen::VectorXd::Zero(2), 1.0);
  const Tensor bad = Tensor::from_values({2}, {std::nan(""), 0.0});
  EXPECT_THROW(mixture_eps(bad, 3, m, s), std::domain_error);
  EXPECT_THROW(mixture_eps(Tensor({3}), 3, m, s), std::invalid_argument);
}

TEST(ParzenEps, SingletonDataset) {
  const NoiseSchedule s = build_default_schedule(50);
  const Tensor x0 = Tensor::from_values({2}, {0.2, 0.7});
  const Tensor x = Tensor::from_values({2}, {-0.4, 1.1});
  const std::vector<Tensor> data{x0};
  const Tensor eps = parzen_eps(x, 12, data, s);
  const double a = s.alpha_bar(12);
  for (Index i = 0; i < 2; ++i) {
    EXPECT_NEAR(eps[i], (x[i] - std::sqrt(a) * x0[i]) / std::sqrt(1 - a), 1e-13);
  }
}

TEST(ParzenEps, EquidistantPair) {
  const NoiseSchedule s = build_default_schedule(50);
  const double a = s.alpha_bar(30);
  const Tensor pa = Tensor::from_values({2}, {1.0, 0.0});
  const Tensor pb = Tensor::from_values({2}, {-1.0, 0.0});
  // x on the perpendicular bisector of sqrt(a) pa and sqrt(a) pb.
  const Tensor x = Tensor::from_values({2}, {0.0, 0.6});
  const std::vector<Tensor> data{pa, pb};
  const Tensor eps = parzen_eps(x, 30, data, s);
  EXPECT_NEAR(eps[0], 0.0, 1e-15);
  EXPECT_NEAR(eps[1], 0.6 / std::sqrt(1 - a), 1e-13);
}

TEST(ParzenEps, ConvergesToGaussianDenoiser) {
  const NoiseSchedule s = build_default_schedule(50);
  const Eigen::Vector2d mu(0.3, -0.2);
  const double var = 0.5;
  const NoiseStream rng(5);
  std::vector<Tensor> data;
  for (std::uint32_t i = 0; i < 10000; ++i) {
    Tensor z = rng.normal_tensor({2}, StreamTag::kTest, i, 3);
    data.push_back(z.with_values(mu + std::sqrt(var) * z.values()));
  }
  const Mixture prior = Mixture::single(mu, var);
  double sq = 0.0;
  int count = 0;
  for (int t : {10, 25, 40}) {
    for (std::uint32_t p = 0; p < 10; ++p) {
      const Tensor x = rng.normal_tensor({2}, StreamTag::kTest, 100000 + p, 0);
      sq += (parzen_eps(x, t, data, s).values() - mixture_eps(x, t, prior, s).values())
                .squaredNorm();
      count += 2;
    }
  }
  EXPECT_LE(std::sqrt(sq / count), 0.05);
}

TEST(ParzenEps, Errors) {
  const NoiseSchedule s = build_schedule(1, 1e-300, 1e-300);
  const std::vector<Tensor> data{Tensor({2})};
  EXPECT_THROW(parzen_eps(Tensor({2}), 1, data, s), std::domain_error);
  const NoiseSchedule ok = build_default_schedule(50);
  EXPECT_THROW(parzen_eps(Tensor({2}), 1, std::span<const Tensor>(), ok),
               std::invalid_argument);
}

TEST(MeasureC2, ZeroDenoiserAndFormulaBound) {
  const NoiseSchedule s = build_default_schedule(50);
  const std::vector<Probe> probes{{Tensor::from_values({2}, {3.0, 4.0}), 5, Condition()},
                                  {Tensor::from_values({2}, {-1.0, 0.5}), 40, Condition()}};
  EXPECT_EQ(measure_c2(ZeroDenoiser(), probes), 0.0);
  const GmmModel m =
      GmmModel::single_class({2}, 0, Mixture::single(Eigen::VectorXd::Zero(2), 1.0));
  const GmmDenoiser d(m, s);
  const double bound = std::sqrt(1.0 - s.alpha_bar(40)) * 5.0;
  EXPECT_LE(measure_c2(d, probes), bound + 1e-12);
  EXPECT_THROW(measure_c2(d, std::span<const Probe>()), std::invalid_argument);
}

TEST(MeasureC2, ToyDomainRecordedConstant) {
  // 40 constant images in [-1, 1] times even steps 2..50 under class 1 at
  // severity 0.5; maximum evaluated independently in numpy.
  const auto spec = toy::DomainSpec::default_spec();
  const GmmModel m = toy::build_domain(spec);
  const NoiseSchedule s = build_default_schedule(50);
  const GmmDenoiser d(m, s);
  std::vector<Probe> probes;
  for (int i = 0; i < 40; ++i) {
    const double c = -1.0 + 2.0 * i / 39.0;
    for (int t = 2; t <= 50; t += 2) {
      probes.push_back({Tensor::constant(spec.plane(), c), t, Condition(1, 0.5)});
    }
  }
  ASSERT_EQ(probes.size(), 1000u);
  EXPECT_NEAR(measure_c2(d, probes), 145.7082537787953, 1e-9);
}

TEST(ProbeRecorder, RecordsEveryCall) {
  const NoiseSchedule s = build_default_schedule(50);
  const GmmModel m =
      GmmModel::single_class({2}, 0, Mixture::single(Eigen::VectorXd::Zero(2), 1.0));
  const GmmDenoiser d(m, s);
  const ProbeRecorder rec(d);
  const Tensor x = Tensor::from_values({2}, {1.0, 1.0});
  ddim_chain(x, 5, rec, Condition(), s);
  ASSERT_EQ(rec.probes().size(), 5u);
  EXPECT_EQ(rec.probes().front().t, 5);
  EXPECT_EQ(rec.probes().back().t, 1);
  EXPECT_EQ(rec.probes().front().x, x);
}

}  // namespace
}  // namespace mvg
