#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kls/channels.hpp"
#include "kls/errors.hpp"
#include "kls/probkit.hpp"
#include "random_models.hpp"

using namespace kls;
using kls::testing::random_pd_channel;
using kls::testing::separate_bsc_system;

TEST(Channels, BscAndCascade) {
  const auto c = cascade(bsc(0.06), bsc(0.1));
  EXPECT_NEAR(c(0, 1), binary_convolution(0.06, 0.1), 1e-15);
  EXPECT_NEAR(c(1, 1), 1.0 - binary_convolution(0.06, 0.1), 1e-15);
  EXPECT_THROW(bsc(1.2), DomainError);
  EXPECT_THROW(cascade(bsc(0.1), ConditionalPmf::identity(3)), UsageError);
}

TEST(Channels, AwgnToBsc) {
  EXPECT_NEAR(awgn_to_bsc(3.83), 0.060, 0.001);
  EXPECT_NEAR(awgn_to_bsc(0.0), q_function(1.0), 1e-15);
  EXPECT_LT(awgn_to_bsc(10.0), awgn_to_bsc(3.0));
  EXPECT_THROW(awgn_to_bsc(std::nan("")), DomainError);
}

TEST(Channels, SeparateChannelJoint) {
  const auto sys = separate_bsc_system(0.06, 1);
  const auto j = entity_joint(sys, 0);
  EXPECT_NEAR(mutual_information(j, {"Xt"}, {"Y"}), 1.0 - binary_entropy(0.1128), 1e-12);
  EXPECT_NEAR(conditional_mutual_information(j, {"Xt"}, {"Y"}, {"X"}), 0.0, 1e-12);
  const auto ju = entity_joint(sys, 0, AuxiliaryChannel{bsc(0.2)});
  EXPECT_NEAR(mutual_information(ju, {"U"}, {"X"}), 1.0 - binary_entropy(binary_convolution(0.2, 0.06)), 1e-12);
  EXPECT_THROW(entity_joint(sys, 0, AuxiliaryChannel::identity(3)), UsageError);
  EXPECT_THROW(sys.entity(1), UsageError);
}

TEST(Channels, SimplexGridCounts) {
  EXPECT_EQ(simplex_grid(3, 4).size(), 15u);
  for (const auto& p : simplex_grid(3, 5)) {
    double s = 0.0;
    for (double v : p) s += v;
    EXPECT_NEAR(s, 1.0, 1e-15);
  }
}

TEST(Channels, PhysicallyDegradedDetection) {
  std::mt19937_64 rng(5);
  for (int it = 0; it < 20; ++it) {
    EntitySystem sys(Pmf(kls::testing::random_simplex(rng, 3)), {random_pd_channel(rng, 3, 2, 3)});
    EXPECT_TRUE(is_physically_degraded(sys, 0));
    EXPECT_EQ(classify(sys, 0, 8).kind, ChannelKind::physically_degraded);
    const auto ln = certify_less_noisy_strong_privacy(sys, 0, 8);
    EXPECT_EQ(ln.kind, ChannelKind::less_noisy_strong_privacy);
    EXPECT_GE(ln.min_gap, -1e-9);
  }
  EXPECT_FALSE(is_physically_degraded(separate_bsc_system(0.06, 1), 0));
}

TEST(Channels, SeparateBscIsNeitherWithWitness) {
  const auto c = classify(separate_bsc_system(0.06, 1), 0, 10);
  EXPECT_EQ(c.kind, ChannelKind::neither);
  ASSERT_TRUE(c.witness.has_value());
  EXPECT_GT(c.witness_info_x, c.witness_info_y);
  EXPECT_LT(c.min_gap, 0.0);
  // The gap is attained by the identity aux: I(X~;Y) - I(X~;X).
  EXPECT_NEAR(c.witness_info_x - c.witness_info_y,
              binary_entropy(0.1128) - binary_entropy(0.06), 1e-6);
}

TEST(Channels, LessNoisyCaps) {
  EXPECT_THROW(certify_less_noisy_strong_privacy(separate_bsc_system(0.1, 1), 0, 0), UsageError);
  EXPECT_THROW(certify_less_noisy_strong_privacy(separate_bsc_system(0.1, 1), 0, 5000, 8), ResourceError);
}
