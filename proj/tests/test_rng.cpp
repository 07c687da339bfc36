#include <gtest/gtest.h>

#include <set>

#include <pdisorder/rng.hpp>

using namespace pdisorder;

// Known-answer vectors from the Random123 distribution (philox4x32_10).
TEST(Rng, PhiloxKnownAnswers) {
    auto a = philox4x32({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(a, (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
    auto b = philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
    EXPECT_EQ(b, (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
    auto c = philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
    EXPECT_EQ(c, (std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
    PathRng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
    for (int k = 0; k < 10; ++k) {
        double x = a.uniform();
        EXPECT_EQ(x, b.uniform());
        EXPECT_NE(x, c.uniform());
        EXPECT_NE(x, d.uniform());
    }
}

TEST(Rng, UniformMoments) {
    PathRng r(1, 0);
    const int n = 200000;
    double s = 0.0, s2 = 0.0, mn = 1.0;
    for (int k = 0; k < n; ++k) {
        double u = r.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LE(u, 1.0);
        s += u;
        s2 += u * u;
        mn = std::min(mn, u);
    }
    EXPECT_NEAR(s / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
    EXPECT_NEAR(s2 / n, 1.0 / 3, 4 * std::sqrt(4.0 / 45 / n));
}

TEST(Rng, ExponentialMean) {
    PathRng r(9, 1);
    const int n = 200000;
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += r.exponential(2.0);
    EXPECT_NEAR(s / n, 0.5, 4 * 0.5 / std::sqrt(n));
}
