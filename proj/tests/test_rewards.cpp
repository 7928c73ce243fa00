#include "doctest.h"

#include "atsc/errors.hpp"
#include "atsc/rewards.hpp"

#include <cmath>
#include <random>

using namespace atsc;

namespace {

// Direct evaluation of the entropy weight method in long double.
std::array<long double, 3> entropy_oracle(const std::vector<std::array<long double, 3>> &x) {
    const long double eps = 1e-12L;
    const long double n = static_cast<long double>(x.size());
    std::array<long double, 3> d{};
    long double sum_d = 0.0L;
    for (int j = 0; j < 3; ++j) {
        long double col = 0.0L;
        for (const auto &r : x)
            col += r[j] + eps;
        long double h = 0.0L;
        for (const auto &r : x) {
            long double p = (r[j] + eps) / col;
            h += p * std::log(p);
        }
        d[j] = 1.0L + h / std::log(n);
        sum_d += d[j];
    }
    for (auto &v : d)
        v /= sum_d;
    return d;
}

} // namespace

TEST_CASE("raw_rewards are negated increments") {
    auto r = raw_rewards({5.0, 100.0, 500.0}, {5.0, 120.0, 530.0});
    CHECK(r[0] == 0.0);
    CHECK(r[1] == -20.0);
    CHECK(r[2] == -30.0);
}

TEST_CASE("normalize") {
    SUBCASE("midpoint of the window") {
        NormalizationWindow w(10);
        w.absorb(-10.0);
        w.absorb(0.0);
        CHECK(normalize(-5.0, w) == 0.5);
        CHECK(w.size() == 3);
    }
    SUBCASE("window max maps to one") {
        NormalizationWindow w(10);
        w.absorb(-3.0);
        w.absorb(2.0);
        CHECK(normalize(2.0, w) == 1.0);
    }
    SUBCASE("constant and empty windows give one half") {
        NormalizationWindow w(10);
        CHECK(normalize(4.0, w) == 0.5);
        CHECK(normalize(4.0, w) == 0.5);
    }
    SUBCASE("out-of-range values clamp") {
        NormalizationWindow w(10);
        w.absorb(0.0);
        w.absorb(1.0);
        CHECK(normalize(7.0, w) == 1.0);
        CHECK(normalize(-7.0, w) == 0.0);
    }
    SUBCASE("capacity is respected") {
        NormalizationWindow w(3);
        for (int i = 0; i < 10; ++i)
            w.absorb(i);
        CHECK(w.size() == 3);
        CHECK(w.min() == 7.0);
    }
}

TEST_CASE("entropy_weights") {
    SUBCASE("constant column carries no weight") {
        std::vector<Channels> s{{0.1, 0.5, 0.2}, {0.9, 0.5, 0.4}, {0.3, 0.5, 0.8}};
        auto w = entropy_weights(s);
        CHECK(std::abs(w.efficiency) < 1e-9);
        CHECK(w.safety + w.efficiency + w.carbon == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("identical columns share equally") {
        std::vector<Channels> s{{0.1, 0.1, 0.1}, {0.7, 0.7, 0.7}, {0.4, 0.4, 0.4}};
        auto w = entropy_weights(s);
        CHECK(w.safety == doctest::Approx(1.0 / 3).epsilon(1e-12));
        CHECK(w.efficiency == doctest::Approx(1.0 / 3).epsilon(1e-12));
        CHECK(w.carbon == doctest::Approx(1.0 / 3).epsilon(1e-12));
    }
    SUBCASE("4x3 matrix against direct evaluation") {
        std::vector<Channels> s{{.1, .5, .9}, {.2, .5, .1}, {.3, .5, .5}, {.4, .5, .3}};
        auto oracle = entropy_oracle({{.1L, .5L, .9L}, {.2L, .5L, .1L}, {.3L, .5L, .5L}, {.4L, .5L, .3L}});
        auto w = entropy_weights(s);
        CHECK(std::abs(w.efficiency) < 1e-9);
        CHECK(std::abs(w.safety - static_cast<double>(oracle[0])) < 1e-9);
        CHECK(std::abs(w.carbon - static_cast<double>(oracle[2])) < 1e-9);
        // Frozen from the oracle: the skewed third column dominates.
        CHECK(w.safety == doctest::Approx(0.3214323817).epsilon(1e-9));
        CHECK(w.carbon == doctest::Approx(0.6785676183).epsilon(1e-9));
    }
    SUBCASE("all-constant columns fall back") {
        std::vector<Channels> s{{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}};
        RewardWeights fb{0.2, 0.3, 0.5};
        auto w = entropy_weights(s, fb);
        CHECK(w.safety == 0.2);
        CHECK(w.efficiency == 0.3);
        CHECK(w.carbon == 0.5);
    }
    CHECK_THROWS_AS(entropy_weights({{0.1, 0.2, 0.3}}), InsufficientSamples);
}

TEST_CASE("entropy weights stay on the simplex") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> n(2, 60);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Channels> s(static_cast<std::size_t>(n(rng)));
        for (auto &row : s)
            row = {u(rng), u(rng) * u(rng), u(rng) > 0.5 ? 1.0 : 0.0};
        auto w = entropy_weights(s);
        CHECK(w.safety + w.efficiency + w.carbon == doctest::Approx(1.0).epsilon(1e-12));
        for (double x : w.as_array())
            CHECK((x >= 0.0 && x <= 1.0));
    }
}

TEST_CASE("combine") {
    RewardWeights w;
    CHECK(combine({1.0, 1.0, 1.0}, w) == 1.0);
    CHECK(combine({1.0, 0.0, 0.0}, w) == 0.5);
    CHECK(combine({0.37, 0.9, 0.1}, {1.0, 0.0, 0.0}) == 0.37);
}

TEST_CASE("min-max normalization is affine invariant") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> x(0.0, 3.0);
    std::uniform_real_distribution<double> scale(0.1, 20.0), shift(-50.0, 50.0);
    for (int trial = 0; trial < 20; ++trial) {
        double a = scale(rng), b = shift(rng);
        NormalizationWindow w1(40), w2(40);
        for (int k = 0; k < 200; ++k) {
            double v = x(rng);
            double n1 = normalize(v, w1);
            double n2 = normalize(a * v + b, w2);
            CHECK(n1 == doctest::Approx(n2).epsilon(1e-9));
        }
    }
}

TEST_CASE("reward model") {
    NormalizationParams p;
    p.warmup = 2;
    RewardModel m({0.5, 0.25, 0.25}, p);
    // Warm-up uses fixed scales.
    CHECK(m.scalar({0.0, 0.0, 0.0}) == 1.0);
    CHECK(m.scalar({-10.0, -100.0, -1000.0}) == 0.0);
    // Then the window spans the two warm-up samples.
    m.scalar({-5.0, -50.0, -500.0});
    CHECK(m.last_normalized()[0] == 0.5);
    CHECK(m.last_normalized()[1] == 0.5);
    CHECK(m.samples().size() == 3);
    CHECK_THROWS_AS(m.set_weights({0.5, 0.5, 0.5}), ConfigError);
    m.set_weights({0.0, 1.0, 0.0});
    CHECK(m.scalar({0.0, -50.0, 0.0}) == 0.5);
}

TEST_CASE("weights validation") {
    CHECK_NOTHROW(RewardWeights{}.validate());
    CHECK_THROWS_AS((RewardWeights{0.5, 0.5, 0.1}.validate()), ConfigError);
    CHECK_THROWS_AS((RewardWeights{1.2, -0.2, 0.0}.validate()), ConfigError);
}
