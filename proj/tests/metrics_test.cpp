#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bridgesim/metrics.hpp"
#include "bridgesim/rng.hpp"

using namespace bridgesim;

namespace {

std::vector<std::vector<double>> series(const std::vector<double>& values) {
    std::vector<std::vector<double>> out;
    for (double v : values) out.push_back({v});
    return out;
}

}  // namespace

TEST_CASE("tracking_std basics") {
    auto ref = series({1, 2, 3, 4});

    SUBCASE("identical series give zero") {
        auto rep = tracking_std(ref, ref, "x");
        CHECK(rep.std_dev[0] == 0.0);
        CHECK(rep.max_abs[0] == 0.0);
    }
    SUBCASE("constant offset gives zero std but nonzero max") {
        auto meas = series({2, 3, 4, 5});
        auto rep = tracking_std(ref, meas, "x");
        CHECK(rep.std_dev[0] == doctest::Approx(0.0));
        CHECK(rep.max_abs[0] == doctest::Approx(1.0));
    }
    SUBCASE("alternating +-1 error has std 1") {
        auto meas = series({2, 1, 4, 3});
        auto rep = tracking_std(ref, meas, "x");
        CHECK(rep.std_dev[0] == doctest::Approx(1.0));
    }
    SUBCASE("length mismatch throws") {
        CHECK_THROWS_AS(tracking_std(ref, series({1, 2}), "x"), std::invalid_argument);
    }
}

TEST_CASE("tracking_std scale equivariance property") {
    Rng rng(17);
    for (int it = 0; it < 20; ++it) {
        std::vector<double> r, e;
        for (int i = 0; i < 100; ++i) {
            r.push_back(uniform(rng, -10, 10));
            e.push_back(uniform(rng, -1, 1));
        }
        std::vector<double> m1, m2;
        for (int i = 0; i < 100; ++i) {
            m1.push_back(r[i] + e[i]);
            m2.push_back(r[i] + 2.0 * e[i]);
        }
        auto rep1 = tracking_std(series(r), series(m1), "x");
        auto rep2 = tracking_std(series(r), series(m2), "x");
        CHECK(rep2.std_dev[0] == doctest::Approx(2.0 * rep1.std_dev[0]));
    }
}

TEST_CASE("histogram bins and mass") {
    SUBCASE("two-point mixture lands in two bins") {
        std::vector<double> samples(9, 22.0);
        samples.push_back(27.0);
        auto h = histogram(samples, 1.0);
        CHECK(h.total == 10);
        CHECK(h.nonzero_bins() == 2);
        CHECK(h.counts.front() == 9);
        CHECK(h.counts.back() == 1);
        CHECK(h.bin_lo(0) == doctest::Approx(22.0));
    }
    SUBCASE("empty sample set") {
        auto h = histogram({}, 1.0);
        CHECK(h.total == 0);
        CHECK(h.counts.empty());
    }
    SUBCASE("mass conserved under bin refinement") {
        Rng rng(3);
        std::vector<double> samples;
        for (int i = 0; i < 1000; ++i) samples.push_back(uniform(rng, 0, 50));
        auto coarse = histogram(samples, 2.0);
        auto fine = histogram(samples, 0.5);
        CHECK(coarse.total == fine.total);
        // Each coarse bin is exactly the sum of its four refinements.
        for (size_t i = 0; i < coarse.counts.size(); ++i) {
            const int64_t abs_bin = coarse.first_bin + static_cast<int64_t>(i);
            uint64_t sum = 0;
            for (int64_t f = abs_bin * 4; f < (abs_bin + 1) * 4; ++f) {
                const int64_t idx = f - fine.first_bin;
                if (idx >= 0 && idx < static_cast<int64_t>(fine.counts.size()))
                    sum += fine.counts[static_cast<size_t>(idx)];
            }
            CHECK(sum == coarse.counts[i]);
        }
    }
}

TEST_CASE("fraction_at_least") {
    std::vector<double> rel = {0, 0, 0, 0, 0, 0, 0, 0, 0, 5.0};
    CHECK(fraction_at_least(rel, 5.0) == doctest::Approx(0.1));
    CHECK(fraction_at_least({}, 1.0) == 0.0);
}

TEST_CASE("value_counts merges within tolerance") {
    auto vc = value_counts({25.0, 30.0, 25.0, 25.0 + 1e-12, 30.0}, 1e-9);
    REQUIRE(vc.size() == 2);
    CHECK(vc[0].first == doctest::Approx(25.0));
    CHECK(vc[0].second == 3);
    CHECK(vc[1].second == 2);
}

TEST_CASE("success_rate groups by frequency") {
    std::vector<GoalRecord> log;
    for (int i = 0; i < 10; ++i) log.push_back({200.0, false});
    for (int i = 0; i < 10; ++i) log.push_back({100.0, true});
    for (int i = 0; i < 4; ++i) log.push_back({50.0, i % 2 == 0});
    auto rates = success_rate(log);
    REQUIRE(rates.size() == 3);
    CHECK(rates[0].rate_hz == 50.0);
    CHECK(rates[0].rate() == doctest::Approx(0.5));
    CHECK(rates[1].rate_hz == 100.0);
    CHECK(rates[1].rate() == 1.0);
    CHECK(rates[2].rate_hz == 200.0);
    CHECK(rates[2].rate() == 0.0);
}
