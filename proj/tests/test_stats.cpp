#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bnncim/errors.hpp"
#include "bnncim/rng.hpp"
#include "bnncim/stats.hpp"

using namespace bnncim;
using namespace bnncim::stats;

TEST_CASE("summarize") {
    const std::vector<double> xs = {3.0, -1.0, 2.0, 2.0};
    const SampleSummary s = summarize(xs);
    CHECK(s.n == 4);
    CHECK(s.mean == doctest::Approx(1.5));
    CHECK(s.min == -1.0);
    CHECK(s.max == 3.0);
    CHECK(s.sd == doctest::Approx(std::sqrt((2.25 + 6.25 + 0.25 + 0.25) / 3.0)));
    CHECK(s.min <= s.mean);
    CHECK(s.mean <= s.max);
    CHECK_THROWS_AS(summarize(std::vector<double>{}), degenerate_input);
    CHECK(summarize(std::vector<double>{5.0}).sd == 0.0);
}

TEST_CASE("normal_quantile") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
    CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-9));
    CHECK(normal_quantile(0.841344746068543) == doctest::Approx(1.0).epsilon(1e-9));
    // Deep tails stay sane after the Halley refinement.
    CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-8));
    CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("qq_rvalue") {
    SUBCASE("samples equal to the plotting quantiles give r = 1") {
        const std::size_t n = 200;
        std::vector<double> xs(n);
        for (std::size_t i = 0; i < n; ++i)
            xs[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) /
                                    (static_cast<double>(n) + 0.25));
        CHECK(qq_rvalue(xs) == doctest::Approx(1.0).epsilon(1e-12));

        // Input order is irrelevant: the plot sorts internally.
        std::reverse(xs.begin(), xs.end());
        std::swap(xs[3], xs[77]);
        CHECK(qq_rvalue(xs) == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("affine transforms leave r unchanged") {
        RngStream st(5, 0);
        std::vector<double> xs(500), ys(500);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            xs[i] = st.gauss();
            ys[i] = -3.0 + 2.5 * xs[i];
        }
        CHECK(qq_rvalue(ys) == doctest::Approx(qq_rvalue(xs)).epsilon(1e-12));
    }

    SUBCASE("gaussian data correlates, uniform data does not") {
        RngStream st(7, 0);
        std::vector<double> g(2500), u(2500);
        for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] = st.gauss();
            u[i] = st.uniform01();
        }
        CHECK(qq_rvalue(g) >= 0.996);
        CHECK(qq_rvalue(u) < 0.99);
    }

    SUBCASE("degenerate input") {
        CHECK_THROWS_AS(qq_rvalue(std::vector<double>{1.0, 2.0}), degenerate_input);
        CHECK_THROWS_AS(qq_rvalue(std::vector<double>(10, 3.0)), degenerate_input);
    }
}

TEST_CASE("predictive_entropy") {
    CHECK(predictive_entropy(std::vector<double>{0.5, 0.5}) ==
          doctest::Approx(0.693147180559945).epsilon(1e-12));
    CHECK(predictive_entropy(std::vector<double>{1.0, 0.0}) == 0.0);
    CHECK(predictive_entropy(std::vector<double>{0.9, 0.1}) ==
          doctest::Approx(0.325082973391448).epsilon(1e-12));

    SUBCASE("uniform is the unique maximizer") {
        const double h_max = std::log(4.0);
        CHECK(predictive_entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}) ==
              doctest::Approx(h_max).epsilon(1e-12));
        RngStream st(11, 0);
        for (int trial = 0; trial < 200; ++trial) {
            double raw[4], sum = 0;
            for (double& r : raw) {
                r = 0.05 + st.uniform01();
                sum += r;
            }
            std::vector<double> p{raw[0] / sum, raw[1] / sum, raw[2] / sum, raw[3] / sum};
            double dist = 0;
            for (double v : p) dist = std::max(dist, std::abs(v - 0.25));
            const double h = predictive_entropy(p);
            CHECK(h <= h_max + 1e-12);
            if (dist > 0.01) CHECK(h < h_max - 1e-9);
        }
    }

    SUBCASE("bad distributions are rejected") {
        CHECK_THROWS_AS(predictive_entropy(std::vector<double>{0.7, 0.7}),
                        std::invalid_argument);
        CHECK_THROWS_AS(predictive_entropy(std::vector<double>{1.2, -0.2}),
                        std::invalid_argument);
        CHECK_THROWS_AS(predictive_entropy(std::vector<double>{}), std::invalid_argument);
    }
}

TEST_CASE("ece") {
    SUBCASE("confident and right means zero error") {
        std::vector<Prediction> preds(50, {1.0, true});
        const CalibrationReport rep = ece(preds, 15);
        CHECK(rep.ece == 0.0);
        double wsum = 0;
        for (const auto& b : rep.bins) wsum += b.weight;
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("single-bin hand value") {
        std::vector<Prediction> preds;
        for (int i = 0; i < 10; ++i) preds.push_back({0.8, i < 6});
        const CalibrationReport rep = ece(preds, 1);
        CHECK(rep.ece == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(rep.bins[0].accuracy == doctest::Approx(0.6));
        CHECK(rep.bins[0].mean_confidence == doctest::Approx(0.8));
    }

    SUBCASE("empty bins contribute nothing: shared-interval invariance") {
        // All confidences inside [0.8, 0.8667), one bin for both widths.
        std::vector<Prediction> preds;
        RngStream st(3, 0);
        for (int i = 0; i < 40; ++i)
            preds.push_back({0.805 + 0.06 * st.uniform01(), (i % 3) != 0});
        CHECK(ece(preds, 10).ece == doctest::Approx(ece(preds, 15).ece).epsilon(1e-12));
    }

    SUBCASE("per-bin agreement gives zero") {
        // Accuracy equal to mean confidence in every occupied bin.
        std::vector<Prediction> preds;
        for (int i = 0; i < 4; ++i) preds.push_back({0.75, i < 3}); // bin acc 0.75
        for (int i = 0; i < 2; ++i) preds.push_back({0.5, i < 1});  // bin acc 0.5
        CHECK(ece(preds, 4).ece == 0.0);
    }

    SUBCASE("rejects bad inputs") {
        std::vector<Prediction> preds(3, {0.5, true});
        CHECK_THROWS_AS(ece(preds, 0), std::invalid_argument);
        preds.push_back({1.5, true});
        CHECK_THROWS_AS(ece(preds, 10), std::invalid_argument);
    }
}

TEST_CASE("accuracy_recovery") {
    std::vector<ScoredOutcome> two_cluster;
    for (int i = 0; i < 8; ++i) two_cluster.push_back({0.1, true});
    for (int i = 0; i < 2; ++i) two_cluster.push_back({0.9, false});

    SUBCASE("infinite threshold defers nothing") {
        const RecoveryPoint r =
            accuracy_recovery(two_cluster, std::numeric_limits<double>::infinity());
        CHECK(r.retained_fraction == 1.0);
        REQUIRE(r.accuracy_delta.has_value());
        CHECK(*r.accuracy_delta == 0.0);
    }

    SUBCASE("all-correct sets never move") {
        std::vector<ScoredOutcome> all(20);
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = {0.05 * double(i), true};
        for (double thr : {0.0, 0.3, 0.7, 2.0}) {
            const RecoveryPoint r = accuracy_recovery(all, thr);
            if (r.accuracy_delta) CHECK(*r.accuracy_delta == 0.0);
        }
    }

    SUBCASE("two-cluster hand value") {
        const RecoveryPoint r = accuracy_recovery(two_cluster, 0.5);
        CHECK(r.retained_fraction == doctest::Approx(0.8));
        REQUIRE(r.accuracy_delta.has_value());
        CHECK(*r.accuracy_delta == doctest::Approx(0.2).epsilon(1e-12));
    }

    SUBCASE("empty retention is a signal, not an error") {
        const RecoveryPoint r = accuracy_recovery(two_cluster, 0.01);
        CHECK(r.retained_fraction == 0.0);
        CHECK_FALSE(r.accuracy_delta.has_value());
    }

    SUBCASE("delta is monotone until retention empties") {
        double prev = -1.0;
        for (double thr = 0.85; thr >= 0.05; thr -= 0.05) {
            const RecoveryPoint r = accuracy_recovery(two_cluster, thr);
            if (!r.accuracy_delta) break;
            CHECK(*r.accuracy_delta >= prev);
            prev = *r.accuracy_delta;
        }
        CHECK(prev >= 0.2 - 1e-12);
    }

    SUBCASE("NaN threshold is rejected") {
        CHECK_THROWS_AS(
            accuracy_recovery(two_cluster, std::numeric_limits<double>::quiet_NaN()),
            std::invalid_argument);
        CHECK_THROWS_AS(accuracy_recovery(std::vector<ScoredOutcome>{}, 0.5),
                        degenerate_input);
    }
}

TEST_CASE("histogram") {
    const std::vector<double> xs = {0.0, 0.1, 0.5, 0.9, 1.0, 1.0};
    const auto bins = histogram(xs, 4);
    REQUIRE(bins.size() == 4);
    std::size_t total = 0;
    for (const auto& b : bins) total += b.count;
    CHECK(total == xs.size());
    CHECK(bins.front().lo == 0.0);
    CHECK(bins.back().hi == 1.0);
    CHECK(bins.front().count == 2);
    // 0.9 plus the two max values: the max lands in the last bin, not past it.
    CHECK(bins.back().count == 3);

    const auto flat = histogram(std::vector<double>(7, 2.0), 3);
    CHECK(flat[0].count == 7);
    CHECK_THROWS_AS(histogram(xs, 0), std::invalid_argument);
}
