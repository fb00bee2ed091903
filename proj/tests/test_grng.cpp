#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "bnncim/counters.hpp"
#include "bnncim/errors.hpp"
#include "bnncim/grng.hpp"
#include "bnncim/rng.hpp"
#include "bnncim/stats.hpp"

using namespace bnncim;
using namespace bnncim::grng;

namespace {

// Frozen analytic values at the nominal point (1 fF, 1.2 V, 8.7 nA):
// independently hand-computed from mu = C*V/(2I), sigma^2 = mu*q/(2I).
constexpr double k_mu_nominal = 6.896551724137930e-08;
constexpr double k_sigma_branch = 7.968866872962628e-10;
constexpr double k_t_unit = 1.126967960848943e-09;

// Fitted endpoint model (1.931 us @ 301.15 K, 0.7749 us @ 333.15 K).
constexpr double k_i_cold = 3.107198342827551e-10;
constexpr double k_i_hot = 7.742934572202865e-10;
constexpr double k_alpha = 0.028533102926832;
constexpr double k_latency_50c = 1.030773755403323e-06;
constexpr double k_fold_model = 2.4919344432;
constexpr double k_fold_measured = 2.6154236428; // 515.5 ns / 197.1 ns

LatencyPoint table_endpoints[2] = {
    {301.15, 1.931e-6},
    {333.15, 0.7749e-6},
};

} // namespace

TEST_CASE("leakage current hits the reference point exactly") {
    const LeakageModel leak = nominal_leakage();
    CHECK(leak.i_0 == 8.7e-9);
    CHECK(leak.v_ref == 0.18);
    CHECK(leak.n_factor == 1.5);
    CHECK(leak.t_ref == 301.15);
    CHECK(leak.alpha == doctest::Approx(k_alpha).epsilon(1e-9));
    CHECK(leakage_current(leak, leak.v_ref, leak.t_ref) == leak.i_0);
}

TEST_CASE("leakage slope: +10 mV of gate bias multiplies the current by ~1.29") {
    const LeakageModel leak = nominal_leakage();
    const double r = leakage_current(leak, 0.19, leak.t_ref) /
                     leakage_current(leak, 0.18, leak.t_ref);
    CHECK(r == doctest::Approx(1.2929073244).epsilon(1e-9));
}

TEST_CASE("leakage error paths") {
    LeakageModel leak = nominal_leakage();
    CHECK_THROWS_AS(leakage_current(leak, 0.18, -1.0), std::invalid_argument);
    leak.i_0 = -1.0;
    CHECK_THROWS_AS(leakage_current(leak, 0.18, 300.0), std::invalid_argument);
    // Deep subthreshold underflow: the exponential rounds to zero.
    CHECK_THROWS_AS(leakage_current(nominal_leakage(), -50.0, 300.0), singularity_error);
}

TEST_CASE("nominal discharge statistics") {
    const DischargeParams d = discharge_params(nominal_physics(), GrngInstance{},
                                               nominal_leakage(), k_nominal_v_r,
                                               k_nominal_temp_k);
    CHECK(d.mu_p == doctest::Approx(k_mu_nominal).epsilon(1e-12));
    CHECK(d.sigma_p == doctest::Approx(k_sigma_branch).epsilon(1e-12));
    CHECK(d.mu_p == d.mu_n);
    CHECK(d.sigma_p == d.sigma_n);
    CHECK(d.t_unit() == doctest::Approx(k_t_unit).epsilon(1e-12));
    CHECK(nominal_t_unit() == doctest::Approx(k_t_unit).epsilon(1e-12));
    CHECK(d.width_mean() == 0.0);
    CHECK(d.offset() == 0.0);

    // 69 ns +/- 1% and differential SD inside [0.8, 1.4] ns.
    CHECK(d.mu_p == doctest::Approx(69e-9).epsilon(0.01));
    CHECK(d.t_unit() > 0.8e-9);
    CHECK(d.t_unit() < 1.4e-9);
}

TEST_CASE("doubling the leakage current halves latency and differential SD") {
    const GrngPhysics phy = nominal_physics();
    const LeakageModel leak = nominal_leakage();
    const double thermal_v =
        leak.n_factor * k_boltzmann * k_nominal_temp_k / k_elementary_charge;
    CHECK(thermal_v == doctest::Approx(0.038926648678425).epsilon(1e-9));
    const double v_r2 = k_nominal_v_r + thermal_v * std::log(2.0);

    const double i1 = leakage_current(leak, k_nominal_v_r, k_nominal_temp_k);
    const double i2 = leakage_current(leak, v_r2, k_nominal_temp_k);
    CHECK(i2 / i1 == doctest::Approx(2.0).epsilon(1e-12));

    const DischargeParams a =
        discharge_params(phy, {}, leak, k_nominal_v_r, k_nominal_temp_k);
    const DischargeParams b = discharge_params(phy, {}, leak, v_r2, k_nominal_temp_k);
    CHECK(b.mu_p == doctest::Approx(a.mu_p / 2).epsilon(1e-12));
    CHECK(b.t_unit() == doctest::Approx(a.t_unit() / 2).epsilon(1e-12));
}

TEST_CASE("static offset formulations agree") {
    const GrngPhysics phy = nominal_physics();
    const LeakageModel leak = nominal_leakage();

    SUBCASE("matched instance is exactly zero") {
        CHECK(static_offset(phy, {}, leak, k_nominal_v_r, k_nominal_temp_k) == 0.0);
    }

    SUBCASE("9.57 nA against 8.7 nA gives ~ +6.27 ns") {
        GrngInstance inst;
        inst.i_n2_scale = 1.1; // 8.7 nA * 1.1 = 9.57 nA on the N branch
        const double so = static_offset(phy, inst, leak, k_nominal_v_r, k_nominal_temp_k);
        CHECK(so == doctest::Approx(6.269592476489019e-09).epsilon(1e-9));
        const DischargeParams d =
            discharge_params(phy, inst, leak, k_nominal_v_r, k_nominal_temp_k);
        CHECK(so == doctest::Approx(d.offset()).epsilon(1e-12));
        CHECK(d.width_mean() == doctest::Approx(-so).epsilon(1e-12));
    }

    SUBCASE("swapping the branch currents negates the offset exactly") {
        GrngInstance inst{1.3, 0.8, 1.0, 1.0};
        GrngInstance swapped{0.8, 1.3, 1.0, 1.0};
        const double a = static_offset(phy, inst, leak, k_nominal_v_r, k_nominal_temp_k);
        const double b = static_offset(phy, swapped, leak, k_nominal_v_r, k_nominal_temp_k);
        CHECK(a == -b);
    }
}

TEST_CASE("pulse sampling: reproducibility, shape, and moments") {
    const GrngPhysics phy = nominal_physics();
    const LeakageModel leak = nominal_leakage();

    SUBCASE("identical streams replay identical pulses") {
        RngStream a(9, 9), b(9, 9);
        for (int i = 0; i < 100; ++i) {
            const PulseSample s = sample_pulse(phy, {}, leak, 0.18, 301.15, a);
            const PulseSample t = sample_pulse(phy, {}, leak, 0.18, 301.15, b);
            CHECK(s.t_p == t.t_p);
            CHECK(s.t_n == t.t_n);
        }
    }

    SUBCASE("per-sample structure and ledger bump") {
        WorkloadCounts counts;
        RngStream st(1, 2);
        const PulseSample s = sample_pulse(phy, {}, leak, 0.18, 301.15, st, &counts);
        CHECK(s.signed_width == s.t_n - s.t_p);
        CHECK(s.latency == std::max(s.t_p, s.t_n));
        CHECK_FALSE(s.censored);
        CHECK(counts.snapshot().grng_samples == 1);
    }

    SUBCASE("matched-instance Monte Carlo moments") {
        const std::size_t n = 100000;
        RngStream st(1234, 0);
        std::vector<double> widths(n);
        bool latency_ok = true;
        for (std::size_t i = 0; i < n; ++i) {
            const PulseSample s = sample_pulse(phy, {}, leak, 0.18, 301.15, st);
            widths[i] = s.signed_width;
            latency_ok = latency_ok && s.latency >= std::abs(s.signed_width);
        }
        CHECK(latency_ok);
        const auto sum = stats::summarize(widths);
        CHECK(std::abs(sum.mean) < 4.0 * k_t_unit / std::sqrt(static_cast<double>(n)));
        CHECK(sum.sd == doctest::Approx(k_t_unit).epsilon(0.02));
        CHECK(stats::qq_rvalue(widths) > 0.995);
    }
}

TEST_CASE("epsilon normalization") {
    const GrngPhysics phy = nominal_physics();
    const LeakageModel leak = nominal_leakage();

    SUBCASE("matched instance is unit variance") {
        const std::size_t n = 100000;
        RngStream st(77, 0);
        double sum = 0, sum2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = sample_epsilon(phy, {}, leak, 0.18, 301.15, st);
            sum += e;
            sum2 += e * e;
        }
        const double mean = sum / static_cast<double>(n);
        const double var = sum2 / static_cast<double>(n) - mean * mean;
        CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
        CHECK(var > 0.98);
        CHECK(var < 1.02);
    }

    SUBCASE("value is the width in t_unit steps") {
        RngStream a(5, 5), b(5, 5);
        EpsilonOptions opt;
        opt.t_unit = nominal_t_unit();
        const PulseSample s = sample_pulse(phy, {}, leak, 0.18, 301.15, a);
        const double e = sample_epsilon(phy, {}, leak, 0.18, 301.15, b, opt);
        CHECK(e == s.signed_width / nominal_t_unit());
    }

    SUBCASE("a +6.27 ns mean width reads as ~ +5.57 under the shared t_unit") {
        GrngInstance inst;
        inst.i_n1_scale = 1.1; // P branch fires early: mean width t_n - t_p > 0
        const DischargeParams d =
            discharge_params(phy, inst, leak, k_nominal_v_r, k_nominal_temp_k);
        CHECK(d.width_mean() == doctest::Approx(6.269592476489019e-09).epsilon(1e-9));

        EpsilonOptions opt;
        opt.t_unit = nominal_t_unit();
        const double expected = d.width_mean() / nominal_t_unit();
        CHECK(expected == doctest::Approx(5.57).epsilon(0.002));

        const std::size_t n = 100000;
        RngStream st(31, 0);
        double sum = 0;
        for (std::size_t i = 0; i < n; ++i)
            sum += sample_epsilon(phy, inst, leak, 0.18, 301.15, st, opt);
        CHECK(sum / static_cast<double>(n) ==
              doctest::Approx(expected).epsilon(4.0 * 0.001 / expected));

        // Folding the mean width into the calibration offset recenters it.
        opt.calibration_offset_s = d.width_mean();
        RngStream st2(32, 0);
        double csum = 0;
        for (std::size_t i = 0; i < n; ++i)
            csum += sample_epsilon(phy, inst, leak, 0.18, 301.15, st2, opt);
        CHECK(std::abs(csum / static_cast<double>(n)) <
              4.0 / std::sqrt(static_cast<double>(n)));
    }

    SUBCASE("zero t_unit is a singularity, not a NaN") {
        RngStream st(1, 1);
        EpsilonOptions opt;
        opt.t_unit = 0.0;
        CHECK_THROWS_AS(sample_epsilon(phy, {}, leak, 0.18, 301.15, st, opt),
                        singularity_error);
    }
}

TEST_CASE("censoring marks sub-floor widths and keeps the raw times") {
    PulseSample s;
    s.t_p = 10e-9;
    s.t_n = 10.5e-9;
    s.signed_width = 0.5e-9;
    s.latency = 10.5e-9;

    const PulseSample c = censor(s, 1e-9);
    CHECK(c.censored);
    CHECK(c.t_p == s.t_p);
    CHECK(c.t_n == s.t_n);
    CHECK(c.signed_width == s.signed_width);

    s.signed_width = -2e-9;
    CHECK_FALSE(censor(s, 1e-9).censored);
    s.signed_width = 0.0;
    CHECK_FALSE(censor(s, 0.0).censored);
    CHECK_THROWS_AS(censor(s, -1.0), std::invalid_argument);
}

TEST_CASE("temperature model fit") {
    const GrngPhysics phy = nominal_physics();

    SUBCASE("two-point fit is exact and reproduces the endpoint currents") {
        const LeakageModel m = fit_temperature_model(phy, table_endpoints);
        CHECK(m.t_ref == 301.15);
        CHECK(m.alpha == doctest::Approx(k_alpha).epsilon(1e-9));
        CHECK(m.i_0 == doctest::Approx(k_i_cold).epsilon(1e-9));
        CHECK(leakage_current(m, 0.18, 333.15) == doctest::Approx(k_i_hot).epsilon(1e-9));
        CHECK(leakage_current(m, 0.18, 333.15) / leakage_current(m, 0.18, 301.15) ==
              doctest::Approx(k_fold_model).epsilon(1e-9));

        const DischargeParams cold = discharge_params(phy, {}, m, 0.18, 301.15);
        const DischargeParams hot = discharge_params(phy, {}, m, 0.18, 333.15);
        CHECK(cold.mu_p == doctest::Approx(1.931e-6).epsilon(1e-9));
        CHECK(hot.mu_p == doctest::Approx(0.7749e-6).epsilon(1e-9));
    }

    SUBCASE("interpolated 50 C latency lands near the measured 1.051 us") {
        const LeakageModel m = fit_temperature_model(phy, table_endpoints);
        const DischargeParams d = discharge_params(phy, {}, m, 0.18, 323.15);
        CHECK(d.mu_p == doctest::Approx(k_latency_50c).epsilon(1e-9));
        CHECK(std::abs(d.mu_p / 1.051e-6 - 1.0) < 0.15);
    }

    SUBCASE("differential SD fold across the sweep") {
        const LeakageModel m = fit_temperature_model(phy, table_endpoints);
        const double t_cold = discharge_params(phy, {}, m, 0.18, 301.15).t_unit();
        const double t_hot = discharge_params(phy, {}, m, 0.18, 333.15).t_unit();
        CHECK(t_cold == doctest::Approx(3.155453941978997e-08).epsilon(1e-9));
        CHECK(t_hot == doctest::Approx(1.266266835649676e-08).epsilon(1e-9));
        // sigma ~ 1/I_L, so the SD fold equals the current fold; the bench
        // measured a 2.62x change in width SD over the same span.
        CHECK(t_cold / t_hot == doctest::Approx(k_fold_model).epsilon(1e-6));
        CHECK(std::abs((t_cold / t_hot) / k_fold_measured - 1.0) < 0.10);
    }

    SUBCASE("latency and SD both shrink as temperature rises") {
        const LeakageModel m = nominal_leakage();
        double prev_mu = 1e9, prev_sd = 1e9;
        for (double c : {28.0, 40.0, 50.0, 60.0}) {
            const DischargeParams d =
                discharge_params(phy, {}, m, 0.18, celsius_to_kelvin(c));
            CHECK(d.mu_p < prev_mu);
            CHECK(d.t_unit() < prev_sd);
            prev_mu = d.mu_p;
            prev_sd = d.t_unit();
        }
    }

    SUBCASE("flat latencies give a flat model") {
        const LatencyPoint flat[2] = {{300.0, 1e-6}, {320.0, 1e-6}};
        CHECK(fit_temperature_model(phy, flat).alpha == 0.0);
    }

    SUBCASE("synthetic exponential data is recovered by least squares") {
        LeakageModel truth;
        truth.alpha = 0.021;
        truth.i_0 = 5e-10;
        truth.t_ref = 305.0;
        std::vector<LatencyPoint> pts;
        for (double t : {295.0, 305.0, 315.0, 330.0}) {
            const DischargeParams d = discharge_params(phy, {}, truth, truth.v_ref, t);
            pts.push_back({t, d.mu_p});
        }
        const LeakageModel m = fit_temperature_model(phy, pts);
        CHECK(m.alpha == doctest::Approx(truth.alpha).epsilon(1e-9));
        for (const auto& p : pts) {
            const DischargeParams d = discharge_params(phy, {}, m, m.v_ref, p.temp_k);
            CHECK(d.mu_p == doctest::Approx(p.latency_s).epsilon(1e-9));
        }
    }

    SUBCASE("the four-point bench sweep is not exactly exponential") {
        std::vector<LatencyPoint> pts;
        for (const auto& r : thermal_sweep_reference())
            pts.push_back({celsius_to_kelvin(r.temp_c), r.latency_s});
        const LeakageModel m = fit_temperature_model(phy, pts);
        // Least squares over all four bench points leaves residuals of up to
        // ~4.5% (the measured 40C latency sits above any pure exponential
        // through its neighbours); the endpoint fit used by the sweep tool
        // reproduces its two anchors exactly instead.
        for (const auto& p : pts) {
            const DischargeParams d = discharge_params(phy, {}, m, m.v_ref, p.temp_k);
            CHECK(std::abs(d.mu_p / p.latency_s - 1.0) < 0.06);
        }
    }

    SUBCASE("degenerate inputs are rejected") {
        const LatencyPoint dup[2] = {{300.0, 1e-6}, {300.0, 2e-6}};
        CHECK_THROWS_AS(fit_temperature_model(phy, dup), std::invalid_argument);
        const LatencyPoint neg[2] = {{300.0, 1e-6}, {320.0, -1e-6}};
        CHECK_THROWS_AS(fit_temperature_model(phy, neg), std::invalid_argument);
        const LatencyPoint one[1] = {{300.0, 1e-6}};
        CHECK_THROWS_AS(fit_temperature_model(phy, one), std::invalid_argument);
    }
}

TEST_CASE("electron-by-electron reference sampler") {
    const GrngPhysics phy = nominal_physics();
    const LeakageModel leak = nominal_leakage();

    // 3745 electrons must leave each capacitor; the crossing time is their
    // summed exponential gaps, so mean = N*q/I and sd = sqrt(N)*q/I.
    const double i_l = leakage_current(leak, k_nominal_v_r, k_nominal_temp_k);
    const double n_e = std::llround(phy.c_p * phy.v_dd / 2.0 / k_elementary_charge);
    CHECK(n_e == 3745);
    const double mean_exact = n_e * k_elementary_charge / i_l;
    const double sd_exact = std::sqrt(n_e) * k_elementary_charge / i_l;
    CHECK(mean_exact == doctest::Approx(6.896725855551724e-08).epsilon(1e-12));
    CHECK(sd_exact == doctest::Approx(1.126982188197150e-09).epsilon(1e-12));
    // The discrete-event mean agrees with the Gaussian path's mean to the
    // electron-rounding limit.
    CHECK(mean_exact == doctest::Approx(k_mu_nominal).epsilon(1e-4));

    const std::size_t n = 1200;
    RngStream st(2024, 0);
    std::vector<double> t_p(n);
    for (std::size_t i = 0; i < n; ++i) {
        const PulseSample s =
            sample_pulse_electron_reference(phy, {}, leak, 0.18, 301.15, st);
        t_p[i] = s.t_p;
        REQUIRE(s.latency == std::max(s.t_p, s.t_n));
    }
    const auto sum = stats::summarize(t_p);
    CHECK(std::abs(sum.mean - mean_exact) <
          4.0 * sd_exact / std::sqrt(static_cast<double>(n)));
    CHECK(sum.sd == doctest::Approx(sd_exact).epsilon(0.09));
    // A sum of 3745 exponentials is Gaussian for any practical test.
    CHECK(stats::qq_rvalue(t_p) > 0.995);
}

TEST_CASE("parameter validation") {
    GrngPhysics phy;
    phy.c_p = -1e-15;
    CHECK_THROWS_AS(phy.validate(), std::invalid_argument);
    GrngInstance inst;
    inst.i_n1_scale = 0.0;
    CHECK_THROWS_AS(inst.validate(), std::invalid_argument);
    CHECK_THROWS_AS(
        discharge_params(nominal_physics(), inst, nominal_leakage(), 0.18, 301.15),
        std::invalid_argument);
}

TEST_CASE("bench reference table is the published sweep") {
    const auto t = thermal_sweep_reference();
    REQUIRE(t.size() == 4);
    CHECK(t[0].temp_c == 28.0);
    CHECK(t[0].latency_s == 1.931e-6);
    CHECK(t[0].width_sd_s == 197.1e-9);
    CHECK(t[3].temp_c == 60.0);
    CHECK(t[3].latency_s == 0.7749e-6);
    CHECK(t[3].width_sd_s == 515.5e-9);
    CHECK(t[3].qq_r == 0.9736);
}
