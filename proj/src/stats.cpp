#include "bnncim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bnncim/errors.hpp"

namespace bnncim::stats {

SampleSummary summarize(std::span<const double> xs) {
    if (xs.empty()) throw degenerate_input("summarize: empty sample");
    SampleSummary s;
    s.n = xs.size();
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    double sum = 0;
    for (double x : xs) {
        sum += x;
        s.min = std::min(s.min, x);
        s.max = std::max(s.max, x);
    }
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

// Acklam's rational approximation to the probit function, refined to
// ~1e-9 relative accuracy. Standard coefficients.
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("normal_quantile: p must be in (0, 1)");

    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};

    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Halley step against erfc sharpens the tails well below 1e-9.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

std::vector<QqPoint> qq_points(std::span<const double> xs) {
    if (xs.size() < 3) throw degenerate_input("qq_points: need at least 3 samples");
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());

    const double n = static_cast<double>(sorted.size());
    std::vector<QqPoint> pts(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double pos = (static_cast<double>(i + 1) - 0.375) / (n + 0.25);
        pts[i] = {sorted[i], normal_quantile(pos)};
    }
    return pts;
}

double qq_rvalue(std::span<const double> xs) {
    const auto pts = qq_points(xs);

    double mx = 0, my = 0;
    for (const auto& p : pts) {
        mx += p.sample_quantile;
        my += p.theoretical_quantile;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());

    double sxy = 0, sxx = 0, syy = 0;
    for (const auto& p : pts) {
        const double dx = p.sample_quantile - mx;
        const double dy = p.theoretical_quantile - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw degenerate_input("qq_rvalue: sample has zero variance");
    return sxy / std::sqrt(sxx * syy);
}

double predictive_entropy(std::span<const double> probs) {
    if (probs.empty()) throw std::invalid_argument("predictive_entropy: empty distribution");
    double sum = 0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw std::invalid_argument("predictive_entropy: probabilities must be non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw std::invalid_argument("predictive_entropy: probabilities must sum to 1");

    double h = 0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

CalibrationReport ece(std::span<const Prediction> preds, std::size_t n_bins) {
    if (n_bins == 0) throw std::invalid_argument("ece: need at least one bin");
    if (preds.empty()) throw degenerate_input("ece: no predictions");
    for (const auto& p : preds)
        if (!(p.confidence >= 0.0 && p.confidence <= 1.0))
            throw std::invalid_argument("ece: confidence outside [0, 1]");

    std::vector<double> conf_sum(n_bins, 0.0);
    std::vector<std::size_t> hits(n_bins, 0), counts(n_bins, 0);
    for (const auto& p : preds) {
        auto b = static_cast<std::size_t>(p.confidence * static_cast<double>(n_bins));
        if (b >= n_bins) b = n_bins - 1; // confidence exactly 1.0
        conf_sum[b] += p.confidence;
        counts[b] += 1;
        if (p.correct) hits[b] += 1;
    }

    CalibrationReport rep;
    rep.n_bins = n_bins;
    rep.bins.resize(n_bins);
    const double n = static_cast<double>(preds.size());
    for (std::size_t b = 0; b < n_bins; ++b) {
        CalibrationBin& bin = rep.bins[b];
        bin.confidence_mid = (static_cast<double>(b) + 0.5) / static_cast<double>(n_bins);
        bin.weight = static_cast<double>(counts[b]) / n;
        if (counts[b] > 0) {
            bin.mean_confidence = conf_sum[b] / static_cast<double>(counts[b]);
            bin.accuracy = static_cast<double>(hits[b]) / static_cast<double>(counts[b]);
            rep.ece += bin.weight * std::abs(bin.accuracy - bin.mean_confidence);
        }
    }
    return rep;
}

RecoveryPoint accuracy_recovery(std::span<const ScoredOutcome> outcomes, double threshold) {
    if (outcomes.empty()) throw degenerate_input("accuracy_recovery: no outcomes");
    // +inf is the idiomatic "defer nothing" threshold; only NaN is malformed.
    if (std::isnan(threshold)) throw std::invalid_argument("accuracy_recovery: bad threshold");

    std::size_t kept = 0, kept_correct = 0, all_correct = 0;
    for (const auto& o : outcomes) {
        if (o.correct) ++all_correct;
        if (o.entropy <= threshold) {
            ++kept;
            if (o.correct) ++kept_correct;
        }
    }

    RecoveryPoint r;
    r.threshold = threshold;
    r.retained_fraction = static_cast<double>(kept) / static_cast<double>(outcomes.size());
    if (kept > 0) {
        const double acc_kept = static_cast<double>(kept_correct) / static_cast<double>(kept);
        const double acc_all = static_cast<double>(all_correct) / static_cast<double>(outcomes.size());
        r.accuracy_delta = acc_kept - acc_all;
    }
    return r;
}

std::vector<HistogramBin> histogram(std::span<const double> xs, std::size_t n_bins) {
    if (n_bins == 0) throw std::invalid_argument("histogram: need at least one bin");
    const SampleSummary s = summarize(xs);

    std::vector<HistogramBin> bins(n_bins);
    const double width = (s.max - s.min) / static_cast<double>(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b) {
        bins[b].lo = s.min + width * static_cast<double>(b);
        bins[b].hi = (b + 1 == n_bins) ? s.max : s.min + width * static_cast<double>(b + 1);
    }
    if (width == 0.0) {
        bins[0].count = xs.size();
        return bins;
    }
    for (double x : xs) {
        auto b = static_cast<std::size_t>((x - s.min) / width);
        if (b >= n_bins) b = n_bins - 1;
        bins[b].count += 1;
    }
    return bins;
}

} // namespace bnncim::stats
