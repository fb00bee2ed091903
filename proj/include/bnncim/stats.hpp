#ifndef BNNCIM_STATS_HPP
#define BNNCIM_STATS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bnncim::stats {

struct SampleSummary {
    std::size_t n = 0;
    double mean = 0;
    double sd = 0; // unbiased (n-1) estimator
    double min = 0;
    double max = 0;
};

/// Throws degenerate_input on an empty sample.
SampleSummary summarize(std::span<const double> xs);

/// Inverse standard normal CDF (rational approximation, ~1e-9 accurate).
/// p must lie strictly inside (0, 1).
double normal_quantile(double p);

/// One point of a normal probability plot.
struct QqPoint {
    double sample_quantile = 0;
    double theoretical_quantile = 0;
};

/// Sorted samples paired with normal order-statistic medians at plotting
/// positions (i - 0.375) / (n + 0.25).
std::vector<QqPoint> qq_points(std::span<const double> xs);

/// Pearson correlation of the normal probability plot: 1 means perfectly
/// Gaussian-shaped. Throws degenerate_input for n < 3 or zero variance.
double qq_rvalue(std::span<const double> xs);

/// Shannon entropy -sum(p ln p) in nats, with 0*ln(0) = 0. Probabilities
/// must be non-negative and sum to 1 within 1e-6.
double predictive_entropy(std::span<const double> probs);

/// One classified example: the model's winning-class confidence and whether
/// it was right.
struct Prediction {
    double confidence = 0; // in [0, 1]
    bool correct = false;
};

struct CalibrationBin {
    double confidence_mid = 0;  // center of the bin interval
    double mean_confidence = 0; // average confidence of members (0 if empty)
    double accuracy = 0;        // fraction correct among members (0 if empty)
    double weight = 0;          // fraction of all predictions in this bin
};

struct CalibrationReport {
    double ece = 0;
    std::size_t n_bins = 0;
    std::vector<CalibrationBin> bins;
};

/// Expected calibration error over equal-width confidence bins:
///   ECE = sum_b (n_b/n) * |accuracy_b - mean_confidence_b|.
/// Confidence exactly 1.0 lands in the top bin.
CalibrationReport ece(std::span<const Prediction> preds, std::size_t n_bins = 15);

/// One inference outcome for selective-classification analysis.
struct ScoredOutcome {
    double entropy = 0;
    bool correct = false;
};

struct RecoveryPoint {
    double threshold = 0;
    double retained_fraction = 0;
    /// accuracy(retained) - accuracy(all); empty when nothing was retained
    /// (the empty-retention signal, distinct from an error).
    std::optional<double> accuracy_delta;
};

/// Keeps only outcomes with entropy <= threshold and reports how accuracy
/// moves relative to classifying everything.
RecoveryPoint accuracy_recovery(std::span<const ScoredOutcome> outcomes, double threshold);

struct HistogramBin {
    double lo = 0, hi = 0;
    std::size_t count = 0;
};

/// Equal-width histogram over [min, max] of the data.
std::vector<HistogramBin> histogram(std::span<const double> xs, std::size_t n_bins);

} // namespace bnncim::stats

#endif
