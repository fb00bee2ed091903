#ifndef BNNCIM_BNN_HPP
#define BNNCIM_BNN_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bnncim/counters.hpp"
#include "bnncim/dataset.hpp"
#include "bnncim/exec.hpp"
#include "bnncim/grid.hpp"
#include "bnncim/rng.hpp"
#include "bnncim/stats.hpp"
#include "bnncim/tile.hpp"

namespace bnncim::bnn {

double softplus(double x);
double softplus_inv(double y);

/// Deterministic affine layer. An empty bias vector means none.
struct DenseLayer {
    Grid<double> w;        // out x in
    std::vector<double> b; // out, or empty

    std::size_t fan_out() const { return w.rows; }
    std::size_t fan_in() const { return w.cols; }
};

/// Mean-field Gaussian layer: each weight is N(mu, softplus(rho)^2).
struct BayesLinearLayer {
    Grid<double> mu;  // out x in
    Grid<double> rho; // out x in

    std::size_t fan_out() const { return mu.rows; }
    std::size_t fan_in() const { return mu.cols; }
    double sigma_at(std::size_t r, std::size_t c) const { return softplus(rho(r, c)); }
};

/// Sum over weights of KL(N(mu,sigma^2) || N(0,1)).
double kl_to_unit_gaussian(const BayesLinearLayer& layer);

/// Feature extractor (ReLU stack) plus two heads over the same features:
/// a mean-field Gaussian classifier head and the deterministic linear head
/// it was warm-started from. Both heads emit logits, no bias.
struct BayesModel {
    std::vector<DenseLayer> features;
    BayesLinearLayer head;
    DenseLayer det_head;

    double final_nll = 0;  // mean NLL of the training set at the posterior mean
    double final_kl = 0;
    double final_loss = 0; // final_nll + beta * final_kl
    double beta = 0;

    std::size_t n_inputs() const { return features.front().fan_in(); }
    std::size_t n_features() const { return features.back().fan_out(); }
    std::size_t n_classes() const { return head.fan_out(); }

    std::vector<double> feature_forward(std::span<const double> x) const;
};

struct TrainConfig {
    std::vector<std::size_t> hidden = {16, 16};
    std::size_t n_classes = 2;
    std::size_t det_steps = 2000;
    std::size_t vi_steps = 1500;
    double det_lr = 0.01;
    double vi_lr = 0.01;
    double beta = -1;        // <0 selects 1/n_train
    double sigma_init = 0.1; // initial posterior width
    std::uint64_t seed = 1;
};

/// Two-phase fit: (1) train features + deterministic head on cross-entropy;
/// (2) freeze the features, warm-start the Gaussian head's means from the
/// deterministic head, and minimize mean NLL + beta * KL by the local
/// reparameterization of eps ~ N(0,1) per weight. Throws training_failure
/// if the loss ever goes non-finite.
BayesModel train_vi(const Dataset& train, const TrainConfig& cfg);

/// Head-only training objective on a fixed feature batch, evaluated at
/// W = mu + softplus(rho) * eps. Exposed so the analytic gradients below
/// can be checked against finite differences.
double head_loss(const BayesLinearLayer& head, const Grid<double>& eps,
                 const Grid<double>& feats, std::span<const int> labels, double beta);

struct HeadGrads {
    Grid<double> d_mu;
    Grid<double> d_rho;
    double loss = 0;
};

HeadGrads head_loss_grads(const BayesLinearLayer& head, const Grid<double>& eps,
                          const Grid<double>& feats, std::span<const int> labels,
                          double beta);

/// Signed-integer weight image of one head at a shared power-of-two-free
/// scale: w ~= q * scale. Sigma rides the same scale with its shorter code,
/// so one DAC reference serves both operand types.
struct QuantizedHead {
    Grid<int> mu_q;    // out x in
    Grid<int> sigma_q; // out x in, all zero for a deterministic head
    double scale = 0;
    int mu_bits = 8;
    int sigma_bits = 4;
};

QuantizedHead quantize_head(const BayesLinearLayer& head, int mu_bits, int sigma_bits);
QuantizedHead quantize_head(const DenseLayer& head, int mu_bits, int sigma_bits);

/// Unsigned input quantization calibrated against the feature range the
/// training set actually produces.
struct InputQuant {
    double scale = 0; // feature value per input code
    int input_bits = 4;
};

InputQuant calibrate_input_quant(const BayesModel& model, const Dataset& train,
                                 int input_bits);

std::vector<int> quantize_input(std::span<const double> feats, const InputQuant& iq);

/// A trained network frozen for deployment: float parameters plus the
/// integer images and scales the array consumes.
struct TrainedModel {
    BayesModel net;
    QuantizedHead bayes_q;
    QuantizedHead det_q;
    InputQuant iq;
};

TrainedModel finalize_model(BayesModel net, const Dataset& train, int mu_bits,
                            int sigma_bits, int input_bits);

enum class HeadKind { bayes, deterministic };

/// Which machine evaluates the (quantized or float) head.
enum class Backend {
    tile_stochastic, // in-array noise draws realize the posterior
    tile_mean_only,  // sigma columns gated off
    ideal            // float math, explicit Gaussian draws
};

/// One head mapped onto a noisy array instance. Features enter as 4-bit
/// codes, logits come back as ADC sums rescaled to float.
struct TileBackend {
    cim::Tile tile;
    QuantizedHead head;
    InputQuant iq;
    double logit_scale = 0; // ADC code -> logit: head.scale * iq.scale * adc LSB
};

TileBackend make_tile_backend(const TrainedModel& model, HeadKind kind,
                              const cim::MismatchSpec& mm, std::uint64_t seed,
                              int n_cal);

struct InferenceResult {
    std::vector<double> mean_probs; // K
    Grid<double> sample_logits;     // S x K
    double entropy = 0;             // of mean_probs, nats
};

/// S stochastic forward passes through the chosen backend, averaged in
/// probability space. Draw s of example `example_key` is reproducible in
/// isolation: streams are keyed by (seed, example_key, s), never by
/// evaluation order.
InferenceResult repeated_inference(const BayesModel& net, const TileBackend* backend,
                                   Backend kind, std::span<const double> x,
                                   std::size_t s_samples, std::uint64_t seed,
                                   std::uint64_t example_key,
                                   WorkloadCounts* counts = nullptr);

struct UncertaintyReport {
    double accuracy = 0;
    double ape_correct = 0;   // mean predictive entropy over correct predictions
    double ape_incorrect = 0; // ... over incorrect ones
    std::size_t n_correct = 0;
    std::size_t n_incorrect = 0;
    stats::CalibrationReport calibration;
    std::vector<stats::RecoveryPoint> recovery; // thresholds 0 .. 0.6 step 0.05
    double mean_recovery_delta = 0;             // over thresholds that retain anything
    double ape_ood = -1;                        // -1 when no probe set given
};

UncertaintyReport evaluate_uncertainty(const BayesModel& net, const TileBackend* backend,
                                       Backend kind, const Dataset& test,
                                       const Grid<double>* ood, std::size_t s_samples,
                                       std::uint64_t seed, Exec exec = Exec::openmp,
                                       WorkloadCounts* counts = nullptr);

} // namespace bnncim::bnn

#endif
