#include "bnncim/bnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "bnncim/calibration.hpp"
#include "bnncim/errors.hpp"

namespace bnncim::bnn {

double softplus(double x) {
    if (x > 30.0) return x;
    return std::log1p(std::exp(x));
}

double softplus_inv(double y) {
    if (y <= 0) throw degenerate_input("softplus_inv: need y > 0");
    if (y > 30.0) return y;
    return std::log(std::expm1(y));
}

namespace {

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double log_sum_exp(std::span<const double> v) {
    double m = v[0];
    for (double x : v) m = std::max(m, x);
    double s = 0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

void softmax_into(std::span<const double> logits, std::span<double> out) {
    const double lse = log_sum_exp(logits);
    for (std::size_t k = 0; k < logits.size(); ++k) out[k] = std::exp(logits[k] - lse);
}

/// Adam with bias correction; one instance per parameter tensor.
struct Adam {
    Grid<double> m, v;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::size_t t = 0;

    explicit Adam(std::size_t rows, std::size_t cols) : m(rows, cols, 0.0), v(rows, cols, 0.0) {}

    void step(Grid<double>& w, const Grid<double>& g, double lr) {
        ++t;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (std::size_t i = 0; i < w.size(); ++i) {
            m.data[i] = beta1 * m.data[i] + (1.0 - beta1) * g.data[i];
            v.data[i] = beta2 * v.data[i] + (1.0 - beta2) * g.data[i] * g.data[i];
            w.data[i] -= lr * (m.data[i] / c1) / (std::sqrt(v.data[i] / c2) + eps);
        }
    }
};

void require_finite(double loss, const char* phase, std::size_t step) {
    if (!std::isfinite(loss))
        throw training_failure(std::string(phase) + ": loss diverged", step);
}

} // namespace

double kl_to_unit_gaussian(const BayesLinearLayer& layer) {
    if (!layer.mu.same_shape(layer.rho))
        throw degenerate_input("kl_to_unit_gaussian: mu/rho shape mismatch");
    double kl = 0;
    for (std::size_t i = 0; i < layer.mu.size(); ++i) {
        const double mu = layer.mu.data[i];
        const double sg = softplus(layer.rho.data[i]);
        kl += 0.5 * (mu * mu + sg * sg - 1.0) - std::log(sg);
    }
    return kl;
}

std::vector<double> BayesModel::feature_forward(std::span<const double> x) const {
    std::vector<double> a(x.begin(), x.end());
    for (const DenseLayer& layer : features) {
        if (a.size() != layer.fan_in())
            throw degenerate_input("feature_forward: input width mismatch");
        std::vector<double> z(layer.fan_out());
        for (std::size_t r = 0; r < layer.fan_out(); ++r) {
            double acc = layer.b.empty() ? 0.0 : layer.b[r];
            for (std::size_t c = 0; c < layer.fan_in(); ++c) acc += layer.w(r, c) * a[c];
            z[r] = acc > 0 ? acc : 0.0;
        }
        a = std::move(z);
    }
    return a;
}

double head_loss(const BayesLinearLayer& head, const Grid<double>& eps,
                 const Grid<double>& feats, std::span<const int> labels, double beta) {
    if (!head.mu.same_shape(head.rho) || !head.mu.same_shape(eps))
        throw degenerate_input("head_loss: shape mismatch");
    if (feats.rows != labels.size() || feats.cols != head.fan_in())
        throw degenerate_input("head_loss: batch shape mismatch");

    const std::size_t n = feats.rows, out = head.fan_out(), in = head.fan_in();
    Grid<double> w(out, in);
    for (std::size_t i = 0; i < w.size(); ++i)
        w.data[i] = head.mu.data[i] + softplus(head.rho.data[i]) * eps.data[i];

    double nll = 0;
    std::vector<double> logits(out);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < out; ++k) {
            double acc = 0;
            for (std::size_t c = 0; c < in; ++c) acc += w(k, c) * feats(r, c);
            logits[k] = acc;
        }
        nll -= logits[static_cast<std::size_t>(labels[r])] - log_sum_exp(logits);
    }
    return nll / static_cast<double>(n) + beta * kl_to_unit_gaussian(head);
}

HeadGrads head_loss_grads(const BayesLinearLayer& head, const Grid<double>& eps,
                          const Grid<double>& feats, std::span<const int> labels,
                          double beta) {
    if (!head.mu.same_shape(head.rho) || !head.mu.same_shape(eps))
        throw degenerate_input("head_loss_grads: shape mismatch");
    if (feats.rows != labels.size() || feats.cols != head.fan_in())
        throw degenerate_input("head_loss_grads: batch shape mismatch");

    const std::size_t n = feats.rows, out = head.fan_out(), in = head.fan_in();
    Grid<double> w(out, in);
    for (std::size_t i = 0; i < w.size(); ++i)
        w.data[i] = head.mu.data[i] + softplus(head.rho.data[i]) * eps.data[i];

    HeadGrads g;
    g.d_mu = Grid<double>(out, in, 0.0);
    g.d_rho = Grid<double>(out, in, 0.0);

    double nll = 0;
    std::vector<double> logits(out), p(out);
    Grid<double> dw(out, in, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < out; ++k) {
            double acc = 0;
            for (std::size_t c = 0; c < in; ++c) acc += w(k, c) * feats(r, c);
            logits[k] = acc;
        }
        const double lse = log_sum_exp(logits);
        nll -= logits[static_cast<std::size_t>(labels[r])] - lse;
        for (std::size_t k = 0; k < out; ++k) p[k] = std::exp(logits[k] - lse);
        for (std::size_t k = 0; k < out; ++k) {
            const double dlogit =
                (p[k] - (static_cast<std::size_t>(labels[r]) == k ? 1.0 : 0.0)) /
                static_cast<double>(n);
            for (std::size_t c = 0; c < in; ++c) dw(k, c) += dlogit * feats(r, c);
        }
    }

    // dW routes to mu directly and to rho through sigma'(rho) * eps; the KL
    // term adds beta * mu and beta * (sigma - 1/sigma) * sigma'(rho).
    for (std::size_t i = 0; i < dw.size(); ++i) {
        const double sg = softplus(head.rho.data[i]);
        const double dsg = sigmoid(head.rho.data[i]);
        g.d_mu.data[i] = dw.data[i] + beta * head.mu.data[i];
        g.d_rho.data[i] = dw.data[i] * eps.data[i] * dsg + beta * (sg - 1.0 / sg) * dsg;
    }
    g.loss = nll / static_cast<double>(n) + beta * kl_to_unit_gaussian(head);
    return g;
}

namespace {

struct Phase1Activations {
    std::vector<Grid<double>> a; // a[0] = inputs, a[l+1] = relu output of layer l
    Grid<double> logits;         // n x classes
};

Phase1Activations phase1_forward(const std::vector<DenseLayer>& features,
                                 const DenseLayer& det_head, const Grid<double>& x) {
    Phase1Activations act;
    act.a.reserve(features.size() + 1);
    act.a.push_back(x);
    for (const DenseLayer& layer : features) {
        const Grid<double>& prev = act.a.back();
        Grid<double> next(prev.rows, layer.fan_out());
        for (std::size_t r = 0; r < prev.rows; ++r)
            for (std::size_t k = 0; k < layer.fan_out(); ++k) {
                double acc = layer.b[k];
                for (std::size_t c = 0; c < layer.fan_in(); ++c)
                    acc += layer.w(k, c) * prev(r, c);
                next(r, k) = acc > 0 ? acc : 0.0;
            }
        act.a.push_back(std::move(next));
    }
    const Grid<double>& feats = act.a.back();
    act.logits = Grid<double>(feats.rows, det_head.fan_out());
    for (std::size_t r = 0; r < feats.rows; ++r)
        for (std::size_t k = 0; k < det_head.fan_out(); ++k) {
            double acc = 0;
            for (std::size_t c = 0; c < det_head.fan_in(); ++c)
                acc += det_head.w(k, c) * feats(r, c);
            act.logits(r, k) = acc;
        }
    return act;
}

} // namespace

BayesModel train_vi(const Dataset& train, const TrainConfig& cfg) {
    if (cfg.hidden.empty()) throw degenerate_input("train_vi: need at least one hidden layer");
    if (cfg.n_classes < 2) throw degenerate_input("train_vi: need at least two classes");
    if (train.size() == 0) throw degenerate_input("train_vi: empty dataset");
    for (int y : train.labels)
        if (y < 0 || static_cast<std::size_t>(y) >= cfg.n_classes)
            throw degenerate_input("train_vi: label out of range");

    const std::size_t n = train.size();
    const std::size_t d_in = train.x.cols;
    const double beta = cfg.beta < 0 ? 1.0 / static_cast<double>(n) : cfg.beta;

    BayesModel model;
    model.beta = beta;

    // He-initialized feature stack, zero biases.
    std::size_t fan_in = d_in;
    for (std::size_t l = 0; l < cfg.hidden.size(); ++l) {
        RngStream st(cfg.seed, mix_stream_id(0xfea7, l));
        DenseLayer layer;
        layer.w = Grid<double>(cfg.hidden[l], fan_in);
        layer.b.assign(cfg.hidden[l], 0.0);
        const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (double& w : layer.w.data) w = st.gauss(0.0, sd);
        model.features.push_back(std::move(layer));
        fan_in = cfg.hidden[l];
    }
    {
        RngStream st(cfg.seed, mix_stream_id(0x0d37, 0));
        model.det_head.w = Grid<double>(cfg.n_classes, fan_in);
        const double sd = std::sqrt(1.0 / static_cast<double>(fan_in));
        for (double& w : model.det_head.w.data) w = st.gauss(0.0, sd);
    }

    // Phase 1: deterministic cross-entropy on features + linear head.
    std::vector<Adam> opt_w, opt_b;
    for (const DenseLayer& layer : model.features) {
        opt_w.emplace_back(layer.w.rows, layer.w.cols);
        opt_b.emplace_back(1, layer.b.size());
    }
    Adam opt_head(model.det_head.w.rows, model.det_head.w.cols);

    for (std::size_t step = 0; step < cfg.det_steps; ++step) {
        Phase1Activations act = phase1_forward(model.features, model.det_head, train.x);

        double loss = 0;
        Grid<double> dlogits(n, cfg.n_classes);
        std::vector<double> row(cfg.n_classes), p(cfg.n_classes);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t k = 0; k < cfg.n_classes; ++k) row[k] = act.logits(r, k);
            const double lse = log_sum_exp(row);
            loss -= row[static_cast<std::size_t>(train.labels[r])] - lse;
            for (std::size_t k = 0; k < cfg.n_classes; ++k) {
                p[k] = std::exp(row[k] - lse);
                dlogits(r, k) =
                    (p[k] - (static_cast<std::size_t>(train.labels[r]) == k ? 1.0 : 0.0)) /
                    static_cast<double>(n);
            }
        }
        loss /= static_cast<double>(n);
        require_finite(loss, "deterministic phase", step);

        // Head gradient, then backprop through the ReLU stack.
        const Grid<double>& feats = act.a.back();
        Grid<double> d_head(cfg.n_classes, feats.cols, 0.0);
        Grid<double> d_act(n, feats.cols, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t k = 0; k < cfg.n_classes; ++k) {
                const double dl = dlogits(r, k);
                for (std::size_t c = 0; c < feats.cols; ++c) {
                    d_head(k, c) += dl * feats(r, c);
                    d_act(r, c) += dl * model.det_head.w(k, c);
                }
            }
        opt_head.step(model.det_head.w, d_head, cfg.det_lr);

        for (std::size_t l = model.features.size(); l-- > 0;) {
            DenseLayer& layer = model.features[l];
            const Grid<double>& in_act = act.a[l];
            const Grid<double>& out_act = act.a[l + 1];
            Grid<double> dw(layer.w.rows, layer.w.cols, 0.0);
            Grid<double> db(1, layer.b.size(), 0.0);
            Grid<double> d_prev(n, layer.fan_in(), 0.0);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t k = 0; k < layer.fan_out(); ++k) {
                    if (out_act(r, k) <= 0) continue; // ReLU gate
                    const double dz = d_act(r, k);
                    db(0, k) += dz;
                    for (std::size_t c = 0; c < layer.fan_in(); ++c) {
                        dw(k, c) += dz * in_act(r, c);
                        d_prev(r, c) += dz * layer.w(k, c);
                    }
                }
            opt_w[l].step(layer.w, dw, cfg.det_lr);
            Grid<double> bgrid(1, layer.b.size());
            std::copy(layer.b.begin(), layer.b.end(), bgrid.data.begin());
            opt_b[l].step(bgrid, db, cfg.det_lr);
            std::copy(bgrid.data.begin(), bgrid.data.end(), layer.b.begin());
            d_act = std::move(d_prev);
        }
    }

    // Phase 2: freeze features, variational head warm-started from the
    // deterministic one.
    Grid<double> feats(n, fan_in);
    {
        Phase1Activations act = phase1_forward(model.features, model.det_head, train.x);
        feats = act.a.back();
    }

    model.head.mu = model.det_head.w;
    model.head.rho = Grid<double>(cfg.n_classes, fan_in, softplus_inv(cfg.sigma_init));

    Adam opt_mu(cfg.n_classes, fan_in), opt_rho(cfg.n_classes, fan_in);
    RngStream eps_stream(cfg.seed, mix_stream_id(0xeb50));
    Grid<double> eps(cfg.n_classes, fan_in);
    for (std::size_t step = 0; step < cfg.vi_steps; ++step) {
        for (double& e : eps.data) e = eps_stream.gauss();
        HeadGrads g = head_loss_grads(model.head, eps, feats, train.labels, beta);
        require_finite(g.loss, "variational phase", step);
        opt_mu.step(model.head.mu, g.d_mu, cfg.vi_lr);
        opt_rho.step(model.head.rho, g.d_rho, cfg.vi_lr);
    }

    const Grid<double> zero_eps(cfg.n_classes, fan_in, 0.0);
    model.final_nll = head_loss(model.head, zero_eps, feats, train.labels, 0.0);
    model.final_kl = kl_to_unit_gaussian(model.head);
    model.final_loss = model.final_nll + beta * model.final_kl;
    return model;
}

namespace {

int clampi(long long v, int lo, int hi) {
    return static_cast<int>(std::clamp<long long>(v, lo, hi));
}

} // namespace

QuantizedHead quantize_head(const BayesLinearLayer& head, int mu_bits, int sigma_bits) {
    if (mu_bits < 2 || sigma_bits < 1 || sigma_bits >= mu_bits)
        throw degenerate_input("quantize_head: bad bit widths");
    const int mu_max = (1 << (mu_bits - 1)) - 1;
    const int sigma_max = (1 << sigma_bits) - 1;

    double max_mu = 0, max_sigma = 0;
    for (std::size_t i = 0; i < head.mu.size(); ++i) {
        max_mu = std::max(max_mu, std::abs(head.mu.data[i]));
        max_sigma = std::max(max_sigma, softplus(head.rho.data[i]));
    }
    // One shared scale serves both operand types: sigma's shorter code is
    // headroomed by 2^(mu_bits - sigma_bits) so it can never clip.
    const double m = std::max(max_mu, std::ldexp(max_sigma, mu_bits - sigma_bits));
    if (m <= 0) throw degenerate_input("quantize_head: all-zero head");

    QuantizedHead q;
    q.scale = m / static_cast<double>(mu_max);
    q.mu_bits = mu_bits;
    q.sigma_bits = sigma_bits;
    q.mu_q = Grid<int>(head.mu.rows, head.mu.cols);
    q.sigma_q = Grid<int>(head.mu.rows, head.mu.cols);
    for (std::size_t i = 0; i < head.mu.size(); ++i) {
        q.mu_q.data[i] = clampi(std::llround(head.mu.data[i] / q.scale), -mu_max, mu_max);
        q.sigma_q.data[i] =
            clampi(std::llround(softplus(head.rho.data[i]) / q.scale), 0, sigma_max);
    }
    return q;
}

QuantizedHead quantize_head(const DenseLayer& head, int mu_bits, int sigma_bits) {
    if (mu_bits < 2 || sigma_bits < 1)
        throw degenerate_input("quantize_head: bad bit widths");
    const int mu_max = (1 << (mu_bits - 1)) - 1;

    double max_w = 0;
    for (double w : head.w.data) max_w = std::max(max_w, std::abs(w));
    if (max_w <= 0) throw degenerate_input("quantize_head: all-zero head");

    QuantizedHead q;
    q.scale = max_w / static_cast<double>(mu_max);
    q.mu_bits = mu_bits;
    q.sigma_bits = sigma_bits;
    q.mu_q = Grid<int>(head.w.rows, head.w.cols);
    q.sigma_q = Grid<int>(head.w.rows, head.w.cols, 0);
    for (std::size_t i = 0; i < head.w.size(); ++i)
        q.mu_q.data[i] = clampi(std::llround(head.w.data[i] / q.scale), -mu_max, mu_max);
    return q;
}

InputQuant calibrate_input_quant(const BayesModel& model, const Dataset& train,
                                 int input_bits) {
    if (input_bits < 1) throw degenerate_input("calibrate_input_quant: bad input bits");
    double fmax = 0;
    std::vector<double> x(train.x.cols);
    for (std::size_t r = 0; r < train.size(); ++r) {
        for (std::size_t c = 0; c < train.x.cols; ++c) x[c] = train.x(r, c);
        for (double f : model.feature_forward(x)) fmax = std::max(fmax, f);
    }
    if (fmax <= 0) throw degenerate_input("calibrate_input_quant: features all zero");
    InputQuant iq;
    iq.input_bits = input_bits;
    iq.scale = fmax / static_cast<double>((1 << input_bits) - 1);
    return iq;
}

std::vector<int> quantize_input(std::span<const double> feats, const InputQuant& iq) {
    const int x_max = (1 << iq.input_bits) - 1;
    std::vector<int> codes(feats.size());
    for (std::size_t i = 0; i < feats.size(); ++i)
        codes[i] = clampi(std::llround(feats[i] / iq.scale), 0, x_max);
    return codes;
}

TrainedModel finalize_model(BayesModel net, const Dataset& train, int mu_bits,
                            int sigma_bits, int input_bits) {
    TrainedModel tm;
    tm.bayes_q = quantize_head(net.head, mu_bits, sigma_bits);
    tm.det_q = quantize_head(net.det_head, mu_bits, sigma_bits);
    tm.iq = calibrate_input_quant(net, train, input_bits);
    tm.net = std::move(net);
    return tm;
}

TileBackend make_tile_backend(const TrainedModel& model, HeadKind kind,
                              const cim::MismatchSpec& mm, std::uint64_t seed,
                              int n_cal) {
    const QuantizedHead& qh = kind == HeadKind::bayes ? model.bayes_q : model.det_q;
    const std::size_t in = qh.mu_q.cols, out = qh.mu_q.rows;

    cim::TileConfig cfg;
    cfg.rows = static_cast<int>(in);
    cfg.words_per_row = static_cast<int>(out);
    cfg.mu_bits = qh.mu_bits;
    cfg.sigma_bits = qh.sigma_bits;
    cfg.input_bits = model.iq.input_bits;
    cfg.adc_full_scale = static_cast<double>(cfg.rows) * cfg.x_max();

    TileBackend backend;
    backend.tile = cim::make_tile(cfg, mm, seed);
    backend.head = qh;
    backend.iq = model.iq;
    // The shift-add output is in ADC codes; one code step spans
    // full_scale / (2^(adc_bits-1) - 1) charge units, and each charge unit is
    // one (weight LSB x input LSB) product.
    const double adc_top = static_cast<double>((1 << (cfg.adc_bits - 1)) - 1);
    backend.logit_scale = qh.scale * model.iq.scale * (cfg.adc_full_scale / adc_top);

    // The tile stores fan-in along rows: weight (class k, feature i) lives at
    // (row i, word k).
    Grid<int> mu(in, out), sigma(in, out);
    for (std::size_t i = 0; i < in; ++i)
        for (std::size_t k = 0; k < out; ++k) {
            mu(i, k) = qh.mu_q(k, i);
            sigma(i, k) = qh.sigma_q(k, i);
        }
    cim::store_weights(backend.tile, mu, sigma);

    if (n_cal > 0) {
        cal::OffsetMap offsets = cal::measure_offsets(backend.tile, n_cal, seed);
        cal::apply_offsets(backend.tile, offsets);
    }
    return backend;
}

InferenceResult repeated_inference(const BayesModel& net, const TileBackend* backend,
                                   Backend kind, std::span<const double> x,
                                   std::size_t s_samples, std::uint64_t seed,
                                   std::uint64_t example_key, WorkloadCounts* counts) {
    if (s_samples == 0) throw degenerate_input("repeated_inference: need s >= 1");
    if (kind != Backend::ideal && backend == nullptr)
        throw degenerate_input("repeated_inference: tile backend required");

    const std::vector<double> feats = net.feature_forward(x);
    const std::size_t out = net.n_classes();

    InferenceResult res;
    res.mean_probs.assign(out, 0.0);
    res.sample_logits = Grid<double>(s_samples, out);

    std::vector<int> x_q;
    if (kind != Backend::ideal) x_q = quantize_input(feats, backend->iq);

    std::vector<double> logits(out), p(out);
    for (std::size_t s = 0; s < s_samples; ++s) {
        switch (kind) {
        case Backend::ideal: {
            // Explicit posterior draw, float matrix multiply.
            RngStream st(seed, mix_stream_id(0x1dea1, example_key, s));
            for (std::size_t k = 0; k < out; ++k) logits[k] = 0;
            for (std::size_t k = 0; k < out; ++k)
                for (std::size_t c = 0; c < net.head.fan_in(); ++c) {
                    const double w =
                        net.head.mu(k, c) + net.head.sigma_at(k, c) * st.gauss();
                    logits[k] += w * feats[c];
                }
            break;
        }
        case Backend::tile_stochastic: {
            const std::uint64_t salt = mix_stream_id(0x5a2b1e, example_key, s);
            cim::StreamGrid streams =
                cim::make_stream_grid(backend->tile.config, seed, salt);
            cim::MvmResult mv = cim::tile_mvm(backend->tile, x_q, &streams,
                                              cim::MvmMode::stochastic, nullptr, counts);
            for (std::size_t k = 0; k < out; ++k)
                logits[k] = static_cast<double>(mv.y[k]) * backend->logit_scale;
            break;
        }
        case Backend::tile_mean_only: {
            cim::MvmResult mv = cim::tile_mvm(backend->tile, x_q, nullptr,
                                              cim::MvmMode::mean_only, nullptr, counts);
            for (std::size_t k = 0; k < out; ++k)
                logits[k] = static_cast<double>(mv.y[k]) * backend->logit_scale;
            break;
        }
        }
        softmax_into(logits, p);
        for (std::size_t k = 0; k < out; ++k) {
            res.sample_logits(s, k) = logits[k];
            res.mean_probs[k] += p[k] / static_cast<double>(s_samples);
        }
    }
    res.entropy = stats::predictive_entropy(res.mean_probs);
    return res;
}

namespace {

struct ExampleOutcome {
    double confidence = 0;
    double entropy = 0;
    bool correct = false;
};

} // namespace

UncertaintyReport evaluate_uncertainty(const BayesModel& net, const TileBackend* backend,
                                       Backend kind, const Dataset& test,
                                       const Grid<double>* ood, std::size_t s_samples,
                                       std::uint64_t seed, Exec exec,
                                       WorkloadCounts* counts) {
    if (test.size() == 0) throw degenerate_input("evaluate_uncertainty: empty test set");

    const std::size_t n = test.size();
    std::vector<ExampleOutcome> outcomes(n);
    const auto eval_one = [&](std::size_t i) {
        std::span<const double> x(&test.x.data[i * test.x.cols], test.x.cols);
        InferenceResult r = repeated_inference(net, backend, kind, x, s_samples, seed,
                                               /*example_key=*/i, counts);
        std::size_t argmax = 0;
        for (std::size_t k = 1; k < r.mean_probs.size(); ++k)
            if (r.mean_probs[k] > r.mean_probs[argmax]) argmax = k;
        outcomes[i].confidence = r.mean_probs[argmax];
        outcomes[i].entropy = r.entropy;
        outcomes[i].correct = static_cast<std::size_t>(test.labels[i]) == argmax;
    };
    if (exec == Exec::openmp) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long i = 0; i < static_cast<long long>(n); ++i)
            eval_one(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < n; ++i) eval_one(i);
    }

    UncertaintyReport rep;
    double ent_correct = 0, ent_incorrect = 0;
    std::vector<stats::Prediction> preds(n);
    std::vector<stats::ScoredOutcome> scored(n);
    for (std::size_t i = 0; i < n; ++i) {
        preds[i] = {outcomes[i].confidence, outcomes[i].correct};
        scored[i] = {outcomes[i].entropy, outcomes[i].correct};
        if (outcomes[i].correct) {
            ++rep.n_correct;
            ent_correct += outcomes[i].entropy;
        } else {
            ++rep.n_incorrect;
            ent_incorrect += outcomes[i].entropy;
        }
    }
    rep.accuracy = static_cast<double>(rep.n_correct) / static_cast<double>(n);
    rep.ape_correct = rep.n_correct ? ent_correct / static_cast<double>(rep.n_correct) : 0;
    rep.ape_incorrect =
        rep.n_incorrect ? ent_incorrect / static_cast<double>(rep.n_incorrect) : 0;
    rep.calibration = stats::ece(preds);

    double delta_sum = 0;
    std::size_t delta_n = 0;
    for (int k = 0; k <= 12; ++k) {
        stats::RecoveryPoint pt = stats::accuracy_recovery(scored, 0.05 * k);
        if (pt.accuracy_delta) {
            delta_sum += *pt.accuracy_delta;
            ++delta_n;
        }
        rep.recovery.push_back(pt);
    }
    rep.mean_recovery_delta = delta_n ? delta_sum / static_cast<double>(delta_n) : 0;

    if (ood != nullptr && ood->rows > 0) {
        std::vector<double> ood_ent(ood->rows, 0.0);
        const auto eval_ood = [&](std::size_t j) {
            std::span<const double> x(&ood->data[j * ood->cols], ood->cols);
            InferenceResult r = repeated_inference(net, backend, kind, x, s_samples, seed,
                                                   mix_stream_id(0xd00d, j), counts);
            ood_ent[j] = r.entropy;
        };
        if (exec == Exec::openmp) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
            for (long long j = 0; j < static_cast<long long>(ood->rows); ++j)
                eval_ood(static_cast<std::size_t>(j));
        } else {
            for (std::size_t j = 0; j < ood->rows; ++j) eval_ood(j);
        }
        double s = 0;
        for (double e : ood_ent) s += e;
        rep.ape_ood = s / static_cast<double>(ood->rows);
    }
    return rep;
}

} // namespace bnncim::bnn
