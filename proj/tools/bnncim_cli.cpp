// Command-line frontend: every experiment the simulator supports, emitted as
// plot-ready CSV / structured text with a trailing configuration echo so any
// artifact can be reproduced from itself. Deterministic per (config, seed).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bnncim/batch.hpp"
#include "bnncim/bnn.hpp"
#include "bnncim/calibration.hpp"
#include "bnncim/config.hpp"
#include "bnncim/counters.hpp"
#include "bnncim/dataset.hpp"
#include "bnncim/energy.hpp"
#include "bnncim/errors.hpp"
#include "bnncim/exec.hpp"
#include "bnncim/grng.hpp"
#include "bnncim/model_io.hpp"
#include "bnncim/stats.hpp"
#include "bnncim/textio.hpp"
#include "bnncim/tile.hpp"

namespace {

using namespace bnncim;
using textio::format_double;
using textio::format_int;
using textio::format_u64;

/// Collects the resolved flag values of a run; rendered as sorted
/// `# key = value` lines at the end of each artifact. Each such line,
/// stripped of its "# " prefix, is a valid --config entry for the same
/// command.
class Echo {
  public:
    void add_str(const std::string& k, const std::string& v) { cfg_.set(k, v); }
    void add_num(const std::string& k, double v) { cfg_.set(k, format_double(v)); }
    void add_int(const std::string& k, long long v) { cfg_.set(k, format_int(v)); }
    void add_u64(const std::string& k, std::uint64_t v) { cfg_.set(k, format_u64(v)); }
    void add_bool(const std::string& k, bool v) { cfg_.set(k, v ? "true" : "false"); }
    void add_list(const std::string& k, const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ',';
            s += format_double(v[i]);
        }
        cfg_.set(k, s);
    }
    std::string block() const { return cfg_.echo_block(); }

  private:
    Config cfg_;
};

Exec parse_exec(const std::string& s) {
    return s == "serial" ? Exec::serial : Exec::openmp;
}

/// CLI11 only consults config files on the root app, never on subcommands,
/// so `--config FILE` is expanded here instead: every `key = value` line
/// becomes a trailing `--key=value` argument unless the flag was given
/// explicitly, keeping command-line values authoritative. Lines starting
/// with '#' are comments, so a saved configuration echo block works as-is.
std::vector<std::string> expand_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);

    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
    }
    if (path.empty()) return args;

    const Config cfg = Config::parse_file(path);
    for (const auto& [key, value] : cfg.entries()) {
        const std::string flag = "--" + key;
        bool given = false;
        for (const std::string& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) {
                given = true;
                break;
            }
        if (!given) args.push_back(flag + "=" + value);
    }
    return args;
}

int rand_int(RngStream& stream, int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(stream.next_u64() % span);
}

void write_counts_csv(const std::string& path, const CountsSnapshot& s,
                      const std::string& echo) {
    std::string out = "grng_samples,mvm_ops,calibrations,cycles\n";
    out += format_u64(s.grng_samples) + ',' + format_u64(s.mvm_ops) + ',' +
           format_u64(s.calibrations) + ',' + format_u64(s.cycles) + '\n';
    out += echo;
    textio::atomic_write_file(path, out);
}

CountsSnapshot read_counts_csv(const std::string& path) {
    const std::string text = textio::read_file(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string_view line = textio::trim(std::string_view(text).substr(start, end - start));
        if (!line.empty() && line[0] != '#') lines.emplace_back(line);
        start = end + 1;
    }
    if (lines.size() < 2 || lines[0] != "grng_samples,mvm_ops,calibrations,cycles")
        throw schema_error("counts file " + path + ": unrecognized layout");
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = lines[1].find(',', pos);
        fields.push_back(lines[1].substr(pos, comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (fields.size() != 4) throw schema_error("counts file " + path + ": wrong field count");
    CountsSnapshot s;
    s.grng_samples = textio::parse_u64(fields[0]);
    s.mvm_ops = textio::parse_u64(fields[1]);
    s.calibrations = textio::parse_u64(fields[2]);
    s.cycles = textio::parse_u64(fields[3]);
    return s;
}

// ---------------------------------------------------------------- grng-sweep

struct SweepArgs {
    std::uint64_t seed = 1;
    std::string out;
    std::string counts_out;
    std::string sweep = "vr";
    std::string grid_spec = "default";
    long long n_samples = 2500;
    double censor_floor = 0.0;
    bool fit_endpoints = true;
    std::string exec = "openmp";
};

std::vector<double> split_doubles(std::string_view spec) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= spec.size() && !spec.empty()) {
        std::size_t comma = spec.find(',', start);
        if (comma == std::string_view::npos) comma = spec.size();
        const std::string_view field = textio::trim(spec.substr(start, comma - start));
        if (!field.empty()) out.push_back(textio::parse_double(field));
        start = comma + 1;
        if (comma == spec.size()) break;
    }
    return out;
}

void run_grng_sweep(const SweepArgs& a) {
    if (a.n_samples < 3) throw degenerate_input("grng-sweep: need n-samples >= 3");
    std::vector<double> grid;
    if (a.grid_spec == "default") {
        if (a.sweep == "vr")
            grid = {0.15, 0.16, 0.17, 0.18, 0.19, 0.2, 0.21};
        else
            for (const auto& pt : grng::thermal_sweep_reference()) grid.push_back(pt.temp_c);
    } else if (a.grid_spec != "none") {
        grid = split_doubles(a.grid_spec);
    }
    const grng::GrngPhysics phy = grng::nominal_physics();
    grng::LeakageModel leak = grng::nominal_leakage();
    if (a.sweep == "temperature" && a.fit_endpoints) {
        const auto table = grng::thermal_sweep_reference();
        const grng::LatencyPoint endpoints[2] = {
            {grng::celsius_to_kelvin(table.front().temp_c), table.front().latency_s},
            {grng::celsius_to_kelvin(table.back().temp_c), table.back().latency_s},
        };
        leak = grng::fit_temperature_model(phy, endpoints);
    }

    WorkloadCounts counts;
    std::string csv =
        "value,i_leak_a,latency_mean_s,latency_analytic_s,width_mean_s,width_sd_s,"
        "t_unit_analytic_s,qq_r,censored_fraction\n";
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const double value = grid[idx];
        const double v_r = a.sweep == "vr" ? value : grng::k_nominal_v_r;
        const double temp_k =
            a.sweep == "vr" ? grng::k_nominal_temp_k : grng::celsius_to_kelvin(value);

        const auto pulses = batch::pulse_batch(
            phy, grng::GrngInstance{}, leak, v_r, temp_k,
            static_cast<std::size_t>(a.n_samples), mix_stream_id(0x57ee9, a.seed, idx),
            parse_exec(a.exec), &counts);

        std::vector<double> widths(pulses.size()), latencies(pulses.size());
        std::size_t n_censored = 0;
        for (std::size_t i = 0; i < pulses.size(); ++i) {
            widths[i] = pulses[i].signed_width;
            latencies[i] = pulses[i].latency;
            if (grng::censor(pulses[i], a.censor_floor).censored) ++n_censored;
        }
        const auto wsum = stats::summarize(widths);
        const auto lsum = stats::summarize(latencies);
        const grng::DischargeParams dp =
            grng::discharge_params(phy, grng::GrngInstance{}, leak, v_r, temp_k);

        csv += format_double(value) + ',' +
               format_double(grng::leakage_current(leak, v_r, temp_k)) + ',' +
               format_double(lsum.mean) + ',' +
               format_double(std::max(dp.mu_p, dp.mu_n)) + ',' +
               format_double(wsum.mean) + ',' + format_double(wsum.sd) + ',' +
               format_double(dp.t_unit()) + ',' + format_double(stats::qq_rvalue(widths)) +
               ',' +
               format_double(static_cast<double>(n_censored) /
                             static_cast<double>(pulses.size())) +
               '\n';
    }

    Echo echo;
    echo.add_u64("seed", a.seed);
    echo.add_str("sweep", a.sweep);
    echo.add_list("grid", grid);
    echo.add_int("n-samples", a.n_samples);
    echo.add_num("censor-floor", a.censor_floor);
    echo.add_bool("fit-endpoints", a.fit_endpoints);
    echo.add_str("exec", a.exec);
    csv += echo.block();
    textio::atomic_write_file(a.out, csv);
    if (!a.counts_out.empty()) write_counts_csv(a.counts_out, counts.snapshot(), echo.block());
}

// ----------------------------------------------------------------- calibrate

struct CalibrateArgs {
    std::uint64_t seed = 1;
    std::string out;
    std::string report;
    std::string apply;
    std::string counts_out;
    long long rows = 64;
    long long words = 8;
    double current_sd = 0.1;
    double cap_sd = 0.05;
    long long n_cal = 4096;
    std::string exec = "openmp";
};

void run_calibrate(const CalibrateArgs& a) {
    cim::TileConfig cfg;
    cfg.rows = static_cast<int>(a.rows);
    cfg.words_per_row = static_cast<int>(a.words);
    cim::Tile tile = cim::make_tile(cfg, {a.current_sd, a.cap_sd}, a.seed);

    Echo echo;
    echo.add_u64("seed", a.seed);
    echo.add_int("rows", a.rows);
    echo.add_int("words", a.words);
    echo.add_num("current-sd", a.current_sd);
    echo.add_num("cap-sd", a.cap_sd);
    echo.add_int("n-cal", a.n_cal);
    echo.add_str("exec", a.exec);

    if (!a.apply.empty()) {
        const cal::OffsetMap map = io::load_offsets(a.apply);
        const cal::ApplyReport rep = cal::apply_offsets(tile, map);
        std::cout << "applied offsets from " << a.apply << " (clamp events: "
                  << rep.clamp_events << ")\n";
        return;
    }
    if (a.out.empty()) throw degenerate_input("calibrate: --out is required");

    WorkloadCounts counts;
    const cal::OffsetMap map =
        cal::measure_offsets(tile, static_cast<int>(a.n_cal), a.seed, parse_exec(a.exec), &counts);
    io::save_offsets(map, a.out);

    double max_resid = 0;
    std::string report = "row,word,measured_eps,true_eps,residual_eps\n";
    for (int i = 0; i < cfg.rows; ++i)
        for (int j = 0; j < cfg.words_per_row; ++j) {
            const double truth = cal::true_offset_eps(tile, i, j);
            const double resid = map.offsets(i, j) - truth;
            max_resid = std::max(max_resid, std::abs(resid));
            report += format_int(i) + ',' + format_int(j) + ',' +
                      format_double(map.offsets(i, j)) + ',' + format_double(truth) + ',' +
                      format_double(resid) + '\n';
        }
    report += echo.block();
    if (!a.report.empty()) textio::atomic_write_file(a.report, report);

    std::cout << "wrote " << a.out << "\nmax_abs_residual_eps = " << format_double(max_resid)
              << " (CLT guide 4/sqrt(n_cal) = "
              << format_double(4.0 / std::sqrt(static_cast<double>(a.n_cal))) << ")\n";
    if (!a.counts_out.empty()) write_counts_csv(a.counts_out, counts.snapshot(), echo.block());
}

// --------------------------------------------------------------------- train

struct TrainArgs {
    std::uint64_t seed = 1;
    std::string out;
    long long n_train = 1024;
    double noise = 0.2;
    std::vector<long long> hidden = {16, 16};
    long long det_steps = 2000;
    long long vi_steps = 1500;
    double det_lr = 0.01;
    double vi_lr = 0.01;
    double beta = -1.0;
    double sigma_init = 0.1;
    long long mu_bits = 8;
    long long sigma_bits = 4;
    long long input_bits = 4;
};

double float_accuracy(const bnn::BayesModel& net, const bnn::Dataset& ds, bool bayes_mean) {
    std::size_t correct = 0;
    std::vector<double> x(ds.x.cols);
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (std::size_t c = 0; c < ds.x.cols; ++c) x[c] = ds.x(r, c);
        const std::vector<double> f = net.feature_forward(x);
        std::size_t best = 0;
        double best_v = 0;
        for (std::size_t k = 0; k < net.n_classes(); ++k) {
            double acc = 0;
            for (std::size_t c = 0; c < f.size(); ++c)
                acc += (bayes_mean ? net.head.mu(k, c) : net.det_head.w(k, c)) * f[c];
            if (k == 0 || acc > best_v) {
                best = k;
                best_v = acc;
            }
        }
        if (best == static_cast<std::size_t>(ds.labels[r])) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

void run_train(const TrainArgs& a) {
    if (a.out.empty()) throw degenerate_input("train: --out is required");
    const bnn::Dataset train = bnn::two_moons(static_cast<std::size_t>(a.n_train), a.noise,
                                              mix_stream_id(0x7ea10, a.seed));

    bnn::TrainConfig cfg;
    cfg.hidden.assign(a.hidden.begin(), a.hidden.end());
    cfg.det_steps = static_cast<std::size_t>(a.det_steps);
    cfg.vi_steps = static_cast<std::size_t>(a.vi_steps);
    cfg.det_lr = a.det_lr;
    cfg.vi_lr = a.vi_lr;
    cfg.beta = a.beta;
    cfg.sigma_init = a.sigma_init;
    cfg.seed = a.seed;

    bnn::BayesModel net = bnn::train_vi(train, cfg);
    const bnn::TrainedModel model =
        bnn::finalize_model(std::move(net), train, static_cast<int>(a.mu_bits),
                            static_cast<int>(a.sigma_bits), static_cast<int>(a.input_bits));
    io::save_model(model, a.out);

    Echo echo;
    echo.add_u64("seed", a.seed);
    echo.add_int("n-train", a.n_train);
    echo.add_num("noise", a.noise);
    {
        std::vector<double> h(a.hidden.begin(), a.hidden.end());
        echo.add_list("hidden", h);
    }
    echo.add_int("det-steps", a.det_steps);
    echo.add_int("vi-steps", a.vi_steps);
    echo.add_num("det-lr", a.det_lr);
    echo.add_num("vi-lr", a.vi_lr);
    echo.add_num("beta", a.beta);
    echo.add_num("sigma-init", a.sigma_init);
    echo.add_int("mu-bits", a.mu_bits);
    echo.add_int("sigma-bits", a.sigma_bits);
    echo.add_int("input-bits", a.input_bits);

    std::string summary = "metric,value\n";
    summary += "beta," + format_double(model.net.beta) + '\n';
    summary += "final_nll," + format_double(model.net.final_nll) + '\n';
    summary += "final_kl," + format_double(model.net.final_kl) + '\n';
    summary += "final_loss," + format_double(model.net.final_loss) + '\n';
    summary += "train_accuracy_bayes_mean," +
               format_double(float_accuracy(model.net, train, true)) + '\n';
    summary += "train_accuracy_det," + format_double(float_accuracy(model.net, train, false)) +
               '\n';
    summary += "weight_scale_bayes," + format_double(model.bayes_q.scale) + '\n';
    summary += "weight_scale_det," + format_double(model.det_q.scale) + '\n';
    summary += "input_scale," + format_double(model.iq.scale) + '\n';
    summary += echo.block();
    textio::atomic_write_file(a.out + ".summary.csv", summary);
    std::cout << "wrote " << a.out << "\nfinal_nll = " << format_double(model.net.final_nll)
              << ", final_kl = " << format_double(model.net.final_kl) << "\n";
}

// --------------------------------------------------------------------- infer

struct InferArgs {
    std::uint64_t seed = 1;
    std::string model;
    std::string out;
    std::string counts_out;
    long long n_test = 1024;
    double noise = 0.2;
    long long n_ood = 256;
    long long s_samples = 32;
    std::string backend = "tile";
    std::string head = "bayes";
    double current_sd = 0.1;
    double cap_sd = 0.05;
    long long n_cal = 1024;
    std::string exec = "openmp";
};

void run_infer(const InferArgs& a) {
    if (a.out.empty()) throw degenerate_input("infer: --out is required");
    if (a.backend == "ideal" && a.head == "det")
        throw degenerate_input("infer: the ideal backend evaluates the Gaussian head only");

    const bnn::TrainedModel model = io::load_model(a.model);
    const bnn::Dataset test = bnn::two_moons(static_cast<std::size_t>(a.n_test), a.noise,
                                             mix_stream_id(0x7e570, a.seed));
    const Grid<double> ood =
        a.n_ood > 0 ? bnn::far_ring(static_cast<std::size_t>(a.n_ood), mix_stream_id(0x00d0, a.seed))
                    : Grid<double>();

    const bnn::Backend kind = a.backend == "ideal" ? bnn::Backend::ideal
                              : a.backend == "tile-mean" ? bnn::Backend::tile_mean_only
                                                         : bnn::Backend::tile_stochastic;
    const bnn::HeadKind head =
        a.head == "det" ? bnn::HeadKind::deterministic : bnn::HeadKind::bayes;

    WorkloadCounts counts;
    bnn::TileBackend backend;
    const bnn::TileBackend* backend_ptr = nullptr;
    if (kind != bnn::Backend::ideal) {
        backend = bnn::make_tile_backend(model, head, {a.current_sd, a.cap_sd}, a.seed,
                                         static_cast<int>(a.n_cal));
        if (a.n_cal > 0) counts.add_calibrations(1);
        backend_ptr = &backend;
    }

    const bnn::UncertaintyReport rep = bnn::evaluate_uncertainty(
        model.net, backend_ptr, kind, test, ood.rows ? &ood : nullptr,
        static_cast<std::size_t>(a.s_samples), a.seed, parse_exec(a.exec), &counts);

    Echo echo;
    echo.add_u64("seed", a.seed);
    echo.add_str("model", a.model);
    echo.add_int("n-test", a.n_test);
    echo.add_num("noise", a.noise);
    echo.add_int("n-ood", a.n_ood);
    echo.add_int("s-samples", a.s_samples);
    echo.add_str("backend", a.backend);
    echo.add_str("head", a.head);
    echo.add_num("current-sd", a.current_sd);
    echo.add_num("cap-sd", a.cap_sd);
    echo.add_int("n-cal", a.n_cal);
    echo.add_str("exec", a.exec);

    std::string csv = "metric,value\n";
    csv += "accuracy," + format_double(rep.accuracy) + '\n';
    csv += "ape_correct," + format_double(rep.ape_correct) + '\n';
    csv += "ape_incorrect," + format_double(rep.ape_incorrect) + '\n';
    csv += "n_correct," + format_int(static_cast<long long>(rep.n_correct)) + '\n';
    csv += "n_incorrect," + format_int(static_cast<long long>(rep.n_incorrect)) + '\n';
    csv += "ece," + format_double(rep.calibration.ece) + '\n';
    csv += "mean_recovery_delta," + format_double(rep.mean_recovery_delta) + '\n';
    csv += "ape_ood," + format_double(rep.ape_ood) + '\n';
    csv += "\nthreshold,retained_fraction,accuracy_delta\n";
    for (const auto& pt : rep.recovery) {
        csv += format_double(pt.threshold) + ',' + format_double(pt.retained_fraction) + ',';
        if (pt.accuracy_delta) csv += format_double(*pt.accuracy_delta);
        csv += '\n';
    }
    csv += echo.block();
    textio::atomic_write_file(a.out, csv);
    if (!a.counts_out.empty()) write_counts_csv(a.counts_out, counts.snapshot(), echo.block());
    std::cout << "accuracy = " << format_double(rep.accuracy)
              << ", ece = " << format_double(rep.calibration.ece) << "\n";
}

// ----------------------------------------------------------------------- mvm

struct MvmArgs {
    std::uint64_t seed = 1;
    std::string out;
    std::string counts_out;
    long long rows = 64;
    long long words = 8;
    long long mu_bits = 8;
    long long sigma_bits = 4;
    long long input_bits = 4;
    long long adc_bits = 6;
    bool ideal_adc = false;
    bool sigma_zero = false;
    double current_sd = 0.0;
    double cap_sd = 0.0;
    std::string mode = "stochastic";
    long long n_calls = 1;
    std::vector<long long> x;
    std::string exec = "openmp";
};

void run_mvm(const MvmArgs& a) {
    if (a.out.empty()) throw degenerate_input("mvm: --out is required");
    cim::TileConfig cfg;
    cfg.rows = static_cast<int>(a.rows);
    cfg.words_per_row = static_cast<int>(a.words);
    cfg.mu_bits = static_cast<int>(a.mu_bits);
    cfg.sigma_bits = static_cast<int>(a.sigma_bits);
    cfg.input_bits = static_cast<int>(a.input_bits);
    cfg.adc_bits = static_cast<int>(a.adc_bits);
    cfg.adc_full_scale = static_cast<double>(cfg.rows) * cfg.x_max();
    if (a.ideal_adc) cfg = cfg.with_ideal_adc();

    cim::Tile tile = cim::make_tile(cfg, {a.current_sd, a.cap_sd}, a.seed);
    {
        RngStream wstream(a.seed, mix_stream_id(0x3e19));
        Grid<int> mu(cfg.rows, cfg.words_per_row), sigma(cfg.rows, cfg.words_per_row, 0);
        for (int& v : mu.data) v = rand_int(wstream, -cfg.mu_max(), cfg.mu_max());
        if (!a.sigma_zero)
            for (int& v : sigma.data) v = rand_int(wstream, 0, cfg.sigma_max());
        cim::store_weights(tile, mu, sigma);
    }

    std::vector<int> x(cfg.rows);
    if (a.x.empty()) {
        RngStream xstream(a.seed, mix_stream_id(0x11d0));
        for (int& v : x) v = rand_int(xstream, 0, cfg.x_max());
    } else {
        if (a.x.size() != static_cast<std::size_t>(cfg.rows))
            throw degenerate_input("mvm: --x length must equal --rows");
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<int>(a.x[i]);
    }

    WorkloadCounts counts;
    std::string csv = "call";
    for (int j = 0; j < cfg.words_per_row; ++j) csv += ",y" + format_int(j);
    csv += '\n';
    if (a.mode == "mean") {
        for (long long c = 0; c < a.n_calls; ++c) {
            const cim::MvmResult r =
                cim::tile_mvm(tile, x, nullptr, cim::MvmMode::mean_only, nullptr, &counts);
            csv += format_int(c);
            for (long long y : r.y) csv += ',' + format_int(y);
            csv += '\n';
        }
    } else {
        const Grid<long long> ys = batch::mvm_batch(
            tile, x, static_cast<std::size_t>(a.n_calls), a.seed, parse_exec(a.exec), &counts);
        for (std::size_t c = 0; c < ys.rows; ++c) {
            csv += format_int(static_cast<long long>(c));
            for (std::size_t j = 0; j < ys.cols; ++j) csv += ',' + format_int(ys(c, j));
            csv += '\n';
        }
    }

    Echo echo;
    echo.add_u64("seed", a.seed);
    echo.add_int("rows", a.rows);
    echo.add_int("words", a.words);
    echo.add_int("mu-bits", a.mu_bits);
    echo.add_int("sigma-bits", a.sigma_bits);
    echo.add_int("input-bits", a.input_bits);
    echo.add_int("adc-bits", a.adc_bits);
    echo.add_bool("ideal-adc", a.ideal_adc);
    echo.add_bool("sigma-zero", a.sigma_zero);
    echo.add_num("current-sd", a.current_sd);
    echo.add_num("cap-sd", a.cap_sd);
    echo.add_str("mode", a.mode);
    echo.add_int("n-calls", a.n_calls);
    echo.add_str("exec", a.exec);
    csv += echo.block();
    textio::atomic_write_file(a.out, csv);
    if (!a.counts_out.empty()) write_counts_csv(a.counts_out, counts.snapshot(), echo.block());
}

// -------------------------------------------------------------------- report

struct ReportArgs {
    std::string counts;
    std::string out;
    std::uint64_t grng_samples = 0;
    std::uint64_t mvm_ops = 0;
    std::uint64_t calibrations = 0;
    std::uint64_t cycles = 0;
    double e_grng_fj = 360.0;
    double e_mvm_fj = 672.0;
    double e_cal_nj = 3.6;
    double cycle_ns = 100.0;
    long long grng_count = 512;
    double ops_per_cycle = 10240.0;
};

void run_report(const ReportArgs& a) {
    if (a.out.empty()) throw degenerate_input("report: --out is required");
    CountsSnapshot counts;
    if (!a.counts.empty()) {
        counts = read_counts_csv(a.counts);
    } else {
        counts.grng_samples = a.grng_samples;
        counts.mvm_ops = a.mvm_ops;
        counts.calibrations = a.calibrations;
        counts.cycles = a.cycles;
    }

    energy::EnergyModel model;
    model.e_grng_sample = a.e_grng_fj * 1e-15;
    model.e_mvm_op = a.e_mvm_fj * 1e-15;
    model.e_calibration_total = a.e_cal_nj * 1e-9;
    model.cycle_time = a.cycle_ns * 1e-9;
    model.grng_count = static_cast<int>(a.grng_count);
    model.ops_per_cycle = a.ops_per_cycle;
    model.validate();

    const energy::EnergyReport rep = energy::tally(model, counts);

    Echo echo;
    echo.add_str("counts", a.counts);
    echo.add_u64("grng-samples", counts.grng_samples);
    echo.add_u64("mvm-ops", counts.mvm_ops);
    echo.add_u64("calibrations", counts.calibrations);
    echo.add_u64("cycles", counts.cycles);
    echo.add_num("e-grng-fj", a.e_grng_fj);
    echo.add_num("e-mvm-fj", a.e_mvm_fj);
    echo.add_num("e-cal-nj", a.e_cal_nj);
    echo.add_num("cycle-ns", a.cycle_ns);
    echo.add_int("grng-count", a.grng_count);
    echo.add_num("ops-per-cycle", a.ops_per_cycle);

    std::string out = energy::render_report(rep, model);
    out += '\n';
    out += energy::render_comparison();
    out += '\n';
    out += echo.block();
    textio::atomic_write_file(a.out, out);
    std::cout << "total_energy_j = " << format_double(rep.total_energy) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Behavioral simulator of a Bayesian-inference compute-in-memory tile "
                 "with in-array thermal-noise Gaussian generators"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "bnncim 1.0.0");

    SweepArgs sweep;
    CLI::App* sweep_cmd = app.add_subcommand(
        "grng-sweep", "Sweep v_r or temperature; per point: latency, width SD, normality");
    sweep_cmd->set_config("--config");
    sweep_cmd->add_option("--seed", sweep.seed)->capture_default_str();
    sweep_cmd->add_option("--out", sweep.out, "Output CSV")->required();
    sweep_cmd->add_option("--counts-out", sweep.counts_out, "Workload counter CSV");
    sweep_cmd->add_option("--sweep", sweep.sweep, "Swept variable")
        ->check(CLI::IsMember({"vr", "temperature"}))
        ->capture_default_str();
    sweep_cmd->add_option("--grid", sweep.grid_spec,
                          "Comma-separated grid points (V or degrees C); 'none' for an "
                          "empty grid, 'default' for the built-in grid")
        ->capture_default_str();
    sweep_cmd->add_option("--n-samples", sweep.n_samples)->capture_default_str();
    sweep_cmd->add_option("--censor-floor", sweep.censor_floor, "Metrology floor, seconds")
        ->capture_default_str();
    sweep_cmd->add_flag("--fit-endpoints,!--no-fit-endpoints", sweep.fit_endpoints,
                        "Fit the leakage model to the measured thermal endpoints");
    sweep_cmd->add_option("--exec", sweep.exec)
        ->check(CLI::IsMember({"serial", "openmp"}))
        ->capture_default_str();

    CalibrateArgs cal_args;
    CLI::App* cal_cmd = app.add_subcommand(
        "calibrate", "Measure per-word GRNG offsets (or apply a saved offset map)");
    cal_cmd->set_config("--config");
    cal_cmd->add_option("--seed", cal_args.seed)->capture_default_str();
    cal_cmd->add_option("--out", cal_args.out, "Offset map artifact");
    cal_cmd->add_option("--report", cal_args.report, "Residual CSV");
    cal_cmd->add_option("--apply", cal_args.apply, "Apply this saved offset map instead");
    cal_cmd->add_option("--counts-out", cal_args.counts_out);
    cal_cmd->add_option("--rows", cal_args.rows)->capture_default_str();
    cal_cmd->add_option("--words", cal_args.words)->capture_default_str();
    cal_cmd->add_option("--current-sd", cal_args.current_sd)->capture_default_str();
    cal_cmd->add_option("--cap-sd", cal_args.cap_sd)->capture_default_str();
    cal_cmd->add_option("--n-cal", cal_args.n_cal)->capture_default_str();
    cal_cmd->add_option("--exec", cal_args.exec)
        ->check(CLI::IsMember({"serial", "openmp"}))
        ->capture_default_str();

    TrainArgs train;
    CLI::App* train_cmd =
        app.add_subcommand("train", "Two-phase fit: deterministic features, variational head");
    train_cmd->set_config("--config");
    train_cmd->add_option("--seed", train.seed)->capture_default_str();
    train_cmd->add_option("--out", train.out, "Model artifact")->required();
    train_cmd->add_option("--n-train", train.n_train)->capture_default_str();
    train_cmd->add_option("--noise", train.noise)->capture_default_str();
    train_cmd->add_option("--hidden", train.hidden, "Hidden layer widths")->delimiter(',');
    train_cmd->add_option("--det-steps", train.det_steps)->capture_default_str();
    train_cmd->add_option("--vi-steps", train.vi_steps)->capture_default_str();
    train_cmd->add_option("--det-lr", train.det_lr)->capture_default_str();
    train_cmd->add_option("--vi-lr", train.vi_lr)->capture_default_str();
    train_cmd->add_option("--beta", train.beta, "KL weight; negative selects 1/n_train")
        ->capture_default_str();
    train_cmd->add_option("--sigma-init", train.sigma_init)->capture_default_str();
    train_cmd->add_option("--mu-bits", train.mu_bits)->capture_default_str();
    train_cmd->add_option("--sigma-bits", train.sigma_bits)->capture_default_str();
    train_cmd->add_option("--input-bits", train.input_bits)->capture_default_str();

    InferArgs infer;
    CLI::App* infer_cmd = app.add_subcommand(
        "infer", "Repeated-sampling inference and uncertainty metrics on a trained model");
    infer_cmd->set_config("--config");
    infer_cmd->add_option("--seed", infer.seed)->capture_default_str();
    infer_cmd->add_option("--model", infer.model, "Model artifact")->required();
    infer_cmd->add_option("--out", infer.out, "Metrics CSV")->required();
    infer_cmd->add_option("--counts-out", infer.counts_out);
    infer_cmd->add_option("--n-test", infer.n_test)->capture_default_str();
    infer_cmd->add_option("--noise", infer.noise)->capture_default_str();
    infer_cmd->add_option("--n-ood", infer.n_ood)->capture_default_str();
    infer_cmd->add_option("--s-samples", infer.s_samples)->capture_default_str();
    infer_cmd->add_option("--backend", infer.backend)
        ->check(CLI::IsMember({"tile", "tile-mean", "ideal"}))
        ->capture_default_str();
    infer_cmd->add_option("--head", infer.head)
        ->check(CLI::IsMember({"bayes", "det"}))
        ->capture_default_str();
    infer_cmd->add_option("--current-sd", infer.current_sd)->capture_default_str();
    infer_cmd->add_option("--cap-sd", infer.cap_sd)->capture_default_str();
    infer_cmd->add_option("--n-cal", infer.n_cal, "0 skips offset calibration")
        ->capture_default_str();
    infer_cmd->add_option("--exec", infer.exec)
        ->check(CLI::IsMember({"serial", "openmp"}))
        ->capture_default_str();

    MvmArgs mvm;
    CLI::App* mvm_cmd = app.add_subcommand(
        "mvm", "Matrix-vector products on a seeded random tile (fixture driver)");
    mvm_cmd->set_config("--config");
    mvm_cmd->add_option("--seed", mvm.seed)->capture_default_str();
    mvm_cmd->add_option("--out", mvm.out, "Output CSV")->required();
    mvm_cmd->add_option("--counts-out", mvm.counts_out);
    mvm_cmd->add_option("--rows", mvm.rows)->capture_default_str();
    mvm_cmd->add_option("--words", mvm.words)->capture_default_str();
    mvm_cmd->add_option("--mu-bits", mvm.mu_bits)->capture_default_str();
    mvm_cmd->add_option("--sigma-bits", mvm.sigma_bits)->capture_default_str();
    mvm_cmd->add_option("--input-bits", mvm.input_bits)->capture_default_str();
    mvm_cmd->add_option("--adc-bits", mvm.adc_bits)->capture_default_str();
    mvm_cmd->add_flag("--ideal-adc", mvm.ideal_adc, "Unit-LSB unclipped ADC profile");
    mvm_cmd->add_flag("--sigma-zero", mvm.sigma_zero, "Zero all sigma weights");
    mvm_cmd->add_option("--current-sd", mvm.current_sd)->capture_default_str();
    mvm_cmd->add_option("--cap-sd", mvm.cap_sd)->capture_default_str();
    mvm_cmd->add_option("--mode", mvm.mode)
        ->check(CLI::IsMember({"stochastic", "mean"}))
        ->capture_default_str();
    mvm_cmd->add_option("--n-calls", mvm.n_calls)->capture_default_str();
    mvm_cmd->add_option("--x", mvm.x, "Input codes (default: seeded random)")->delimiter(',');
    mvm_cmd->add_option("--exec", mvm.exec)
        ->check(CLI::IsMember({"serial", "openmp"}))
        ->capture_default_str();

    ReportArgs report;
    CLI::App* report_cmd = app.add_subcommand(
        "report", "Energy/throughput ledger report plus the published-hardware comparison");
    report_cmd->set_config("--config");
    report_cmd->add_option("--counts", report.counts, "Counter CSV from a previous run");
    report_cmd->add_option("--out", report.out, "Report text file")->required();
    report_cmd->add_option("--grng-samples", report.grng_samples)->capture_default_str();
    report_cmd->add_option("--mvm-ops", report.mvm_ops)->capture_default_str();
    report_cmd->add_option("--calibrations", report.calibrations)->capture_default_str();
    report_cmd->add_option("--cycles", report.cycles)->capture_default_str();
    report_cmd->add_option("--e-grng-fj", report.e_grng_fj)->capture_default_str();
    report_cmd->add_option("--e-mvm-fj", report.e_mvm_fj)->capture_default_str();
    report_cmd->add_option("--e-cal-nj", report.e_cal_nj)->capture_default_str();
    report_cmd->add_option("--cycle-ns", report.cycle_ns)->capture_default_str();
    report_cmd->add_option("--grng-count", report.grng_count)->capture_default_str();
    report_cmd->add_option("--ops-per-cycle", report.ops_per_cycle)->capture_default_str();

    sweep_cmd->callback([&] { run_grng_sweep(sweep); });
    cal_cmd->callback([&] { run_calibrate(cal_args); });
    train_cmd->callback([&] { run_train(train); });
    infer_cmd->callback([&] { run_infer(infer); });
    mvm_cmd->callback([&] { run_mvm(mvm); });
    report_cmd->callback([&] { run_report(report); });

    try {
        std::vector<std::string> args = expand_config_args(argc, argv);
        std::reverse(args.begin(), args.end()); // CLI11 consumes back to front
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const staleness_error& e) {
        std::cerr << "error (stale calibration): " << e.what() << "\n";
        return 3;
    } catch (const training_failure& e) {
        std::cerr << "error (training diverged at step " << e.step << "): " << e.what() << "\n";
        return 4;
    } catch (const schema_error& e) {
        std::cerr << "error (artifact schema): " << e.what() << "\n";
        return 5;
    } catch (const io_error& e) {
        std::cerr << "error (I/O): " << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "error (invalid arguments): " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
