#include "bnncim/model_io.hpp"

#include <sstream>
#include <vector>

#include "bnncim/errors.hpp"
#include "bnncim/textio.hpp"

namespace bnncim::io {

namespace {

using textio::format_double;
using textio::format_int;
using textio::format_u64;

/// Whitespace token scanner with schema-aware errors.
class TokenReader {
  public:
    explicit TokenReader(const std::string& text) {
        std::istringstream in(text);
        std::string tok;
        while (in >> tok) toks_.push_back(std::move(tok));
    }

    const std::string& next(const char* what) {
        if (pos_ >= toks_.size())
            throw schema_error(std::string("unexpected end of input, wanted ") + what);
        return toks_[pos_++];
    }

    void expect(const char* kw) {
        const std::string& t = next(kw);
        if (t != kw)
            throw schema_error(std::string("expected '") + kw + "', found '" + t + "'");
    }

    double next_double(const char* what) {
        try {
            return textio::parse_double(next(what));
        } catch (const std::invalid_argument&) {
            throw schema_error(std::string("bad number for ") + what);
        }
    }

    long long next_int(const char* what) {
        try {
            return textio::parse_int(next(what));
        } catch (const std::invalid_argument&) {
            throw schema_error(std::string("bad integer for ") + what);
        }
    }

    std::size_t next_size(const char* what) {
        const long long v = next_int(what);
        if (v < 0) throw schema_error(std::string("negative count for ") + what);
        return static_cast<std::size_t>(v);
    }

    std::uint64_t next_u64(const char* what) {
        try {
            return textio::parse_u64(next(what));
        } catch (const std::invalid_argument&) {
            throw schema_error(std::string("bad integer for ") + what);
        }
    }

    bool at_end() const { return pos_ == toks_.size(); }

  private:
    std::vector<std::string> toks_;
    std::size_t pos_ = 0;
};

void put_doubles(std::string& out, const Grid<double>& g) {
    for (double v : g.data) {
        out += ' ';
        out += format_double(v);
    }
    out += '\n';
}

void put_ints(std::string& out, const Grid<int>& g) {
    for (int v : g.data) {
        out += ' ';
        out += format_int(v);
    }
    out += '\n';
}

Grid<double> get_doubles(TokenReader& r, std::size_t rows, std::size_t cols, const char* what) {
    Grid<double> g(rows, cols);
    for (double& v : g.data) v = r.next_double(what);
    return g;
}

Grid<int> get_ints(TokenReader& r, std::size_t rows, std::size_t cols, const char* what) {
    Grid<int> g(rows, cols);
    for (int& v : g.data) v = static_cast<int>(r.next_int(what));
    return g;
}

void put_quant(std::string& out, const char* tag, const bnn::QuantizedHead& q) {
    out += tag;
    out += ' ';
    out += format_int(q.mu_q.rows);
    out += ' ';
    out += format_int(q.mu_q.cols);
    out += ' ';
    out += format_double(q.scale);
    out += "\nmu_q";
    put_ints(out, q.mu_q);
    out += "sigma_q";
    put_ints(out, q.sigma_q);
}

bnn::QuantizedHead get_quant(TokenReader& r, const char* tag, int mu_bits, int sigma_bits) {
    r.expect(tag);
    const std::size_t rows = r.next_size("head rows");
    const std::size_t cols = r.next_size("head cols");
    bnn::QuantizedHead q;
    q.mu_bits = mu_bits;
    q.sigma_bits = sigma_bits;
    q.scale = r.next_double("scale");
    r.expect("mu_q");
    q.mu_q = get_ints(r, rows, cols, "mu_q");
    r.expect("sigma_q");
    q.sigma_q = get_ints(r, rows, cols, "sigma_q");
    return q;
}

} // namespace

std::string serialize_model(const bnn::TrainedModel& model) {
    const bnn::BayesModel& net = model.net;
    std::string out = "bnncim-model v1\n";
    out += "beta " + format_double(net.beta) + "\n";
    out += "final_nll " + format_double(net.final_nll) + "\n";
    out += "final_kl " + format_double(net.final_kl) + "\n";
    out += "final_loss " + format_double(net.final_loss) + "\n";

    out += "feature_layers " + format_int(static_cast<long long>(net.features.size())) + "\n";
    for (std::size_t l = 0; l < net.features.size(); ++l) {
        const bnn::DenseLayer& layer = net.features[l];
        out += "layer " + format_int(static_cast<long long>(l)) + ' ' +
               format_int(static_cast<long long>(layer.fan_out())) + ' ' +
               format_int(static_cast<long long>(layer.fan_in())) + ' ' +
               (layer.b.empty() ? "0" : "1") + "\nw";
        put_doubles(out, layer.w);
        if (!layer.b.empty()) {
            out += "b";
            for (double v : layer.b) {
                out += ' ';
                out += format_double(v);
            }
            out += '\n';
        }
    }

    out += "head " + format_int(static_cast<long long>(net.head.fan_out())) + ' ' +
           format_int(static_cast<long long>(net.head.fan_in())) + "\nmu";
    put_doubles(out, net.head.mu);
    out += "rho";
    put_doubles(out, net.head.rho);

    out += "det_head " + format_int(static_cast<long long>(net.det_head.fan_out())) + ' ' +
           format_int(static_cast<long long>(net.det_head.fan_in())) + "\nw";
    put_doubles(out, net.det_head.w);

    out += "quant " + format_int(model.bayes_q.mu_bits) + ' ' +
           format_int(model.bayes_q.sigma_bits) + "\n";
    put_quant(out, "bayes_q", model.bayes_q);
    put_quant(out, "det_q", model.det_q);
    out += "input_quant " + format_int(model.iq.input_bits) + ' ' +
           format_double(model.iq.scale) + "\n";
    out += "end bnncim-model\n";
    return out;
}

bnn::TrainedModel parse_model(const std::string& text) {
    TokenReader r(text);
    r.expect("bnncim-model");
    const std::string& version = r.next("version");
    if (version != "v1") throw schema_error("unsupported model version: " + version);

    bnn::TrainedModel model;
    bnn::BayesModel& net = model.net;
    r.expect("beta");
    net.beta = r.next_double("beta");
    r.expect("final_nll");
    net.final_nll = r.next_double("final_nll");
    r.expect("final_kl");
    net.final_kl = r.next_double("final_kl");
    r.expect("final_loss");
    net.final_loss = r.next_double("final_loss");

    r.expect("feature_layers");
    const std::size_t n_layers = r.next_size("layer count");
    for (std::size_t l = 0; l < n_layers; ++l) {
        r.expect("layer");
        if (r.next_size("layer index") != l) throw schema_error("layer index out of order");
        const std::size_t out = r.next_size("fan out");
        const std::size_t in = r.next_size("fan in");
        const long long has_bias = r.next_int("bias flag");
        bnn::DenseLayer layer;
        r.expect("w");
        layer.w = get_doubles(r, out, in, "layer weight");
        if (has_bias) {
            r.expect("b");
            layer.b.resize(out);
            for (double& v : layer.b) v = r.next_double("layer bias");
        }
        net.features.push_back(std::move(layer));
    }
    if (net.features.empty()) throw schema_error("model has no feature layers");

    r.expect("head");
    {
        const std::size_t out = r.next_size("head rows");
        const std::size_t in = r.next_size("head cols");
        r.expect("mu");
        net.head.mu = get_doubles(r, out, in, "head mu");
        r.expect("rho");
        net.head.rho = get_doubles(r, out, in, "head rho");
    }
    r.expect("det_head");
    {
        const std::size_t out = r.next_size("det head rows");
        const std::size_t in = r.next_size("det head cols");
        r.expect("w");
        net.det_head.w = get_doubles(r, out, in, "det head weight");
    }

    r.expect("quant");
    const int mu_bits = static_cast<int>(r.next_int("mu bits"));
    const int sigma_bits = static_cast<int>(r.next_int("sigma bits"));
    model.bayes_q = get_quant(r, "bayes_q", mu_bits, sigma_bits);
    model.det_q = get_quant(r, "det_q", mu_bits, sigma_bits);
    r.expect("input_quant");
    model.iq.input_bits = static_cast<int>(r.next_int("input bits"));
    model.iq.scale = r.next_double("input scale");
    r.expect("end");
    r.expect("bnncim-model");
    if (!r.at_end()) throw schema_error("trailing content after model");
    return model;
}

void save_model(const bnn::TrainedModel& model, const std::string& path) {
    textio::atomic_write_file(path, serialize_model(model));
}

bnn::TrainedModel load_model(const std::string& path) {
    return parse_model(textio::read_file(path));
}

std::string serialize_offsets(const cal::OffsetMap& map) {
    std::string out = "bnncim-offsets v1\n";
    out += "shape " + format_int(static_cast<long long>(map.offsets.rows)) + ' ' +
           format_int(static_cast<long long>(map.offsets.cols)) + "\n";
    out += "n_cal " + format_int(map.n_cal) + "\n";
    out += "tile_hash " + format_u64(map.tile_hash) + "\n";
    out += "offsets";
    put_doubles(out, map.offsets);
    out += "end bnncim-offsets\n";
    return out;
}

cal::OffsetMap parse_offsets(const std::string& text) {
    TokenReader r(text);
    r.expect("bnncim-offsets");
    const std::string& version = r.next("version");
    if (version != "v1") throw schema_error("unsupported offsets version: " + version);

    cal::OffsetMap map;
    r.expect("shape");
    const std::size_t rows = r.next_size("rows");
    const std::size_t cols = r.next_size("cols");
    r.expect("n_cal");
    map.n_cal = static_cast<int>(r.next_int("n_cal"));
    r.expect("tile_hash");
    map.tile_hash = r.next_u64("tile_hash");
    r.expect("offsets");
    map.offsets = get_doubles(r, rows, cols, "offsets");
    r.expect("end");
    r.expect("bnncim-offsets");
    if (!r.at_end()) throw schema_error("trailing content after offsets");
    return map;
}

void save_offsets(const cal::OffsetMap& map, const std::string& path) {
    textio::atomic_write_file(path, serialize_offsets(map));
}

cal::OffsetMap load_offsets(const std::string& path) {
    return parse_offsets(textio::read_file(path));
}

} // namespace bnncim::io
