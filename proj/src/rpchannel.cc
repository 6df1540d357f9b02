#include "eacsi/rpchannel.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace eacsi {

namespace {

constexpr double kProbTol = 1e-9;

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string short_num(double x) {
    std::ostringstream os;
    os.precision(3);
    os << x;
    return os.str();
}

}  // namespace

void RandomParameterChannel::validate() const {
    if (branches.empty()) {
        throw InvalidArgument("channel '" + name + "' has no parameter branches");
    }
    if (labels.size() != branches.size() || probs.size() != branches.size()) {
        throw InvalidArgument("channel '" + name + "': labels, probs and branches differ in length");
    }
    double total = 0.0;
    for (size_t s = 0; s < probs.size(); ++s) {
        if (!(probs[s] >= 0.0) || !std::isfinite(probs[s])) {
            throw InvalidArgument("param s=" + labels[s] + " probability " + short_num(probs[s]) + " is negative");
        }
        total += probs[s];
    }
    if (std::abs(total - 1.0) > kProbTol) {
        throw InvalidArgument("parameter probabilities sum to " + g17(total) + " instead of 1");
    }
    for (size_t s = 0; s < branches.size(); ++s) {
        const auto& b = branches[s];
        if (b.dim_in() != dim_in() || b.dim_out() != dim_out()) {
            throw InvalidArgument("branch s=" + labels[s] + " has dims " + std::to_string(b.dim_in()) + "->" +
                                  std::to_string(b.dim_out()) + ", other branches have " +
                                  std::to_string(dim_in()) + "->" + std::to_string(dim_out()));
        }
        for (size_t t = 0; t < s; ++t) {
            if (labels[t] == labels[s]) {
                throw InvalidArgument("parameter label '" + labels[s] + "' appears twice");
            }
        }
    }
}

int RandomParameterChannel::index_of(const std::string& label) const {
    for (size_t s = 0; s < labels.size(); ++s) {
        if (labels[s] == label) {
            return static_cast<int>(s);
        }
    }
    throw InvalidArgument("unknown parameter symbol '" + label + "'");
}

void EncoderFamily::validate(int num_params) const {
    if (static_cast<int>(maps.size()) != num_params) {
        throw InvalidArgument("encoder family has " + std::to_string(maps.size()) + " maps for " +
                              std::to_string(num_params) + " parameter values");
    }
    for (size_t s = 0; s < maps.size(); ++s) {
        if (maps[s].dim_in() != dim_k || maps[s].dim_out() != dim_a) {
            throw InvalidArgument("encoder map s=" + std::to_string(s) + " is not " + std::to_string(dim_k) + "->" +
                                  std::to_string(dim_a));
        }
        if (isometric) {
            if (maps[s].kraus_ops().size() != 1) {
                throw InvalidArgument("encoder map s=" + std::to_string(s) + " is declared isometric but has " +
                                      std::to_string(maps[s].kraus_ops().size()) + " Kraus operators");
            }
            Isometry check(maps[s].kraus_ops().front());
        }
    }
}

EncoderFamily EncoderFamily::constant(const KrausChannel& map, int num_params) {
    EncoderFamily fam;
    fam.dim_k = map.dim_in();
    fam.dim_a = map.dim_out();
    fam.maps.assign(num_params, map);
    fam.isometric = map.kraus_ops().size() == 1;
    return fam;
}

EncoderFamily EncoderFamily::identity(int dim, int num_params) {
    return constant(KrausChannel::identity(dim), num_params);
}

EncoderFamily EncoderFamily::isometries(const std::vector<CMatrix>& vs) {
    if (vs.empty()) {
        throw InvalidArgument("encoder family needs at least one map");
    }
    EncoderFamily fam;
    fam.dim_k = static_cast<int>(vs.front().cols());
    fam.dim_a = static_cast<int>(vs.front().rows());
    fam.isometric = true;
    for (const auto& v : vs) {
        fam.maps.push_back(Isometry(v).as_channel());
    }
    return fam;
}

EncoderFamily EncoderFamily::unitaries(const std::vector<CMatrix>& us) {
    for (const auto& u : us) {
        if (u.rows() != u.cols()) {
            throw InvalidArgument("encoder unitary must be square");
        }
    }
    return isometries(us);
}

KrausChannel projected(const RandomParameterChannel& rp, const std::string& label) {
    return rp.branches[rp.index_of(label)];
}

KrausChannel projected(const RandomParameterChannel& rp, int s) {
    if (s < 0 || s >= rp.num_params()) {
        throw InvalidArgument("parameter index " + std::to_string(s) + " out of range");
    }
    return rp.branches[s];
}

KrausChannel average_channel(const RandomParameterChannel& rp) {
    rp.validate();
    std::vector<CMatrix> ops;
    for (int s = 0; s < rp.num_params(); ++s) {
        if (rp.probs[s] == 0.0) {
            continue;
        }
        const double w = std::sqrt(rp.probs[s]);
        for (const auto& k : rp.branches[s].kraus_ops()) {
            ops.push_back(w * k);
        }
    }
    return KrausChannel(rp.dim_in(), rp.dim_out(), std::move(ops));
}

KrausChannel virtual_channel(const RandomParameterChannel& rp, const EncoderFamily& fam) {
    rp.validate();
    fam.validate(rp.num_params());
    if (fam.dim_a != rp.dim_in()) {
        throw InvalidArgument("encoder output dimension " + std::to_string(fam.dim_a) +
                              " does not match channel input dimension " + std::to_string(rp.dim_in()));
    }
    std::vector<CMatrix> ops;
    for (int s = 0; s < rp.num_params(); ++s) {
        if (rp.probs[s] == 0.0) {
            continue;
        }
        const double w = std::sqrt(rp.probs[s]);
        for (const auto& n : rp.branches[s].kraus_ops()) {
            for (const auto& f : fam.maps[s].kraus_ops()) {
                ops.push_back(w * (n * f));
            }
        }
    }
    return KrausChannel(fam.dim_k, rp.dim_out(), std::move(ops));
}

std::string to_canonical_json(const RandomParameterChannel& rp) {
    rp.validate();
    std::string out;
    out += "{\"name\":" + nlohmann::json(rp.name).dump();
    out += ",\"dim_in\":" + std::to_string(rp.dim_in());
    out += ",\"dim_out\":" + std::to_string(rp.dim_out());
    out += ",\"params\":[";
    for (int s = 0; s < rp.num_params(); ++s) {
        out += s ? "," : "";
        out += "{\"label\":" + nlohmann::json(rp.labels[s]).dump();
        out += ",\"prob\":" + g17(rp.probs[s]);
        out += ",\"kraus\":[";
        const auto& ops = rp.branches[s].kraus_ops();
        for (size_t j = 0; j < ops.size(); ++j) {
            out += j ? "," : "";
            out += "[";
            for (Eigen::Index r = 0; r < ops[j].rows(); ++r) {
                out += r ? "," : "";
                out += "[";
                for (Eigen::Index c = 0; c < ops[j].cols(); ++c) {
                    out += c ? "," : "";
                    out += "[" + g17(ops[j](r, c).real()) + "," + g17(ops[j](r, c).imag()) + "]";
                }
                out += "]";
            }
            out += "]";
        }
        out += "]}";
    }
    out += "]}\n";
    return out;
}

namespace {

int positive_int(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long>() <= 0) {
        throw InvalidArgument(std::string("channel spec: '") + key + "' must be a positive integer");
    }
    return j[key].get<int>();
}

CMatrix parse_matrix(const nlohmann::json& m, int rows, int cols, const std::string& where) {
    if (!m.is_array() || static_cast<int>(m.size()) != rows) {
        throw InvalidArgument(where + ": expected " + std::to_string(rows) + " rows");
    }
    CMatrix out(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const auto& row = m[r];
        if (!row.is_array() || static_cast<int>(row.size()) != cols) {
            throw InvalidArgument(where + ": row " + std::to_string(r) + " must have " + std::to_string(cols) +
                                  " entries");
        }
        for (int c = 0; c < cols; ++c) {
            const auto& e = row[c];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
                throw InvalidArgument(where + ": entry (" + std::to_string(r) + "," + std::to_string(c) +
                                      ") must be [re, im]");
            }
            out(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
        }
    }
    if (!out.allFinite()) {
        throw InvalidArgument(where + ": non-finite entry");
    }
    return out;
}

}  // namespace

RandomParameterChannel parse_spec(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument(std::string("channel spec is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw InvalidArgument("channel spec must be a JSON object");
    }
    RandomParameterChannel rp;
    rp.name = j.value("name", std::string());
    const int din = positive_int(j, "dim_in");
    const int dout = positive_int(j, "dim_out");
    if (!j.contains("params") || !j["params"].is_array() || j["params"].empty()) {
        throw InvalidArgument("channel spec: 'params' must be a non-empty array");
    }
    for (const auto& p : j["params"]) {
        if (!p.is_object() || !p.contains("label") || !p.contains("prob") || !p.contains("kraus")) {
            throw InvalidArgument("channel spec: each param needs 'label', 'prob' and 'kraus'");
        }
        const std::string label = p["label"].is_string() ? p["label"].get<std::string>() : p["label"].dump();
        if (!p["prob"].is_number()) {
            throw InvalidArgument("param s=" + label + ": 'prob' must be a number");
        }
        if (!p["kraus"].is_array() || p["kraus"].empty()) {
            throw InvalidArgument("branch s=" + label + ": 'kraus' must be a non-empty array");
        }
        std::vector<CMatrix> ops;
        for (size_t k = 0; k < p["kraus"].size(); ++k) {
            ops.push_back(parse_matrix(p["kraus"][k], dout, din, "branch s=" + label + " Kraus " + std::to_string(k)));
        }
        const double res = completeness_residual(ops, din);
        if (!(res <= 1e-9)) {
            throw InvalidArgument("branch s=" + label + " Kraus completeness residual " + short_num(res));
        }
        rp.labels.push_back(label);
        rp.probs.push_back(p["prob"].get<double>());
        rp.branches.emplace_back(din, dout, std::move(ops));
    }
    rp.validate();
    return rp;
}

RandomParameterChannel load_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidArgument("cannot open channel spec '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str());
}

EncoderFamily parse_family(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument(std::string("encoder family is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw InvalidArgument("encoder family must be a JSON object");
    }
    EncoderFamily fam;
    fam.dim_k = positive_int(j, "dim_k");
    fam.dim_a = positive_int(j, "dim_a");
    if (!j.contains("maps") || !j["maps"].is_array() || j["maps"].empty()) {
        throw InvalidArgument("encoder family: 'maps' must be a non-empty array");
    }
    fam.isometric = true;
    for (size_t s = 0; s < j["maps"].size(); ++s) {
        const auto& kraus = j["maps"][s];
        const std::string where = "encoder map s=" + std::to_string(s);
        if (!kraus.is_array() || kraus.empty()) {
            throw InvalidArgument(where + ": expected a non-empty list of Kraus operators");
        }
        std::vector<CMatrix> ops;
        for (size_t k = 0; k < kraus.size(); ++k) {
            ops.push_back(parse_matrix(kraus[k], fam.dim_a, fam.dim_k, where + " Kraus " + std::to_string(k)));
        }
        const double res = completeness_residual(ops, fam.dim_k);
        if (!(res <= 1e-9)) {
            throw InvalidArgument(where + " Kraus completeness residual " + short_num(res));
        }
        fam.isometric = fam.isometric && ops.size() == 1;
        fam.maps.emplace_back(fam.dim_k, fam.dim_a, std::move(ops));
    }
    return fam;
}

EncoderFamily load_family(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidArgument("cannot open encoder family '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_family(ss.str());
}

void save_spec(const RandomParameterChannel& rp, const std::string& path) {
    const std::string text = to_canonical_json(rp);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InvalidArgument("cannot write channel spec '" + path + "'");
    }
    out << text;
}

namespace fixtures {

CMatrix pauli_x() {
    CMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

CMatrix pauli_y() {
    CMatrix m(2, 2);
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}

CMatrix pauli_z() {
    CMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

RandomParameterChannel single(const KrausChannel& ch, const std::string& name) {
    RandomParameterChannel rp{name, {"0"}, {1.0}, {ch}};
    rp.validate();
    return rp;
}

RandomParameterChannel dephasing_parameter(double p) {
    RandomParameterChannel rp{
        "dephasing-parameter", {"0", "1"}, {1.0 - p, p}, {KrausChannel::identity(2), KrausChannel::unitary(pauli_z())}};
    rp.validate();
    return rp;
}

RandomParameterChannel stuck_at(double alpha) {
    RandomParameterChannel rp{"stuck-at",
                              {"0", "1", "2"},
                              {alpha / 2, alpha / 2, 1.0 - alpha},
                              {KrausChannel::replacer(2, 2, 0), KrausChannel::replacer(2, 2, 1),
                               KrausChannel::identity(2)}};
    rp.validate();
    return rp;
}

RandomParameterChannel identity_channel(int dim) { return single(KrausChannel::identity(dim), "identity"); }

RandomParameterChannel depolarizing(int dim) {
    return single(KrausChannel::completely_depolarizing(dim), "depolarizing");
}

KrausChannel amplitude_damping(double gamma) {
    CMatrix k0(2, 2), k1(2, 2);
    k0 << 1, 0, 0, std::sqrt(1.0 - gamma);
    k1 << 0, std::sqrt(gamma), 0, 0;
    return KrausChannel(2, 2, {k0, k1});
}

RandomParameterChannel state_independent(double gamma) {
    const KrausChannel ad = amplitude_damping(gamma);
    RandomParameterChannel rp{"state-independent", {"0", "1"}, {0.4, 0.6}, {ad, ad}};
    rp.validate();
    return rp;
}

KrausChannel random_channel(int dim_in, int dim_out, int num_kraus, Rng& rng) {
    const int big = dim_out * num_kraus;
    if (big < dim_in) {
        throw InvalidArgument("random_channel: too few Kraus operators for an isometric dilation");
    }
    const CMatrix u = random_unitary(big, rng);
    std::vector<CMatrix> ops(num_kraus, CMatrix(dim_out, dim_in));
    for (int b = 0; b < dim_out; ++b) {
        for (int j = 0; j < num_kraus; ++j) {
            ops[j].row(b) = u.row(b * num_kraus + j).head(dim_in);
        }
    }
    return KrausChannel(dim_in, dim_out, std::move(ops));
}

RandomParameterChannel random_two_param_qubit(Rng& rng) {
    std::uniform_real_distribution<double> unif(0.2, 0.8);
    const double q0 = unif(rng);
    KrausChannel b0 = random_channel(2, 2, 2, rng);
    KrausChannel b1 = random_channel(2, 2, 2, rng);
    RandomParameterChannel rp{"random-two-param", {"0", "1"}, {q0, 1.0 - q0}, {b0, b1}};
    rp.validate();
    return rp;
}

}  // namespace fixtures

}  // namespace eacsi
