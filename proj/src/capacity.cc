#include "eacsi/capacity.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include "eacsi/random.h"

namespace eacsi {

using nlohmann::ordered_json;

std::string scenario_name(CsiScenario s) {
    switch (s) {
        case CsiScenario::kNone:
            return "none";
        case CsiScenario::kEncoderCausal:
            return "causal";
        case CsiScenario::kEncoderNoncausal:
            return "noncausal";
        case CsiScenario::kDecoder:
            return "decoder";
        case CsiScenario::kBothNoncausal:
            return "both";
    }
    return "none";
}

CsiScenario parse_scenario(const std::string& name) {
    if (name == "none") return CsiScenario::kNone;
    if (name == "causal" || name == "encoder_causal") return CsiScenario::kEncoderCausal;
    if (name == "noncausal" || name == "encoder_noncausal") return CsiScenario::kEncoderNoncausal;
    if (name == "decoder") return CsiScenario::kDecoder;
    if (name == "both" || name == "both_noncausal") return CsiScenario::kBothNoncausal;
    throw InvalidArgument("unknown scenario '" + name + "' (expected none, causal, noncausal, decoder or both)");
}

namespace {

using KrausList = std::vector<CMatrix>;

// rho += w vec(x) vec(x)^dagger, vec taken row-major to match tensor order.
void add_outer(CMatrix& rho, const CMatrix& x, double w) {
    Eigen::Map<const CVector> v(x.data(), x.size());
    rho.noalias() += w * (v * v.adjoint());
}

int other_dim(const PureState& psi, int d, const char* what) {
    if (d <= 0 || psi.dim() % d != 0) {
        throw InvalidArgument(std::string(what) + ": state dimension " + std::to_string(psi.dim()) +
                              " is not a multiple of " + std::to_string(d));
    }
    return psi.dim() / d;
}

// I(B;R) of sum_s q(s) (N^(s) F^(s) x 1)(theta); theta as a dk x dr coefficient matrix.
double causal_raw(const CMatrix& m, const std::vector<KrausList>& fam, const RandomParameterChannel& rp) {
    const int db = rp.dim_out();
    const int dr = static_cast<int>(m.cols());
    CMatrix omega = CMatrix::Zero(db * dr, db * dr);
    for (int s = 0; s < rp.num_params(); ++s) {
        if (rp.probs[s] == 0.0) continue;
        for (const auto& f : fam[s]) {
            const CMatrix fm = f * m;
            for (const auto& n : rp.branches[s].kraus_ops()) {
                add_outer(omega, n * fm, rp.probs[s]);
            }
        }
    }
    return mutual_info_bits(omega, db, dr);
}

struct NoncausalParts {
    NoncausalValue nc;
    double both = 0;
};

// theta as a dk x dA' coefficient matrix; F acts on K, N^(s) on A'.
NoncausalParts noncausal_raw(const CMatrix& m, const std::vector<KrausList>& fam, const RandomParameterChannel& rp,
                             int da) {
    const int db = rp.dim_out();
    const int dab = da * db;
    CMatrix avg = CMatrix::Zero(dab, dab);
    CMatrix avg_a = CMatrix::Zero(da, da);
    NoncausalParts out;
    double h_a_given_s = 0.0;
    for (int s = 0; s < rp.num_params(); ++s) {
        const double q = rp.probs[s];
        if (q == 0.0) continue;
        CMatrix ws = CMatrix::Zero(dab, dab);
        for (const auto& f : fam[s]) {
            const CMatrix fm = f * m;
            for (const auto& n : rp.branches[s].kraus_ops()) {
                add_outer(ws, fm * n.transpose(), 1.0);
            }
        }
        const CMatrix wa = partial_trace(ws, {da, db}, {0});
        avg += q * ws;
        avg_a += q * wa;
        h_a_given_s += q * entropy_bits(wa);
        out.both += q * mutual_info_bits(ws, da, db);
    }
    out.nc.i_ab = mutual_info_bits(avg, da, db);
    out.nc.i_as = entropy_bits(avg_a) - h_a_given_s;
    out.nc.value = out.nc.i_ab - out.nc.i_as;
    return out;
}

double decoder_raw(const CMatrix& m, const RandomParameterChannel& rp) {
    const int da = static_cast<int>(m.rows());
    const int db = rp.dim_out();
    double total = 0.0;
    for (int s = 0; s < rp.num_params(); ++s) {
        if (rp.probs[s] == 0.0) continue;
        CMatrix ws = CMatrix::Zero(da * db, da * db);
        for (const auto& n : rp.branches[s].kraus_ops()) {
            add_outer(ws, m * n.transpose(), 1.0);
        }
        total += rp.probs[s] * mutual_info_bits(ws, da, db);
    }
    return total;
}

std::vector<KrausList> kraus_lists(const EncoderFamily& fam) {
    std::vector<KrausList> out;
    for (const auto& map : fam.maps) out.push_back(map.kraus_ops());
    return out;
}

void check_family(const EncoderFamily& fam, const RandomParameterChannel& rp, bool require_isometric) {
    rp.validate();
    fam.validate(rp.num_params());
    if (require_isometric) {
        for (size_t s = 0; s < fam.maps.size(); ++s) {
            if (fam.maps[s].kraus_ops().size() != 1) {
                throw InvalidArgument("encoder map s=" + std::to_string(s) + " is not isometric");
            }
        }
    }
}

CVector swap_factors(const CVector& v, int d1, int d2) {
    CVector out(v.size());
    for (int i = 0; i < d1; ++i)
        for (int j = 0; j < d2; ++j) out(j * d1 + i) = v(i * d2 + j);
    return out;
}

}  // namespace

double objective_no_csi(const PureState& phi, const KrausChannel& ch) {
    const int da = other_dim(phi, ch.dim_in(), "objective_no_csi");
    const CMatrix m = coefficient_matrix(phi.amplitudes(), da, ch.dim_in());
    const int db = ch.dim_out();
    CMatrix omega = CMatrix::Zero(da * db, da * db);
    for (const auto& n : ch.kraus_ops()) add_outer(omega, m * n.transpose(), 1.0);
    return mutual_info_bits(omega, da, db);
}

double objective_causal(const PureState& theta, const EncoderFamily& fam, const RandomParameterChannel& rp) {
    check_family(fam, rp, false);
    if (fam.dim_a != rp.dim_in()) {
        throw InvalidArgument("objective_causal: encoder output dimension " + std::to_string(fam.dim_a) +
                              " does not match channel input " + std::to_string(rp.dim_in()));
    }
    const int dr = other_dim(theta, fam.dim_k, "objective_causal");
    return causal_raw(coefficient_matrix(theta.amplitudes(), fam.dim_k, dr), kraus_lists(fam), rp);
}

double objective_causal_virtual(const PureState& theta, const EncoderFamily& fam, const RandomParameterChannel& rp) {
    const int dr = other_dim(theta, fam.dim_k, "objective_causal_virtual");
    const KrausChannel m = virtual_channel(rp, fam);
    return objective_no_csi(PureState(swap_factors(theta.amplitudes(), fam.dim_k, dr)), m);
}

double objective_causal_mixed(const DensityOperator& theta, int dim_k, const EncoderFamily& fam,
                              const RandomParameterChannel& rp) {
    check_family(fam, rp, false);
    if (dim_k != fam.dim_k || theta.dim() % dim_k != 0) {
        throw InvalidArgument("objective_causal_mixed: state does not factor as K x R");
    }
    const int dr = theta.dim() / dim_k;
    const KrausChannel m = virtual_channel(rp, fam);
    const std::vector<int> dims{dim_k, dr};
    const CMatrix out = m.apply(theta.matrix(), dims, 0);
    return mutual_info_bits(out, rp.dim_out(), dr);
}

NoncausalValue objective_noncausal(const PureState& theta, const EncoderFamily& fam,
                                   const RandomParameterChannel& rp, bool require_isometric) {
    check_family(fam, rp, require_isometric);
    if (theta.dim() != fam.dim_k * rp.dim_in()) {
        throw InvalidArgument("objective_noncausal: state dimension " + std::to_string(theta.dim()) +
                              " is not dim_k * dim A' = " + std::to_string(fam.dim_k * rp.dim_in()));
    }
    const CMatrix m = coefficient_matrix(theta.amplitudes(), fam.dim_k, rp.dim_in());
    return noncausal_raw(m, kraus_lists(fam), rp, fam.dim_a).nc;
}

double objective_both(const PureState& theta, const EncoderFamily& fam, const RandomParameterChannel& rp,
                      bool require_isometric) {
    check_family(fam, rp, require_isometric);
    if (theta.dim() != fam.dim_k * rp.dim_in()) {
        throw InvalidArgument("objective_both: state dimension does not match dim_k * dim A'");
    }
    const CMatrix m = coefficient_matrix(theta.amplitudes(), fam.dim_k, rp.dim_in());
    return noncausal_raw(m, kraus_lists(fam), rp, fam.dim_a).both;
}

double objective_decoder(const PureState& phi, const RandomParameterChannel& rp) {
    rp.validate();
    const int da = other_dim(phi, rp.dim_in(), "objective_decoder");
    return decoder_raw(coefficient_matrix(phi.amplitudes(), da, rp.dim_in()), rp);
}

namespace {

// Search space: one unit vector and a list of isometries, all coded as
// unconstrained real parameters.
struct SearchSpace {
    int state_dim = 0;
    int state_rows = 0;  // coefficient-matrix shape of the state
    int num_isos = 0;
    int iso_rows = 0;
    int iso_cols = 0;
    int env = 1;

    int size() const { return 2 * state_dim + 2 * num_isos * iso_rows * iso_cols; }
};

struct Point {
    CVector state;
    std::vector<CMatrix> isos;
};

CMatrix polar_factor(const Eigen::MatrixXcd& g) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

Point decode(const SearchSpace& sp, const std::vector<double>& x) {
    Point p;
    p.state = CVector(sp.state_dim);
    for (int i = 0; i < sp.state_dim; ++i) p.state(i) = cplx(x[2 * i], x[2 * i + 1]);
    const double nrm = p.state.norm();
    if (nrm > 0) {
        p.state /= nrm;
    } else {
        p.state = CVector::Zero(sp.state_dim);
        p.state(0) = 1.0;
    }
    size_t off = 2 * sp.state_dim;
    for (int k = 0; k < sp.num_isos; ++k) {
        Eigen::MatrixXcd g(sp.iso_rows, sp.iso_cols);
        for (int r = 0; r < sp.iso_rows; ++r) {
            for (int c = 0; c < sp.iso_cols; ++c) {
                g(r, c) = cplx(x[off], x[off + 1]);
                off += 2;
            }
        }
        p.isos.push_back(polar_factor(g));
    }
    return p;
}

std::vector<double> encode(const SearchSpace& sp, const Point& p) {
    std::vector<double> x;
    x.reserve(sp.size());
    for (int i = 0; i < sp.state_dim; ++i) {
        x.push_back(p.state(i).real());
        x.push_back(p.state(i).imag());
    }
    for (const auto& v : p.isos) {
        for (int r = 0; r < sp.iso_rows; ++r) {
            for (int c = 0; c < sp.iso_cols; ++c) {
                x.push_back(v(r, c).real());
                x.push_back(v(r, c).imag());
            }
        }
    }
    return x;
}

// Splits an isometry K -> A x E into its Kraus operators K -> A.
KrausList split_kraus(const CMatrix& v, int env) {
    const int da = static_cast<int>(v.rows()) / env;
    KrausList ops(env, CMatrix(da, v.cols()));
    for (int a = 0; a < da; ++a)
        for (int j = 0; j < env; ++j) ops[j].row(a) = v.row(a * env + j);
    return ops;
}

struct RestartResult {
    double value = -std::numeric_limits<double>::infinity();
    Point best;
    int iterations = 0;
    bool converged = false;
};

RestartResult local_search(const SearchSpace& sp, const std::function<double(const Point&)>& f,
                           const OptimizerConfig& cfg, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> x(sp.size());
    for (double& v : x) v = normal(rng);
    Point p = decode(sp, x);
    x = encode(sp, p);
    double fx = f(p);
    double step = cfg.step_init;
    std::vector<double> history{fx};
    RestartResult out;
    std::vector<double> g(x.size()), trial(x.size());
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        for (size_t i = 0; i < x.size(); ++i) {
            const double keep = x[i];
            x[i] = keep + cfg.fd_step;
            const double up = f(decode(sp, x));
            x[i] = keep - cfg.fd_step;
            const double down = f(decode(sp, x));
            x[i] = keep;
            g[i] = (up - down) / (2 * cfg.fd_step);
        }
        double gn = 0.0;
        for (double v : g) gn += v * v;
        gn = std::sqrt(gn);
        if (!(gn > 1e-12)) {
            out.converged = true;
            break;
        }
        for (size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + step * g[i] / gn;
        const Point pt = decode(sp, trial);
        const double ft = f(pt);
        if (ft > fx) {
            p = pt;
            x = encode(sp, p);
            fx = ft;
            step = std::min(step * 1.2, 1.0);
        } else {
            step *= 0.5;
        }
        history.push_back(fx);
        const size_t h = history.size();
        if (h > 25 && history[h - 1] - history[h - 26] < cfg.tol) {
            out.converged = true;
            ++it;
            break;
        }
        if (step < 1e-12) {
            out.converged = true;
            ++it;
            break;
        }
    }
    if (!std::isfinite(fx)) {
        throw NumericError("optimizer produced a non-finite objective value");
    }
    out.value = fx;
    out.best = p;
    out.iterations = it;
    return out;
}

}  // namespace

CapacityEstimate maximize(CsiScenario scenario, const RandomParameterChannel& rp, const OptimizerConfig& cfg) {
    rp.validate();
    if (cfg.restarts < 1) {
        throw InvalidArgument("maximize: restarts must be at least 1");
    }
    if (cfg.max_iters < 1 || !(cfg.tol > 0) || !(cfg.step_init > 0) || !(cfg.fd_step > 0) || cfg.dim_env < 1) {
        throw InvalidArgument("maximize: optimizer settings must be positive");
    }
    const int dk = cfg.dim_k > 0 ? cfg.dim_k : rp.dim_in();
    const int dr = cfg.dim_ref > 0 ? cfg.dim_ref : dk;
    const int ns = rp.num_params();

    SearchSpace sp;
    std::function<double(const Point&)> f;
    CapacityEstimate est;
    est.scenario = scenario;
    est.seed = cfg.seed;
    est.dim_k = dk;
    est.dim_ref = dr;

    switch (scenario) {
        case CsiScenario::kNone: {
            const KrausChannel avg = average_channel(rp);
            sp.state_dim = dr * rp.dim_in();
            sp.state_rows = dr;
            const RandomParameterChannel single = fixtures::single(avg, rp.name);
            f = [single](const Point& p) {
                return decoder_raw(coefficient_matrix(p.state, static_cast<int>(p.state.size()) / single.dim_in(),
                                                      single.dim_in()),
                                   single);
            };
            break;
        }
        case CsiScenario::kDecoder: {
            sp.state_dim = dr * rp.dim_in();
            sp.state_rows = dr;
            f = [&rp](const Point& p) {
                return decoder_raw(
                    coefficient_matrix(p.state, static_cast<int>(p.state.size()) / rp.dim_in(), rp.dim_in()), rp);
            };
            break;
        }
        case CsiScenario::kEncoderCausal: {
            sp.state_dim = dk * dr;
            sp.state_rows = dk;
            sp.num_isos = ns;
            sp.env = cfg.dim_env;
            sp.iso_rows = rp.dim_in() * cfg.dim_env;
            sp.iso_cols = dk;
            if (sp.iso_rows < dk) {
                throw InvalidArgument("maximize: causal encoder needs dim A * dim E >= dim K");
            }
            const int env = cfg.dim_env;
            f = [&rp, dk, dr, env](const Point& p) {
                std::vector<KrausList> fam;
                for (const auto& v : p.isos) fam.push_back(split_kraus(v, env));
                return causal_raw(coefficient_matrix(p.state, dk, dr), fam, rp);
            };
            break;
        }
        case CsiScenario::kEncoderNoncausal:
        case CsiScenario::kBothNoncausal: {
            if (dr < dk) {
                throw InvalidArgument("maximize: isometric encoder needs dim_ref >= dim_k");
            }
            sp.state_dim = dk * rp.dim_in();
            sp.state_rows = dk;
            sp.num_isos = ns;
            sp.iso_rows = dr;
            sp.iso_cols = dk;
            const bool both = scenario == CsiScenario::kBothNoncausal;
            const int din = rp.dim_in();
            f = [&rp, dk, dr, din, both](const Point& p) {
                std::vector<KrausList> fam;
                for (const auto& v : p.isos) fam.push_back({v});
                const NoncausalParts parts = noncausal_raw(coefficient_matrix(p.state, dk, din), fam, rp, dr);
                return both ? parts.both : parts.nc.value;
            };
            break;
        }
    }

    const SeedStream stream(cfg.seed);
    RestartResult best;
    est.converged = true;
    for (int r = 0; r < cfg.restarts; ++r) {
        Rng rng = stream.rng("optimizer", static_cast<uint64_t>(r));
        RestartResult res = local_search(sp, f, cfg, rng);
        est.restart_values.push_back(res.value);
        est.restart_iterations.push_back(res.iterations);
        // Lowest restart index wins ties within 1e-9.
        if (r == 0 || res.value > best.value + 1e-9) {
            best = std::move(res);
            est.best_restart = r;
        }
    }
    est.converged = best.converged;
    est.value_bits = best.value;
    est.best_state = best.best.state;
    if (sp.num_isos > 0) {
        EncoderFamily fam;
        fam.dim_k = dk;
        fam.dim_a = scenario == CsiScenario::kEncoderCausal ? rp.dim_in() : dr;
        fam.isometric = scenario != CsiScenario::kEncoderCausal || cfg.dim_env == 1;
        for (const auto& v : best.best.isos) {
            KrausList ops = scenario == CsiScenario::kEncoderCausal ? split_kraus(v, cfg.dim_env) : KrausList{v};
            fam.maps.emplace_back(dk, fam.dim_a, std::move(ops));
        }
        est.best_family = std::move(fam);
    }
    if (scenario == CsiScenario::kEncoderNoncausal || scenario == CsiScenario::kBothNoncausal) {
        std::vector<KrausList> fam;
        for (const auto& v : best.best.isos) fam.push_back({v});
        est.noncausal = noncausal_raw(coefficient_matrix(best.best.state, dk, rp.dim_in()), fam, rp, dr).nc;
    }
    return est;
}

namespace {

ordered_json matrix_json(const CMatrix& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

ordered_json to_json(const CapacityEstimate& est) {
    ordered_json j;
    j["scenario"] = scenario_name(est.scenario);
    j["value_bits"] = est.value_bits;
    j["restart_values"] = est.restart_values;
    j["converged"] = est.converged;
    j["seed"] = est.seed;
    j["dim_k"] = est.dim_k;
    j["dim_ref"] = est.dim_ref;
    j["best_restart"] = est.best_restart;
    j["restart_iterations"] = est.restart_iterations;
    if (est.scenario == CsiScenario::kEncoderNoncausal || est.scenario == CsiScenario::kBothNoncausal) {
        j["i_ab"] = est.noncausal.i_ab;
        j["i_as"] = est.noncausal.i_as;
    }
    ordered_json state = ordered_json::array();
    for (Eigen::Index i = 0; i < est.best_state.size(); ++i) {
        state.push_back({est.best_state(i).real(), est.best_state(i).imag()});
    }
    j["best_state"] = state;
    ordered_json fam = ordered_json::array();
    for (const auto& map : est.best_family.maps) {
        ordered_json ops = ordered_json::array();
        for (const auto& k : map.kraus_ops()) ops.push_back(matrix_json(k));
        fam.push_back(ops);
    }
    j["best_family"] = fam;
    return j;
}

double quantum_capacity_from_classical(double c) {
    if (c < 0 || !std::isfinite(c)) {
        throw InvalidArgument("quantum_capacity_from_classical: capacity must be a non-negative number");
    }
    return c / 2.0;
}

void ClassicalChannelWithState::validate() const {
    if (x_size <= 0 || y_size <= 0 || s_size <= 0) {
        throw InvalidArgument("classical channel: alphabet sizes must be positive");
    }
    if (w.size() != static_cast<size_t>(x_size) * y_size * s_size || q.size() != static_cast<size_t>(s_size)) {
        throw InvalidArgument("classical channel: array sizes do not match the alphabets");
    }
    double qs = 0.0;
    for (double v : q) {
        if (!(v >= 0)) throw InvalidArgument("classical channel: q has a negative entry");
        qs += v;
    }
    if (std::abs(qs - 1.0) > 1e-9) {
        throw InvalidArgument("classical channel: q sums to " + std::to_string(qs));
    }
    for (int x = 0; x < x_size; ++x) {
        for (int s = 0; s < s_size; ++s) {
            double sum = 0.0;
            for (int y = 0; y < y_size; ++y) {
                const double v = p(y, x, s);
                if (!(v >= 0)) throw InvalidArgument("classical channel: negative transition probability");
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-12) {
                std::ostringstream os;
                os << "classical channel: w(.|x=" << x << ",s=" << s << ") sums to " << sum;
                throw InvalidArgument(os.str());
            }
        }
    }
    if (u_size < 0) throw InvalidArgument("classical channel: u_size must be positive");
}

ClassicalChannelWithState parse_classical(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument(std::string("classical channel file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("w") || !j.contains("q")) {
        throw InvalidArgument("classical channel file needs 'w' and 'q'");
    }
    ClassicalChannelWithState ch;
    ch.name = j.value("name", std::string());
    const auto& w = j["w"];
    try {
        ch.y_size = static_cast<int>(w.size());
        ch.x_size = ch.y_size > 0 ? static_cast<int>(w[0].size()) : 0;
        ch.s_size = ch.x_size > 0 ? static_cast<int>(w[0][0].size()) : 0;
        ch.w.assign(static_cast<size_t>(ch.x_size) * ch.y_size * ch.s_size, 0.0);
        for (int y = 0; y < ch.y_size; ++y) {
            if (w[y].size() != static_cast<size_t>(ch.x_size)) throw InvalidArgument("ragged 'w'");
            for (int x = 0; x < ch.x_size; ++x) {
                if (w[y][x].size() != static_cast<size_t>(ch.s_size)) throw InvalidArgument("ragged 'w'");
                for (int s = 0; s < ch.s_size; ++s) {
                    ch.w[(static_cast<size_t>(y) * ch.x_size + x) * ch.s_size + s] = w[y][x][s].get<double>();
                }
            }
        }
        ch.q = j["q"].get<std::vector<double>>();
        ch.u_size = j.value("u_size", 0);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("classical channel file: ") + e.what());
    }
    ch.validate();
    return ch;
}

ClassicalChannelWithState load_classical(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open classical channel file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_classical(ss.str());
}

namespace classical_fixtures {

namespace {

ClassicalChannelWithState blank(const std::string& name, int x, int y, int s) {
    ClassicalChannelWithState ch;
    ch.name = name;
    ch.x_size = x;
    ch.y_size = y;
    ch.s_size = s;
    ch.w.assign(static_cast<size_t>(x) * y * s, 0.0);
    return ch;
}

double& at(ClassicalChannelWithState& ch, int y, int x, int s) {
    return ch.w[(static_cast<size_t>(y) * ch.x_size + x) * ch.s_size + s];
}

}  // namespace

ClassicalChannelWithState stuck_at_memory(double p) {
    auto ch = blank("stuck-at-memory", 2, 2, 3);
    for (int x = 0; x < 2; ++x) {
        at(ch, 0, x, 0) = 1.0;
        at(ch, 1, x, 1) = 1.0;
        at(ch, x, x, 2) = 1.0;
    }
    ch.q = {p / 2, p / 2, 1.0 - p};
    ch.validate();
    return ch;
}

ClassicalChannelWithState xor_state() {
    auto ch = blank("xor-state", 2, 2, 2);
    for (int x = 0; x < 2; ++x)
        for (int s = 0; s < 2; ++s) at(ch, x ^ s, x, s) = 1.0;
    ch.q = {0.5, 0.5};
    ch.validate();
    return ch;
}

ClassicalChannelWithState bsc(double eps) {
    auto ch = blank("bsc", 2, 2, 1);
    for (int x = 0; x < 2; ++x) {
        at(ch, x, x, 0) = 1.0 - eps;
        at(ch, 1 - x, x, 0) = eps;
    }
    ch.q = {1.0};
    ch.validate();
    return ch;
}

}  // namespace classical_fixtures

BlahutArimotoResult blahut_arimoto(const std::vector<std::vector<double>>& w, double tol, int max_iters) {
    const size_t nt = w.size();
    if (nt == 0 || w.front().empty()) throw InvalidArgument("blahut_arimoto: empty channel");
    const size_t ny = w.front().size();
    BlahutArimotoResult out;
    out.input.assign(nt, 1.0 / nt);
    std::vector<double> qy(ny), d(nt);
    const double ln2 = std::log(2.0);
    for (int it = 0; it < max_iters; ++it) {
        std::fill(qy.begin(), qy.end(), 0.0);
        for (size_t t = 0; t < nt; ++t)
            for (size_t y = 0; y < ny; ++y) qy[y] += out.input[t] * w[t][y];
        double dmax = -std::numeric_limits<double>::infinity();
        double z = 0.0;
        for (size_t t = 0; t < nt; ++t) {
            double dt = 0.0;
            for (size_t y = 0; y < ny; ++y) {
                if (w[t][y] > 0) dt += w[t][y] * std::log(w[t][y] / qy[y]);
            }
            d[t] = dt;
            dmax = std::max(dmax, dt);
        }
        for (size_t t = 0; t < nt; ++t) z += out.input[t] * std::exp(d[t] - dmax);
        const double lower = dmax + std::log(z);
        out.capacity = lower / ln2;
        out.iterations = it + 1;
        if ((dmax - lower) / ln2 < tol) break;
        for (size_t t = 0; t < nt; ++t) out.input[t] *= std::exp(d[t] - dmax) / z;
    }
    out.capacity = std::max(out.capacity, 0.0);
    return out;
}

double classical_shannon_strategy(const ClassicalChannelWithState& ch, long cap) {
    ch.validate();
    long nt = 1;
    for (int s = 0; s < ch.s_size; ++s) {
        nt *= ch.x_size;
        if (nt > cap) {
            throw InvalidArgument("Shannon strategy alphabet |X|^|S| exceeds the cap " + std::to_string(cap));
        }
    }
    std::vector<std::vector<double>> w(nt, std::vector<double>(ch.y_size, 0.0));
    for (long t = 0; t < nt; ++t) {
        long code = t;
        for (int s = 0; s < ch.s_size; ++s) {
            const int x = static_cast<int>(code % ch.x_size);
            code /= ch.x_size;
            for (int y = 0; y < ch.y_size; ++y) w[t][y] += ch.q[s] * ch.p(y, x, s);
        }
    }
    return blahut_arimoto(w).capacity;
}

double gelfand_pinsker_objective(const ClassicalChannelWithState& ch, int u_size, const std::vector<int>& f,
                                 const std::vector<std::vector<double>>& p_u_given_s) {
    // p(u, y) and p(u, s); I(U;Y) - I(U;S).
    std::vector<double> puy(static_cast<size_t>(u_size) * ch.y_size, 0.0), pu(u_size, 0.0), py(ch.y_size, 0.0);
    double ius = 0.0;
    for (int s = 0; s < ch.s_size; ++s) {
        for (int u = 0; u < u_size; ++u) {
            const double pus = ch.q[s] * p_u_given_s[s][u];
            pu[u] += pus;
            if (pus <= 0) continue;
            const int x = f[u * ch.s_size + s];
            for (int y = 0; y < ch.y_size; ++y) puy[u * ch.y_size + y] += pus * ch.p(y, x, s);
        }
    }
    for (int s = 0; s < ch.s_size; ++s) {
        for (int u = 0; u < u_size; ++u) {
            const double pus = ch.q[s] * p_u_given_s[s][u];
            if (pus > 0) ius += pus * std::log2(p_u_given_s[s][u] / pu[u]);
        }
    }
    for (int u = 0; u < u_size; ++u)
        for (int y = 0; y < ch.y_size; ++y) py[y] += puy[u * ch.y_size + y];
    double iuy = 0.0;
    for (int u = 0; u < u_size; ++u) {
        for (int y = 0; y < ch.y_size; ++y) {
            const double v = puy[u * ch.y_size + y];
            if (v > 0) iuy += v * std::log2(v / (pu[u] * py[y]));
        }
    }
    return iuy - ius;
}

namespace {

void simplex_points(int parts, int resolution, std::vector<std::vector<double>>& out) {
    std::vector<int> c(parts, 0);
    std::function<void(int, int)> rec = [&](int k, int left) {
        if (k == parts - 1) {
            c[k] = left;
            std::vector<double> p(parts);
            for (int i = 0; i < parts; ++i) p[i] = static_cast<double>(c[i]) / resolution;
            out.push_back(p);
            return;
        }
        for (int v = left; v >= 0; --v) {
            c[k] = v;
            rec(k + 1, left - v);
        }
    };
    rec(0, resolution);
}

double binomial_d(int n, int k) {
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

}  // namespace

GelfandPinskerResult classical_gelfand_pinsker(const ClassicalChannelWithState& ch, int u_size, long cap) {
    ch.validate();
    if (u_size < 1) throw InvalidArgument("classical_gelfand_pinsker: u_size must be at least 1");
    const int cells = u_size * ch.s_size;
    long nf = 1;
    for (int i = 0; i < cells; ++i) {
        nf *= ch.x_size;
        if (nf > cap) {
            throw InvalidArgument("Gel'fand-Pinsker map count |X|^(|U||S|) exceeds the cap " + std::to_string(cap));
        }
    }
    // Grid resolution: the largest m whose grid fits the per-map budget.
    const double budget = std::max(200.0, 2e6 / static_cast<double>(nf));
    int m = 1;
    while (m < 200 && std::pow(binomial_d(m + 1 + u_size - 1, u_size - 1), ch.s_size) <= budget) ++m;
    std::vector<std::vector<double>> simplex;
    simplex_points(u_size, m, simplex);
    long grid = 1;
    for (int s = 0; s < ch.s_size; ++s) grid *= static_cast<long>(simplex.size());

    struct Candidate {
        double value;
        long f_code;
        std::vector<std::vector<double>> p;
    };
    std::vector<Candidate> top;
    const size_t keep = 4;
    std::vector<int> f(cells);
    std::vector<std::vector<double>> p(ch.s_size);
    for (long fc = 0; fc < nf; ++fc) {
        long code = fc;
        for (int i = 0; i < cells; ++i) {
            f[i] = static_cast<int>(code % ch.x_size);
            code /= ch.x_size;
        }
        for (long g = 0; g < grid; ++g) {
            long gc = g;
            for (int s = 0; s < ch.s_size; ++s) {
                p[s] = simplex[gc % simplex.size()];
                gc /= static_cast<long>(simplex.size());
            }
            const double v = gelfand_pinsker_objective(ch, u_size, f, p);
            if (top.size() < keep || v > top.back().value + 1e-12) {
                top.push_back({v, fc, p});
                std::stable_sort(top.begin(), top.end(),
                                 [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
                if (top.size() > keep) top.pop_back();
            }
        }
    }

    GelfandPinskerResult best;
    best.value = -std::numeric_limits<double>::infinity();
    for (auto& cand : top) {
        long code = cand.f_code;
        for (int i = 0; i < cells; ++i) {
            f[i] = static_cast<int>(code % ch.x_size);
            code /= ch.x_size;
        }
        // Pattern search moving mass between pairs of u within each s.
        double value = cand.value;
        for (double h = 1.0 / m; h > 1e-9; h *= 0.5) {
            bool improved = true;
            while (improved) {
                improved = false;
                for (int s = 0; s < ch.s_size; ++s) {
                    for (int a = 0; a < u_size; ++a) {
                        for (int b = 0; b < u_size; ++b) {
                            if (a == b || cand.p[s][a] < h) continue;
                            cand.p[s][a] -= h;
                            cand.p[s][b] += h;
                            const double v = gelfand_pinsker_objective(ch, u_size, f, cand.p);
                            if (v > value + 1e-13) {
                                value = v;
                                improved = true;
                            } else {
                                cand.p[s][a] += h;
                                cand.p[s][b] -= h;
                            }
                        }
                    }
                }
            }
        }
        if (value > best.value + 1e-12) {
            best.value = value;
            best.f = f;
            best.p_u_given_s = cand.p;
        }
    }
    return best;
}

}  // namespace eacsi
