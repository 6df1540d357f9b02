#include "eacsi/protosim.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "eacsi/random.h"

namespace eacsi {

namespace {

long checked_pow(long base, int n, long cap, const std::string& what) {
    long v = 1;
    for (int i = 0; i < n; ++i) {
        v *= base;
        if (v > cap) {
            throw InvalidArgument(what + " dimension " + std::to_string(base) + "^" + std::to_string(n) +
                                  " exceeds the cap " + std::to_string(cap));
        }
    }
    return v;
}

CMatrix kron_power(const CMatrix& m, int n) {
    CMatrix out = CMatrix::Identity(1, 1);
    for (int i = 0; i < n; ++i) {
        out = tensor_product(out, m);
    }
    return out;
}

CVector vec(const CMatrix& m) {
    return Eigen::Map<const CVector>(m.data(), m.size());
}

/// Applies one channel per letter to the first n subsystems of an operator on
/// (letters) x tail.
CMatrix apply_letterwise(CMatrix rho, const std::vector<const KrausChannel*>& chans, long tail) {
    std::vector<int> dims;
    for (const auto* ch : chans) {
        dims.push_back(ch->dim_in());
    }
    dims.push_back(static_cast<int>(tail));
    for (size_t i = 0; i < chans.size(); ++i) {
        rho = chans[i]->apply(rho, dims, static_cast<int>(i));
        dims[i] = chans[i]->dim_out();
    }
    return rho;
}

double trace_product(const CMatrix& a, const CMatrix& b) {
    // Tr(a b) for Hermitian b without forming the product.
    return (a.cwiseProduct(b.transpose())).sum().real();
}

double max_eigenvalue(const CMatrix& h) {
    const RVector ev = eigenvalues_hermitian(h);
    return ev.size() ? ev(ev.size() - 1) : 0.0;
}

void require_sequence(const std::vector<int>& sn, int n, int num_params) {
    if (static_cast<int>(sn.size()) != n) {
        throw InvalidArgument("parameter sequence has length " + std::to_string(sn.size()) + ", expected " +
                              std::to_string(n));
    }
    for (int s : sn) {
        if (s < 0 || s >= num_params) {
            throw InvalidArgument("parameter symbol " + std::to_string(s) + " out of range");
        }
    }
}

}  // namespace

std::string layout_name(BlockLayout l) {
    switch (l) {
        case BlockLayout::kTypes: return "types";
        case BlockLayout::kSingle: return "single";
        case BlockLayout::kAuto: return "auto";
    }
    return "?";
}

BlockLayout parse_layout(const std::string& name) {
    if (name == "types") return BlockLayout::kTypes;
    if (name == "single") return BlockLayout::kSingle;
    if (name == "auto") return BlockLayout::kAuto;
    throw InvalidArgument("unknown block layout '" + name + "' (expected types, single or auto)");
}

CodeLayout CodeLayout::make(int n, int dim, BlockLayout kind) {
    if (n < 1 || dim < 1) {
        throw InvalidArgument("code layout needs n >= 1 and dim >= 1");
    }
    if (kind == BlockLayout::kAuto) {
        throw InvalidArgument("code layout: resolve the auto layout against a shared state first");
    }
    const long total = checked_pow(dim, n, kDenseCap, "code layout");
    CodeLayout out;
    out.n = n;
    out.dim = dim;
    out.kind = kind;
    if (kind == BlockLayout::kSingle) {
        std::vector<long> all(total);
        for (long i = 0; i < total; ++i) all[i] = i;
        out.blocks.push_back(std::move(all));
    } else {
        for (const auto& t : enumerate_types(n, dim)) {
            out.blocks.push_back(type_class_members(t, dim));
        }
    }
    return out;
}

long CodeLayout::total_dim() const {
    long v = 0;
    for (const auto& b : blocks) v += static_cast<long>(b.size());
    return v;
}

double CodeLayout::log2_distinct() const {
    double v = num_blocks() - 1;
    for (int t = 0; t < num_blocks(); ++t) {
        v += 2.0 * std::log2(static_cast<double>(block_dim(t)));
    }
    return v;
}

CMatrix u_of_gamma(const GammaVector& g, const CodeLayout& layout) {
    if (g.triples.size() != layout.blocks.size()) {
        throw InvalidArgument("gamma vector has " + std::to_string(g.triples.size()) + " triples, layout has " +
                              std::to_string(layout.blocks.size()) + " blocks");
    }
    const long total = layout.total_dim();
    CMatrix u = CMatrix::Zero(total, total);
    for (int t = 0; t < layout.num_blocks(); ++t) {
        const auto& members = layout.blocks[t];
        const int d = layout.block_dim(t);
        const GammaTriple& tr = g.triples[t];
        if (tr.a < 0 || tr.a >= d || tr.b < 0 || tr.b >= d || (tr.c != 0 && tr.c != 1)) {
            throw InvalidArgument("gamma triple out of range for block " + std::to_string(t));
        }
        const CMatrix v = heisenberg_weyl(d, tr.a, tr.b) * (tr.c ? -1.0 : 1.0);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                u(members[i], members[j]) = v(i, j);
            }
        }
    }
    return u;
}

CMatrix u_of_gamma(const GammaVector& g, int n, int dim, BlockLayout kind) {
    return u_of_gamma(g, CodeLayout::make(n, dim, kind));
}

GammaCodebook make_gamma_codebook(const CodeLayout& layout, int count, uint64_t seed) {
    if (count < 1) {
        throw InvalidArgument("codebook needs at least one entry");
    }
    Rng rng = SeedStream(seed).rng("codebook", 0);
    const bool distinct = layout.log2_distinct() >= std::log2(static_cast<double>(count));
    std::set<std::vector<int>> seen;
    GammaCodebook cb;
    cb.layout = layout;
    cb.seed = seed;
    while (static_cast<int>(cb.entries.size()) < count) {
        GammaVector g;
        std::vector<int> key;
        for (int t = 0; t < layout.num_blocks(); ++t) {
            std::uniform_int_distribution<int> pick(0, layout.block_dim(t) - 1);
            std::uniform_int_distribution<int> sign(0, 1);
            GammaTriple tr;
            tr.a = pick(rng);
            tr.b = pick(rng);
            tr.c = sign(rng);
            g.triples.push_back(tr);
            key.insert(key.end(), {tr.a, tr.b, tr.c ^ g.triples.front().c});
        }
        if (distinct && !seen.insert(key).second) {
            continue;
        }
        cb.entries.push_back(std::move(g));
    }
    return cb;
}

BinnedCodebook make_binned_codebook(int n, int num_messages, double bin_rate, const std::vector<double>& p_x,
                                    uint64_t seed) {
    if (n < 1 || num_messages < 1) {
        throw InvalidArgument("binned codebook needs n >= 1 and at least one message");
    }
    if (!(bin_rate >= 0)) {
        throw InvalidArgument("bin rate must be non-negative");
    }
    const double bits = std::ceil(n * bin_rate - 1e-12);
    if (bits > 16 || bits + std::log2(static_cast<double>(num_messages)) > 20) {
        throw InvalidArgument("binned codebook with 2^" + std::to_string(static_cast<int>(bits)) +
                              " sequences per bin is too large");
    }
    BinnedCodebook cb;
    cb.n = n;
    cb.num_messages = num_messages;
    cb.bin_size = 1 << static_cast<int>(bits);
    cb.rate = std::log2(static_cast<double>(num_messages)) / n;
    cb.rate_tilde = cb.rate + bits / n;
    cb.p_x = p_x;
    cb.seed = seed;
    Rng rng = SeedStream(seed).rng("codebook", 1);
    std::discrete_distribution<int> draw(p_x.begin(), p_x.end());
    cb.bins.assign(num_messages, {});
    for (int m = 0; m < num_messages; ++m) {
        for (int j = 0; j < cb.bin_size; ++j) {
            std::vector<int> xn(n);
            for (int& x : xn) x = draw(rng);
            cb.bins[m].push_back(std::move(xn));
        }
    }
    return cb;
}

CoveringChoice select_codeword(const BinnedCodebook& cb, int m, const std::vector<int>& sn, const JointPmf& p_sx,
                               double delta) {
    if (m < 0 || m >= cb.num_messages) {
        throw InvalidArgument("message index out of range");
    }
    for (int j = 0; j < cb.bin_size; ++j) {
        if (is_jointly_typical(sn, cb.bins[m][j], p_sx, delta)) {
            return {j, false};
        }
    }
    return {0, true};
}

SharedPair SharedPair::from_state(const PureState& xi) {
    const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(xi.dim()))));
    if (d * d != xi.dim()) {
        throw InvalidArgument("shared state of dimension " + std::to_string(xi.dim()) +
                              " is not a pair of equal systems");
    }
    SharedPair p;
    p.dim = d;
    p.coeff = coefficient_matrix(xi.amplitudes(), d, d);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Eigen::MatrixXcd(p.coeff), Eigen::ComputeFullU | Eigen::ComputeFullV);
    p.schmidt_probs = svd.singularValues().array().square();
    p.w = svd.matrixU();
    p.psi = svd.matrixV().conjugate();
    return p;
}

bool SharedPair::is_flat() const {
    return (schmidt_probs.array() - 1.0 / dim).abs().maxCoeff() <= 1e-9;
}

CMatrix SharedPair::power_coeff(int n) const {
    return kron_power(coeff, n);
}

BlockLayout SharedPair::resolve(BlockLayout requested) const {
    if (requested != BlockLayout::kAuto) return requested;
    return is_flat() ? BlockLayout::kSingle : BlockLayout::kTypes;
}

CMatrix causal_k_operator(const CMatrix& u, const SharedPair& pair, int n) {
    const CMatrix w = kron_power(pair.w, n);
    return w * u * w.adjoint();
}

CMatrix causal_b_operator(const CMatrix& u, const SharedPair& pair, int n) {
    const CMatrix psi = kron_power(pair.psi, n);
    return psi * u.transpose() * psi.adjoint();
}

DensityOperator encode_causal(int m, const GammaCodebook& cb, const PureState& xi, const EncoderFamily& fam,
                              const std::vector<int>& sn) {
    const SharedPair pair = SharedPair::from_state(xi);
    const int n = cb.n();
    if (fam.dim_k != pair.dim || cb.dim() != pair.dim) {
        throw InvalidArgument("encoder input dimension " + std::to_string(fam.dim_k) + ", codebook dimension " +
                              std::to_string(cb.dim()) + " and shared system dimension " +
                              std::to_string(pair.dim) + " must agree");
    }
    if (m < 0 || m >= static_cast<int>(cb.entries.size())) {
        throw InvalidArgument("message index out of range");
    }
    require_sequence(sn, n, static_cast<int>(fam.maps.size()));
    const long tail = checked_pow(pair.dim, n, kDenseCap, "shared system");
    checked_pow(static_cast<long>(fam.dim_a) * pair.dim, n, kDenseCap, "encoded state");

    const CMatrix u = causal_k_operator(u_of_gamma(cb.entries[m], cb.layout), pair, n);
    const CVector v = vec(u * pair.power_coeff(n));
    std::vector<const KrausChannel*> chans;
    for (int s : sn) chans.push_back(&fam.maps[s]);
    return DensityOperator(apply_letterwise(v * v.adjoint(), chans, tail));
}

NoncausalEncoding encode_noncausal(int m, const BinnedCodebook& bins, const GammaCodebook& gammas,
                                   const PureState& xi, const EncoderFamily& fam, const std::vector<int>& sn,
                                   const JointPmf& p_sx, double delta) {
    const SharedPair pair = SharedPair::from_state(xi);
    const int n = gammas.n();
    if (fam.dim_k != pair.dim || fam.dim_a != gammas.dim() || bins.n != n) {
        throw InvalidArgument("encoder dimensions " + std::to_string(fam.dim_k) + "->" + std::to_string(fam.dim_a) +
                              " do not match the shared state and codebooks");
    }
    const long needed = static_cast<long>(bins.num_messages) * bins.bin_size;
    if (static_cast<long>(gammas.entries.size()) < needed) {
        throw InvalidArgument("gamma codebook has fewer entries than binned codewords");
    }
    require_sequence(sn, n, static_cast<int>(fam.maps.size()));
    const long tail = checked_pow(pair.dim, n, kDenseCap, "shared system");
    checked_pow(static_cast<long>(fam.dim_a) * pair.dim, n, kDenseCap, "encoded state");

    const CoveringChoice choice = select_codeword(bins, m, sn, p_sx, delta);
    const long ell = bins.global_index(m, choice.bin_offset);

    const CVector v = vec(pair.power_coeff(n));
    std::vector<const KrausChannel*> chans;
    for (int s : sn) chans.push_back(&fam.maps[s]);
    CMatrix rho = apply_letterwise(v * v.adjoint(), chans, tail);

    std::vector<int> dims{static_cast<int>(rho.rows() / tail), static_cast<int>(tail)};
    const CMatrix u = u_of_gamma(gammas.entries[ell], gammas.layout);
    rho = apply_left(u, rho, dims, 0);
    rho = apply_right_adjoint(rho, u, dims, 0);
    return {ell, choice.failure, DensityOperator(rho)};
}

DensityOperator channel_apply_n(const RandomParameterChannel& rp, const std::vector<int>& sn,
                                const DensityOperator& state) {
    const int n = static_cast<int>(sn.size());
    require_sequence(sn, n, rp.num_params());
    const long letters = checked_pow(rp.dim_in(), n, std::numeric_limits<long>::max() / 2, "channel input");
    if (n < 1 || state.dim() % letters != 0) {
        throw InvalidArgument("state of dimension " + std::to_string(state.dim()) + " has no A^n factor of dimension " +
                              std::to_string(letters));
    }
    std::vector<const KrausChannel*> chans;
    for (int s : sn) chans.push_back(&rp.branches[s]);
    return DensityOperator(apply_letterwise(state.matrix(), chans, state.dim() / letters));
}

JointPmf noncausal_joint_pmf(const RandomParameterChannel& rp, const EncoderFamily& fam, const PureState& xi) {
    const SharedPair pair = SharedPair::from_state(xi);
    fam.validate(rp.num_params());
    if (fam.dim_k != pair.dim) {
        throw InvalidArgument("encoder input dimension does not match the shared state");
    }
    JointPmf p(rp.num_params(), std::vector<double>(fam.dim_a, 0.0));
    std::vector<int> dims{pair.dim, pair.dim};
    for (int s = 0; s < rp.num_params(); ++s) {
        const auto& ops = fam.maps[s].kraus_ops();
        if (ops.size() != 1) {
            throw InvalidArgument("non-causal encoding needs an isometric encoder family");
        }
        const CVector phi = apply_to_vector(ops.front(), xi.amplitudes(), dims, 0);
        const CMatrix c = coefficient_matrix(phi, fam.dim_a, pair.dim);
        const RVector sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(Eigen::MatrixXcd(c)).singularValues();
        for (int x = 0; x < sv.size() && x < fam.dim_a; ++x) {
            p[s][x] = rp.probs[s] * sv(x) * sv(x);
        }
    }
    return p;
}

void Povm::validate() const {
    if (elements.empty()) {
        throw InvalidArgument("POVM has no elements");
    }
    CMatrix sum = CMatrix::Zero(dim, dim);
    for (size_t k = 0; k < elements.size(); ++k) {
        const CMatrix& e = elements[k];
        if (e.rows() != dim || e.cols() != dim) {
            throw InvalidArgument("POVM element " + std::to_string(k) + " has the wrong dimension");
        }
        if (hermitian_residual(e) > 1e-9) {
            throw InvalidArgument("POVM element " + std::to_string(k) + " is not Hermitian");
        }
        const RVector ev = eigenvalues_hermitian(e);
        if (ev(0) < -1e-9) {
            throw InvalidArgument("POVM element " + std::to_string(k) + " has eigenvalue " + std::to_string(ev(0)));
        }
        sum += e;
    }
    const double r = max_abs_entry(sum - CMatrix::Identity(dim, dim));
    if (r > 1e-8) {
        throw InvalidArgument("POVM elements sum to identity only within " + std::to_string(r));
    }
}

Povm sqrt_measurement(const std::vector<CMatrix>& signals) {
    if (signals.empty()) {
        throw InvalidArgument("square-root measurement needs at least one signal");
    }
    const long d = signals.front().rows();
    CMatrix t = CMatrix::Zero(d, d);
    for (const auto& s : signals) {
        if (s.rows() != d || s.cols() != d) {
            throw InvalidArgument("signals have different dimensions");
        }
        t += s;
    }
    const double tr = t.trace().real();
    if (!(tr > 0)) {
        throw InvalidArgument("signal operators sum to zero");
    }
    const double top = std::max(1.0, max_eigenvalue(t));
    const CMatrix t_inv = spectral_function(t, SpectralFn::kInvSqrtSupport, kClipTol * top);
    Povm out;
    out.dim = static_cast<int>(d);
    CMatrix rest = CMatrix::Identity(d, d);
    for (const auto& s : signals) {
        CMatrix l = t_inv * s * t_inv;
        l = 0.5 * (l + l.adjoint()).eval();
        rest -= l;
        out.elements.push_back(std::move(l));
    }
    out.elements.push_back(0.5 * (rest + rest.adjoint()));
    return out;
}

PackingReport packing_conditions_check(const Projector& code_proj, const std::vector<Projector>& codeword_projs,
                                       const PackingEnsemble& ens, const PackingTargets& targets,
                                       std::optional<double> alpha) {
    const int d = code_proj.dim;
    if (ens.states.empty() || ens.states.size() != codeword_projs.size() || ens.pmf.size() != ens.states.size()) {
        throw InvalidArgument("packing check needs one codeword projector and one probability per state");
    }
    if (targets.n < 1) {
        throw InvalidArgument("packing check needs n >= 1");
    }
    for (size_t x = 0; x < ens.states.size(); ++x) {
        if (ens.states[x].rows() != d || codeword_projs[x].dim != d) {
            throw InvalidArgument("packing check: codeword " + std::to_string(x) + " does not have dimension " +
                                  std::to_string(d));
        }
    }
    CMatrix sigma;
    if (ens.average) {
        sigma = *ens.average;
        if (sigma.rows() != d) {
            throw InvalidArgument("packing check: ensemble average has the wrong dimension");
        }
    } else {
        sigma = CMatrix::Zero(d, d);
        for (size_t x = 0; x < ens.states.size(); ++x) sigma += ens.pmf[x] * ens.states[x];
    }

    const double n = targets.n;
    const double inf = std::numeric_limits<double>::infinity();
    double a1 = -inf, a2 = -inf, a3 = -inf;
    for (size_t x = 0; x < ens.states.size(); ++x) {
        a1 = std::max(a1, 1.0 - trace_product(code_proj.matrix, ens.states[x]));
        a2 = std::max(a2, 1.0 - trace_product(codeword_projs[x].matrix, ens.states[x]));
        const double rank = codeword_projs[x].rank();
        if (rank > 0.5) a3 = std::max(a3, std::log2(rank) / n - targets.h_ab);
    }
    const CMatrix sandwiched = code_proj.matrix * sigma * code_proj.matrix;
    const double top = max_eigenvalue(sandwiched);
    const double a4 = top > 1e-300 ? targets.h_a + targets.h_b + std::log2(top) / n : -inf;

    PackingReport r;
    r.measured_alpha = std::max({a1, a2, a3, a4});
    r.alpha = alpha.value_or(r.measured_alpha);
    const double slack = 1e-12;
    r.conditions.push_back({"code projector weight", a1, a1 <= r.alpha + slack});
    r.conditions.push_back({"codeword projector weight", a2, a2 <= r.alpha + slack});
    r.conditions.push_back({"codeword projector rank", a3, a3 <= r.alpha + slack});
    const double bound = std::exp2(-n * (targets.h_a + targets.h_b - r.alpha));
    const bool sandwich_ok = psd_leq(sandwiched, bound * code_proj.matrix, 1e-10 * std::max(1.0, bound));
    r.conditions.push_back({"sandwiched average", a4, sandwich_ok});
    r.all_pass = std::all_of(r.conditions.begin(), r.conditions.end(), [](const auto& c) { return c.pass; });
    return r;
}

CMatrix group_interleaved(const CMatrix& m, int d1, int d2, int n) {
    const long d = checked_pow(static_cast<long>(d1) * d2, n, kDenseCap, "interleaved operator");
    if (m.rows() != d || m.cols() != d) {
        throw InvalidArgument("group_interleaved: operator has the wrong dimension");
    }
    const long p1 = checked_pow(d1, n, kDenseCap, "first factor");
    std::vector<long> perm(d);
    for (long i = 0; i < d; ++i) {
        long rem = i, x = 0, y = 0, wx = 1, wy = 1;
        for (int k = 0; k < n; ++k) {
            const long pair = rem % (static_cast<long>(d1) * d2);
            rem /= static_cast<long>(d1) * d2;
            x += (pair / d2) * wx;
            y += (pair % d2) * wy;
            wx *= d1;
            wy *= d2;
        }
        perm[i] = x * (d / p1) + y;
    }
    CMatrix out(d, d);
    for (long i = 0; i < d; ++i) {
        for (long j = 0; j < d; ++j) {
            out(perm[i], perm[j]) = m(i, j);
        }
    }
    return out;
}

CMatrix gamma_twirl(const CMatrix& rho, const CodeLayout& layout, int dim_front) {
    const long nb = layout.total_dim();
    if (rho.rows() != dim_front * nb) {
        throw InvalidArgument("gamma_twirl: operator does not act on a front system times the code space");
    }
    std::vector<int> dims{dim_front, static_cast<int>(nb)};
    CMatrix out = rho;
    for (int t = 0; t < layout.num_blocks(); ++t) {
        const int d = layout.block_dim(t);
        CMatrix acc = CMatrix::Zero(out.rows(), out.cols());
        for (int c = 0; c < 2; ++c) {
            for (int a = 0; a < d; ++a) {
                for (int b = 0; b < d; ++b) {
                    CMatrix e = CMatrix::Identity(nb, nb);
                    const CMatrix v = heisenberg_weyl(d, a, b) * (c ? -1.0 : 1.0);
                    for (int i = 0; i < d; ++i) {
                        for (int j = 0; j < d; ++j) {
                            e(layout.blocks[t][i], layout.blocks[t][j]) = v(i, j);
                        }
                    }
                    acc += apply_right_adjoint(apply_left(e, out, dims, 1), e, dims, 1);
                }
            }
        }
        out = acc / (2.0 * d * d);
    }
    return out;
}

PackingInstance causal_packing_instance(const RandomParameterChannel& rp, const EncoderFamily& fam, int n,
                                        double delta, int num_codewords, uint64_t seed) {
    const KrausChannel m = virtual_channel(rp, fam);
    const int d = fam.dim_k;
    const int dout = m.dim_out();
    const long nk = checked_pow(d, n, kDenseCap, "code space");
    const long nout = checked_pow(dout, n, kDenseCap, "channel output");
    checked_pow(static_cast<long>(dout) * d, n, kDenseCap, "output pair");

    const PureState xi = max_entangled(d);
    const SharedPair pair = SharedPair::from_state(xi);
    const CodeLayout layout = CodeLayout::make(n, d, BlockLayout::kTypes);

    const CMatrix omega_pair = m.apply(xi.projector(), std::vector<int>{d, d}, 0);
    const DensityOperator w_out(partial_trace(omega_pair, {dout, d}, {0}));
    const DensityOperator w_ref(partial_trace(omega_pair, {dout, d}, {1}));
    const DensityOperator w_pair(omega_pair);

    const TypicalProjector t_out = typical_projector(w_out, n, delta);
    const TypicalProjector t_ref = typical_projector(w_ref, n, delta);
    const TypicalProjector t_pair = typical_projector(w_pair, n, delta);
    const CMatrix code = tensor_product(t_out.proj.matrix, t_ref.proj.matrix);
    const CMatrix pair_proj = group_interleaved(t_pair.proj.matrix, dout, d, n);

    PackingInstance inst;
    inst.code_proj = {static_cast<int>(nout * nk), code};
    inst.targets = {n, t_pair.entropy, t_out.entropy, t_ref.entropy};

    const GammaCodebook cb = make_gamma_codebook(layout, num_codewords, seed);
    const CVector base = vec(pair.power_coeff(n));
    std::vector<const KrausChannel*> chans(n, &m);
    std::vector<int> dims{static_cast<int>(nout), static_cast<int>(nk)};
    for (const auto& g : cb.entries) {
        const CMatrix u = u_of_gamma(g, layout);
        const CVector v = vec(causal_k_operator(u, pair, n) * pair.power_coeff(n));
        inst.ensemble.states.push_back(apply_letterwise(v * v.adjoint(), chans, nk));
        const CMatrix ub = causal_b_operator(u, pair, n);
        inst.codeword_projs.push_back(
            {static_cast<int>(nout * nk), apply_right_adjoint(apply_left(ub, pair_proj, dims, 1), ub, dims, 1)});
        inst.ensemble.pmf.push_back(1.0 / cb.entries.size());
    }
    inst.codewords = static_cast<long>(cb.entries.size());
    // The ensemble average runs over every gamma, not only the drawn ones.
    inst.ensemble.average = gamma_twirl(apply_letterwise(base * base.adjoint(), chans, nk), layout,
                                        static_cast<int>(nout));

    double min_class = std::numeric_limits<double>::infinity();
    for (int t = 0; t < layout.num_blocks(); ++t) {
        min_class = std::min(min_class, std::log2(static_cast<double>(layout.block_dim(t))));
    }
    const double eps_type = t_ref.entropy - min_class / n;
    inst.alpha_bound = std::max({(1.0 - t_out.weight) + (1.0 - t_ref.weight), 1.0 - t_pair.weight,
                                 t_pair.c * delta, eps_type + t_out.c * delta}) +
                       1e-9;
    return inst;
}

std::string scheme_name(Scheme s) {
    return s == Scheme::kCausal ? "causal" : "noncausal";
}

Scheme parse_scheme(const std::string& name) {
    if (name == "causal") return Scheme::kCausal;
    if (name == "noncausal") return Scheme::kNoncausal;
    throw InvalidArgument("unknown scheme '" + name + "' (expected causal or noncausal)");
}

std::string decoder_name(DecoderKind d) {
    return d == DecoderKind::kProjector ? "projector" : "pgm";
}

DecoderKind parse_decoder(const std::string& name) {
    if (name == "projector") return DecoderKind::kProjector;
    if (name == "pgm") return DecoderKind::kPrettyGood;
    throw InvalidArgument("unknown decoder '" + name + "' (expected projector or pgm)");
}

namespace {

struct DecoderFrame {
    CMatrix code;       // Pi on B'^n x B^n
    CMatrix pair_proj;  // typical projector of omega_{B'B}, grouped
    std::vector<int> dims;
};

DecoderFrame decoder_frame(const KrausChannel& m, const PureState& xi, int d, int n, double delta) {
    const int dout = m.dim_out();
    const CMatrix omega_pair = m.apply(xi.projector(), std::vector<int>{d, d}, 0);
    const DensityOperator w_out(partial_trace(omega_pair, {dout, d}, {0}));
    const DensityOperator w_ref(partial_trace(omega_pair, {dout, d}, {1}));
    DecoderFrame f;
    f.code = tensor_product(typical_projector(w_out, n, delta).proj.matrix,
                            typical_projector(w_ref, n, delta).proj.matrix);
    f.pair_proj = group_interleaved(typical_projector(DensityOperator(omega_pair), n, delta).proj.matrix, dout, d, n);
    long nout = 1, nk = 1;
    for (int i = 0; i < n; ++i) {
        nout *= dout;
        nk *= d;
    }
    f.dims = {static_cast<int>(nout), static_cast<int>(nk)};
    return f;
}

CMatrix projector_signal(const DecoderFrame& f, const CMatrix& ub) {
    const CMatrix pg = apply_right_adjoint(apply_left(ub, f.pair_proj, f.dims, 1), ub, f.dims, 1);
    return f.code * pg * f.code;
}

double success(const CMatrix& element, const CMatrix& rho) {
    return trace_product(element, rho);
}

/// Square-root measurement, or nullopt when every signal vanishes (typical
/// projectors can be empty at small n); the decoder then always errs.
std::optional<Povm> decoder_povm(const std::vector<CMatrix>& signals) {
    double total = 0;
    for (const auto& s : signals) total += s.trace().real();
    if (total <= 1e-12) return std::nullopt;
    return sqrt_measurement(signals);
}

void finish(SimReport& r) {
    double sum = 0, top = 0;
    for (double& e : r.per_message_error) {
        e = std::clamp(e, 0.0, 1.0);
        sum += e;
        top = std::max(top, e);
    }
    r.max_error = top;
    r.avg_error = sum / r.per_message_error.size();
}

}  // namespace

SimReport simulate(const RandomParameterChannel& rp, const EncoderFamily& fam, const PureState& xi,
                   const SimConfig& cfg) {
    rp.validate();
    fam.validate(rp.num_params());
    if (cfg.num_messages < 2) {
        throw InvalidArgument("simulate needs at least 2 messages");
    }
    if (cfg.n < 1) {
        throw InvalidArgument("simulate needs n >= 1");
    }
    if (cfg.delta < 0) {
        throw InvalidArgument("delta must be non-negative");
    }
    const SharedPair pair = SharedPair::from_state(xi);
    const int d = pair.dim;
    const int n = cfg.n;
    if (fam.dim_k != d) {
        throw InvalidArgument("encoder input dimension " + std::to_string(fam.dim_k) +
                              " does not match the shared system dimension " + std::to_string(d));
    }
    const int dout = rp.dim_out();
    checked_pow(static_cast<long>(d) * d, n, cfg.dim_cap, "shared pair K x B");
    checked_pow(static_cast<long>(fam.dim_a) * d, n, cfg.dim_cap, "encoded pair A x B");
    checked_pow(static_cast<long>(dout) * d, n, cfg.dim_cap, "output pair B' x B");
    const long nk = checked_pow(d, n, cfg.dim_cap, "code space");

    SimReport r;
    r.scheme = cfg.scheme;
    r.n = n;
    r.message_count = cfg.num_messages;
    r.rate = std::log2(static_cast<double>(cfg.num_messages)) / n;
    r.rate_tilde = r.rate;
    r.delta = cfg.delta;
    r.decoder = cfg.decoder;
    r.seed = cfg.seed;
    r.layout = pair.resolve(cfg.layout);

    const KrausChannel m = virtual_channel(rp, fam);
    const CVector base = vec(pair.power_coeff(n));

    if (cfg.scheme == Scheme::kCausal) {
        // The per-letter virtual channel averages every s^n exactly.
        r.parameter_sequences = static_cast<long>(std::llround(std::pow(rp.num_params(), n)));
        const CodeLayout layout = CodeLayout::make(n, d, r.layout);
        const GammaCodebook cb = make_gamma_codebook(layout, cfg.num_messages, cfg.seed);
        std::vector<const KrausChannel*> chans(n, &m);
        std::vector<CMatrix> states, signals;
        std::optional<DecoderFrame> frame;
        if (cfg.decoder == DecoderKind::kProjector) frame = decoder_frame(m, xi, d, n, cfg.delta);
        for (const auto& g : cb.entries) {
            const CMatrix u = u_of_gamma(g, layout);
            const CVector v = vec(causal_k_operator(u, pair, n) * pair.power_coeff(n));
            states.push_back(apply_letterwise(v * v.adjoint(), chans, nk));
            signals.push_back(frame ? projector_signal(*frame, causal_b_operator(u, pair, n)) : states.back());
        }
        const auto povm = decoder_povm(signals);
        for (int k = 0; k < cfg.num_messages; ++k) {
            r.per_message_error.push_back(povm ? 1.0 - success(povm->elements[k], states[k]) : 1.0);
        }
        finish(r);
        return r;
    }

    if (!fam.isometric || fam.dim_a != d) {
        throw InvalidArgument("the non-causal scheme needs a unitary encoder family on the shared system dimension");
    }
    const JointPmf p_sx = noncausal_joint_pmf(rp, fam, xi);
    const BinnedCodebook bins = make_binned_codebook(n, cfg.num_messages, cfg.bin_rate, marginal_x(p_sx), cfg.seed);
    r.rate_tilde = bins.rate_tilde;
    const long total = static_cast<long>(bins.num_messages) * bins.bin_size;
    const CodeLayout layout = CodeLayout::make(n, d, r.layout);
    const GammaCodebook cb = make_gamma_codebook(layout, static_cast<int>(total), cfg.seed);

    // Parameter sequences with weights: all of them when affordable.
    std::vector<std::vector<int>> seqs;
    std::vector<double> weights;
    const double count = std::pow(rp.num_params(), n);
    if (count <= static_cast<double>(cfg.exact_param_cap)) {
        for (long idx = 0; idx < static_cast<long>(count); ++idx) {
            std::vector<int> sn = sequence_digits(idx, rp.num_params(), n);
            double w = 1;
            for (int s : sn) w *= rp.probs[s];
            if (w == 0) continue;
            seqs.push_back(std::move(sn));
            weights.push_back(w);
        }
    } else {
        r.monte_carlo = true;
        Rng rng = SeedStream(cfg.seed).rng("monte-carlo");
        std::discrete_distribution<int> draw(rp.probs.begin(), rp.probs.end());
        for (long k = 0; k < cfg.mc_samples; ++k) {
            std::vector<int> sn(n);
            for (int& s : sn) s = draw(rng);
            seqs.push_back(std::move(sn));
            weights.push_back(1.0 / cfg.mc_samples);
        }
    }
    r.parameter_sequences = static_cast<long>(seqs.size());

    std::vector<CMatrix> us;
    for (const auto& g : cb.entries) us.push_back(u_of_gamma(g, layout));
    std::vector<int> dims_ab{static_cast<int>(nk), static_cast<int>(nk)};
    const long out_dim = checked_pow(dout, n, cfg.dim_cap, "channel output") * nk;
    std::vector<CMatrix> states(cfg.num_messages, CMatrix::Zero(out_dim, out_dim));
    double fail_mass = 0;
    for (size_t q = 0; q < seqs.size(); ++q) {
        const auto& sn = seqs[q];
        CVector v = base;
        std::vector<int> dims_letters(n, d);
        dims_letters.push_back(static_cast<int>(nk));
        for (int i = 0; i < n; ++i) {
            v = apply_to_vector(fam.maps[sn[i]].kraus_ops().front(), v, dims_letters, i);
        }
        std::vector<const KrausChannel*> chans;
        for (int s : sn) chans.push_back(&rp.branches[s]);
        for (int k = 0; k < cfg.num_messages; ++k) {
            const CoveringChoice choice = select_codeword(bins, k, sn, p_sx, cfg.delta);
            if (choice.failure) {
                ++r.covering_failures;
                fail_mass += weights[q];
            }
            const CVector w = apply_to_vector(us[bins.global_index(k, choice.bin_offset)], v, dims_ab, 0);
            states[k] += weights[q] * apply_letterwise(w * w.adjoint(), chans, nk);
        }
    }
    r.covering_failure_prob = fail_mass / cfg.num_messages;

    if (cfg.decoder == DecoderKind::kProjector) {
        const DecoderFrame frame = decoder_frame(m, xi, d, n, cfg.delta);
        std::vector<CMatrix> signals;
        for (const auto& u : us) signals.push_back(projector_signal(frame, u.transpose()));
        const auto povm = decoder_povm(signals);
        for (int k = 0; k < cfg.num_messages; ++k) {
            double ok = 0;
            for (int j = 0; povm && j < bins.bin_size; ++j) {
                ok += success(povm->elements[bins.global_index(k, j)], states[k]);
            }
            r.per_message_error.push_back(1.0 - ok);
        }
    } else {
        const Povm povm = sqrt_measurement(states);
        for (int k = 0; k < cfg.num_messages; ++k) {
            r.per_message_error.push_back(1.0 - success(povm.elements[k], states[k]));
        }
    }
    finish(r);
    return r;
}

nlohmann::ordered_json to_json(const SimReport& r) {
    nlohmann::ordered_json j;
    j["scheme"] = scheme_name(r.scheme);
    j["n"] = r.n;
    j["message_count"] = r.message_count;
    j["rate"] = r.rate;
    if (r.scheme == Scheme::kNoncausal) j["rate_tilde"] = r.rate_tilde;
    j["delta"] = r.delta;
    j["layout"] = layout_name(r.layout);
    j["decoder"] = decoder_name(r.decoder);
    j["per_message_error"] = r.per_message_error;
    j["max_error"] = r.max_error;
    j["avg_error"] = r.avg_error;
    if (r.scheme == Scheme::kNoncausal) {
        j["covering_failures"] = r.covering_failures;
        j["covering_failure_prob"] = r.covering_failure_prob;
    }
    j["parameter_average"] = r.monte_carlo ? "monte_carlo" : "exact";
    j["parameter_sequences"] = r.parameter_sequences;
    j["seed"] = r.seed;
    return j;
}

std::string sim_csv_header() {
    return "n,rate,max_error,avg_error";
}

std::string to_csv_row(const SimReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << r.n << ',' << r.rate << ',' << r.max_error << ',' << r.avg_error;
    return os.str();
}

}  // namespace eacsi
