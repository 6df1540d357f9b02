#include "eacsi/verify.h"

#include <cmath>
#include <cstdio>

#include "eacsi/capacity.h"
#include "eacsi/mtypes.h"
#include "eacsi/protosim.h"
#include "eacsi/random.h"

namespace eacsi {

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

CheckResult bound_check(const std::string& name, double worst, double tol) {
    return {name, worst <= tol, "max deviation " + fmt("%.3g", worst) + " (tolerance " + fmt("%.0e", tol) + ")"};
}

}  // namespace

EncoderFamily ancilla_family(int num_params, Rng& rng) {
    const CMatrix tau = random_density_matrix(2, rng);
    const Spectrum sp = eig_hermitian(tau);
    EncoderFamily fam;
    fam.dim_k = 2;
    fam.dim_a = 4;
    for (int s = 0; s < num_params; ++s) {
        const CMatrix u = random_unitary(2, rng);
        std::vector<CMatrix> ops;
        for (int j = 0; j < 2; ++j) {
            const CMatrix col = std::sqrt(std::max(sp.eigenvalues(j), 0.0)) * CMatrix(sp.eigenvectors.col(j));
            ops.push_back(tensor_product(u, col));
        }
        fam.maps.emplace_back(2, 4, ops);
    }
    return fam;
}

EncoderFamily extended_family(const EncoderFamily& fam) {
    std::vector<CMatrix> vs;
    for (const auto& m : fam.maps) vs.push_back(isometric_extension(m).matrix());
    return EncoderFamily::isometries(vs);
}

std::vector<std::vector<double>> dsbs(double crossover) {
    return {{0.5 * (1 - crossover), 0.5 * crossover}, {0.5 * crossover, 0.5 * (1 - crossover)}};
}

std::vector<CheckResult> verify_algebra(const VerifyOptions& opt) {
    const SeedStream seeds(opt.seed);
    std::vector<CheckResult> out;

    double worst = 0;
    for (int d = 2; d <= 5; ++d) {
        worst = std::max(worst, std::abs(mutual_info(max_entangled(d).density(), d, d) - 2 * std::log2(double(d))));
    }
    out.push_back(bound_check("max_entangled_mutual_info", worst, 1e-9));

    Rng rng = seeds.rng("verify", 1);
    worst = 0;
    for (int d : {2, 3, 5}) {
        std::vector<CMatrix> ops;
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) ops.push_back(heisenberg_weyl(d, a, b));
        }
        if (opt.inject_fault) ops.pop_back();
        for (int rep = 0; rep < 10; ++rep) {
            const CMatrix rho = random_density_matrix(d, rng);
            CMatrix avg = CMatrix::Zero(d, d);
            for (const auto& s : ops) avg += s * rho * s.adjoint();
            avg /= double(d * d);
            worst = std::max(worst, max_abs_entry(avg - identity(d) / double(d)));
        }
    }
    out.push_back(bound_check("weyl_twirl", worst, 1e-10));

    rng = seeds.rng("verify", 2);
    worst = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const int d = 2 + rep % 3;
        worst = std::max(worst, ricochet_check(random_unitary(d, rng), d));
    }
    out.push_back(bound_check("ricochet_haar", worst, 1e-12));

    worst = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 1 + rep % 3;
        const CodeLayout layout = CodeLayout::make(n, 2, BlockLayout::kTypes);
        const GammaCodebook cb = make_gamma_codebook(layout, 1, opt.seed * 131 + rep);
        worst = std::max(worst, ricochet_check(u_of_gamma(cb.entries[0], layout), 1 << n));
    }
    out.push_back(bound_check("ricochet_code_unitaries", worst, 1e-12));

    worst = 0;
    for (int d : {2, 3}) {
        CMatrix sum = CMatrix::Zero(d * d * d, d * d * d);
        for (const auto& t : enumerate_types(3, d)) sum += type_projector(t, d, 3).matrix;
        worst = std::max(worst, max_abs_entry(sum - identity(d * d * d)));
    }
    out.push_back(bound_check("type_projectors_resolve_identity", worst, 1e-12));

    {
        rng = seeds.rng("verify", 3);
        const int n = 6;
        const double delta = 0.15;
        const DensityOperator rho(random_density_matrix(2, rng));
        const TypicalProjector tp = typical_projector(rho, n, delta);
        const CMatrix& p = tp.proj.matrix;
        CMatrix rho_n = CMatrix::Identity(1, 1);
        for (int i = 0; i < n; ++i) rho_n = tensor_product(rho_n, rho.matrix());
        const double idem = max_abs_entry(p * p - p);
        const double comm = max_abs_entry(p * rho_n - rho_n * p);
        const CMatrix sand = p * rho_n * p;
        const bool upper = psd_leq(sand, std::exp2(-n * (tp.entropy - tp.c * delta)) * p, 1e-12);
        const bool lower = psd_leq(std::exp2(-n * (tp.entropy + tp.c * delta)) * p, sand, 1e-12);
        const bool rank = tp.proj.rank() <= std::exp2(n * (tp.entropy + tp.c * delta)) + 1e-9;
        out.push_back({"typical_projector_properties", idem <= 1e-10 && comm <= 1e-10 && upper && lower && rank,
                       "idempotence " + fmt("%.2g", idem) + ", commutator " + fmt("%.2g", comm) + ", sandwich " +
                           (upper && lower ? "ok" : "violated") + ", rank " + fmt("%.0f", tp.proj.rank())});
    }

    {
        rng = seeds.rng("verify", 4);
        double worst_drop = 0;
        for (int rep = 0; rep < 20; ++rep) {
            const auto rp = fixtures::random_two_param_qubit(rng);
            const DensityOperator mixed(random_density_matrix(4, rng));
            EncoderFamily fam;
            fam.dim_k = 2;
            fam.dim_a = 2;
            for (int s = 0; s < 2; ++s) fam.maps.push_back(fixtures::random_channel(2, 2, 2, rng));
            const double before = objective_causal_mixed(mixed, 2, fam, rp);
            const double after = objective_causal(purify(mixed), fam, rp);
            worst_drop = std::max(worst_drop, before - after);
        }
        out.push_back({"purification_never_decreases_causal_value", worst_drop <= 1e-8,
                       "largest decrease " + fmt("%.3g", std::max(worst_drop, 0.0))});
    }

    {
        rng = seeds.rng("verify", 5);
        double worst_as = 0, worst_ab = 0;
        for (int rep = 0; rep < 20; ++rep) {
            const auto rp = fixtures::random_two_param_qubit(rng);
            const PureState theta(random_unit_vector(4, rng));
            const EncoderFamily fam = ancilla_family(2, rng);
            const NoncausalValue mixed = objective_noncausal(theta, fam, rp, false);
            const NoncausalValue iso = objective_noncausal(theta, extended_family(fam), rp);
            worst_as = std::max(worst_as, std::abs(iso.i_as - mixed.i_as));
            worst_ab = std::max(worst_ab, mixed.i_ab - iso.i_ab);
        }
        out.push_back({"isometric_extension_keeps_i_as", worst_as <= 1e-9 && worst_ab <= 1e-8,
                       "I(A;S) deviation " + fmt("%.3g", worst_as) + ", largest I(A;B) decrease " +
                           fmt("%.3g", std::max(worst_ab, 0.0))});
    }

    {
        rng = seeds.rng("verify", 6);
        bool ok = true;
        for (int rep = 0; rep < 10 && ok; ++rep) {
            std::vector<CMatrix> signals;
            for (int k = 0; k < 2 + rep % 3; ++k) signals.push_back(random_density_matrix(3, rng));
            try {
                sqrt_measurement(signals).validate();
            } catch (const InvalidArgument&) {
                ok = false;
            }
        }
        out.push_back({"sqrt_measurement_is_povm", ok, ok ? "10 random signal sets" : "invalid POVM"});
    }
    return out;
}

std::vector<CheckResult> verify_packing(const VerifyOptions& opt) {
    const int n = opt.n > 0 ? opt.n : 3;
    const double delta = opt.delta >= 0 ? opt.delta : 0.2;
    const auto rp = fixtures::dephasing_parameter();
    PackingInstance inst = causal_packing_instance(rp, EncoderFamily::identity(2, 2), n, delta, 64, opt.seed);
    if (opt.inject_fault) {
        // Collapse the ensemble average onto one code-space vector.
        Eigen::Index col = 0;
        inst.code_proj.matrix.diagonal().real().maxCoeff(&col);
        const CVector v = inst.code_proj.matrix.col(col).normalized();
        inst.ensemble.average = v * v.adjoint();
    }
    const PackingReport r =
        packing_conditions_check(inst.code_proj, inst.codeword_projs, inst.ensemble, inst.targets, inst.alpha_bound);
    std::vector<CheckResult> out;
    for (const auto& c : r.conditions) {
        std::string name = c.name;
        for (char& ch : name) ch = ch == ' ' ? '_' : ch;
        out.push_back({name, c.pass,
                       "measured alpha " + fmt("%.6f", c.measured_alpha) + " at alpha " + fmt("%.6f", r.alpha)});
    }
    out.push_back({"measured_alpha_within_bound", r.measured_alpha <= inst.alpha_bound,
                   "measured alpha " + fmt("%.6f", r.measured_alpha) + ", bound " + fmt("%.6f", inst.alpha_bound) +
                       " (n=" + std::to_string(n) + ", delta=" + fmt("%g", delta) + ")"});
    return out;
}

std::vector<CheckResult> verify_covering(const VerifyOptions& opt) {
    const double delta = opt.delta >= 0 ? opt.delta : 0.05;
    const auto p = dsbs(0.1);
    const double rate = mutual_info_pmf(p) + (opt.inject_fault ? -0.2 : 0.2);
    const int n_small = opt.n > 0 ? opt.n : 100;
    const int n_large = 4 * n_small;
    const SeedStream seeds(opt.seed);
    const CoveringResult a = covering_monte_carlo(p, rate, n_small, delta, opt.trials, seeds.derive("monte-carlo", 0));
    const CoveringResult b = covering_monte_carlo(p, rate, n_large, delta, opt.trials, seeds.derive("monte-carlo", 1));
    const std::string detail = "P_fail(n=" + std::to_string(n_small) + ") = " + fmt("%.4f", a.fail_prob_hat) +
                               ", P_fail(n=" + std::to_string(n_large) + ") = " + fmt("%.4f", b.fail_prob_hat) +
                               ", rate " + fmt("%.4f", rate) + ", " + std::to_string(opt.trials) + " trials";
    return {
        {"covering_failure_decays", b.fail_prob_hat < a.fail_prob_hat || (a.fail_prob_hat == 0 && b.fail_prob_hat == 0),
         detail},
        {"covering_failure_below_half", a.fail_prob_hat < 0.5 && b.fail_prob_hat < 0.5, detail},
    };
}

std::vector<CheckResult> run_suite(const std::string& suite, const VerifyOptions& opt) {
    if (suite == "algebra") return verify_algebra(opt);
    if (suite == "packing") return verify_packing(opt);
    if (suite == "covering") return verify_covering(opt);
    throw InvalidArgument("unknown suite '" + suite + "' (expected algebra, packing or covering)");
}

}  // namespace eacsi
