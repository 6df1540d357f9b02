#include "eacsi/capacity.h"

#include <cmath>

#include "gtest/gtest.h"

#include "eacsi/random.h"

using namespace eacsi;

namespace {

double h2(double p) { return p <= 0 || p >= 1 ? 0 : -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

// Entropy from a diagonal spectrum, used as an independent oracle.
double entropy_of(std::initializer_list<double> ev) {
    double h = 0;
    for (double p : ev)
        if (p > 0) h -= p * std::log2(p);
    return h;
}

EncoderFamily flip_family() { return EncoderFamily::unitaries({identity(2), fixtures::pauli_z()}); }

EncoderFamily random_unitary_family(int d, int ns, Rng& rng) {
    std::vector<CMatrix> us;
    for (int s = 0; s < ns; ++s) us.push_back(random_unitary(d, rng));
    return EncoderFamily::unitaries(us);
}

EncoderFamily random_channel_family(int dk, int da, int ns, Rng& rng) {
    EncoderFamily fam;
    fam.dim_k = dk;
    fam.dim_a = da;
    for (int s = 0; s < ns; ++s) fam.maps.push_back(fixtures::random_channel(dk, da, 2, rng));
    return fam;
}

// U_s on K followed by appending a fixed rank-2 qubit ancilla state.
EncoderFamily ancilla_family(int ns, Rng& rng) {
    const CMatrix tau = random_density_matrix(2, rng);
    const Spectrum sp = eig_hermitian(tau);
    EncoderFamily fam;
    fam.dim_k = 2;
    fam.dim_a = 4;
    for (int s = 0; s < ns; ++s) {
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

EncoderFamily extended(const EncoderFamily& fam) {
    std::vector<CMatrix> vs;
    for (const auto& m : fam.maps) vs.push_back(isometric_extension(m).matrix());
    return EncoderFamily::isometries(vs);
}

OptimizerConfig quick(int restarts, uint64_t seed) {
    OptimizerConfig cfg;
    cfg.restarts = restarts;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST(capacity, scenario_names_round_trip) {
    for (auto s : {CsiScenario::kNone, CsiScenario::kEncoderCausal, CsiScenario::kEncoderNoncausal,
                   CsiScenario::kDecoder, CsiScenario::kBothNoncausal}) {
        EXPECT_EQ(parse_scenario(scenario_name(s)), s);
    }
    EXPECT_EQ(parse_scenario("encoder_noncausal"), CsiScenario::kEncoderNoncausal);
    EXPECT_THROW(parse_scenario("sideways"), InvalidArgument);
}

TEST(capacity, objective_no_csi_examples) {
    const PureState phi = max_entangled(2);
    EXPECT_NEAR(objective_no_csi(phi, KrausChannel::identity(2)), 2, 1e-9);
    Rng rng(1);
    const PureState any(random_unit_vector(4, rng));
    EXPECT_NEAR(objective_no_csi(any, KrausChannel::completely_depolarizing(2)), 0, 1e-9);
    // Output is (|00><00| + |11><11|)/2: H(A) = H(B) = 1, H(AB) = 1.
    const double oracle = entropy_of({0.5, 0.5}) + entropy_of({0.5, 0.5}) - entropy_of({0.5, 0.5, 0, 0});
    EXPECT_NEAR(objective_no_csi(phi, average_channel(fixtures::dephasing_parameter())), oracle, 1e-9);
    EXPECT_NEAR(oracle, 1, 1e-12);
    EXPECT_THROW(objective_no_csi(PureState(random_unit_vector(3, rng)), KrausChannel::identity(2)), InvalidArgument);
}

TEST(capacity, objective_causal_examples) {
    Rng rng(2);
    const auto same = fixtures::state_independent();
    const PureState theta(random_unit_vector(4, rng));
    // Channel acts on K, the first factor; objective_no_csi expects it second.
    CVector swapped(4);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) swapped(j * 2 + i) = theta.amplitudes()(i * 2 + j);
    EXPECT_NEAR(objective_causal(theta, EncoderFamily::identity(2, 2), same),
                objective_no_csi(PureState(swapped), average_channel(same)), 1e-9);

    EXPECT_NEAR(objective_causal(max_entangled(2), flip_family(), fixtures::dephasing_parameter()), 2, 1e-9);

    const auto dep = fixtures::depolarizing(2);
    EXPECT_NEAR(objective_causal(theta, EncoderFamily::identity(2, 1), dep), 0, 1e-9);
}

TEST(capacity, objective_causal_paths_agree) {
    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        const auto rp = fixtures::random_two_param_qubit(rng);
        const int dk = 2 + rep % 2;
        const int dr = 2 + (rep / 2) % 2;
        const PureState theta(random_unit_vector(dk * dr, rng));
        const EncoderFamily fam = random_channel_family(dk, 2, 2, rng);
        EXPECT_NEAR(objective_causal(theta, fam, rp), objective_causal_virtual(theta, fam, rp), 1e-9);
    }
}

TEST(capacity, objective_noncausal_examples) {
    Rng rng(4);
    const auto rp = fixtures::random_two_param_qubit(rng);
    const PureState theta(random_unit_vector(4, rng));
    const CMatrix u = random_unitary(2, rng);
    const NoncausalValue constant = objective_noncausal(theta, EncoderFamily::unitaries({u, u}), rp);
    EXPECT_NEAR(constant.i_as, 0, 1e-9);
    EXPECT_NEAR(constant.value, constant.i_ab, 1e-12);

    const NoncausalValue flip = objective_noncausal(max_entangled(2), flip_family(), fixtures::dephasing_parameter());
    EXPECT_NEAR(flip.value, 2, 1e-9);
    EXPECT_NEAR(flip.i_as, 0, 1e-9);

    // Depolarizing branches: B carries nothing, so value = -I(A;S).
    RandomParameterChannel dep2{"dep2", {"0", "1"}, {0.5, 0.5},
                                {KrausChannel::completely_depolarizing(2), KrausChannel::completely_depolarizing(2)}};
    const NoncausalValue v = objective_noncausal(theta, random_unitary_family(2, 2, rng), dep2);
    EXPECT_NEAR(v.i_ab, 0, 1e-9);
    EXPECT_NEAR(v.value, -v.i_as, 1e-12);
    EXPECT_LE(v.value, 1e-12);
    EXPECT_NEAR(objective_noncausal(theta, EncoderFamily::unitaries({u, u}), dep2).value, 0, 1e-9);

    EXPECT_THROW(objective_noncausal(theta, random_channel_family(2, 2, 2, rng), rp), InvalidArgument);
}

TEST(capacity, objective_decoder_examples) {
    Rng rng(5);
    const auto same = fixtures::state_independent();
    const PureState phi(random_unit_vector(4, rng));
    EXPECT_NEAR(objective_decoder(phi, same), objective_no_csi(phi, same.branches[0]), 1e-9);
    for (double alpha : {0.0, 0.3, 0.5, 1.0}) {
        // Stuck branches give I = 0, the transparent branch gives 2.
        EXPECT_NEAR(objective_decoder(max_entangled(2), fixtures::stuck_at(alpha)), 2 * (1 - alpha), 1e-9);
    }
}

TEST(capacity, objective_both_examples) {
    Rng rng(6);
    const auto same = fixtures::state_independent();
    const PureState theta(random_unit_vector(4, rng));
    const CMatrix u = random_unitary(2, rng);
    const EncoderFamily constant = EncoderFamily::unitaries({u, u});
    const PureState rotated(apply_to_vector(u, theta.amplitudes(), std::vector<int>{2, 2}, 0));
    EXPECT_NEAR(objective_both(theta, constant, same), objective_no_csi(rotated, same.branches[0]), 1e-9);

    EXPECT_NEAR(objective_both(max_entangled(2), EncoderFamily::identity(2, 3), fixtures::stuck_at(0.5)), 1, 1e-9);
    EXPECT_NEAR(objective_both(max_entangled(2), flip_family(), fixtures::dephasing_parameter()), 2, 1e-9);
}

TEST(capacity, both_dominates_noncausal_pointwise) {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const auto rp = fixtures::random_two_param_qubit(rng);
        const PureState theta(random_unit_vector(4, rng));
        const EncoderFamily fam = random_unitary_family(2, 2, rng);
        EXPECT_GE(objective_both(theta, fam, rp), objective_noncausal(theta, fam, rp).value - 1e-8);
    }
}

TEST(capacity, purification_never_decreases_causal_objective) {
    Rng rng(8);
    for (int rep = 0; rep < 20; ++rep) {
        const auto rp = fixtures::random_two_param_qubit(rng);
        const DensityOperator mixed(random_density_matrix(4, rng));  // K x R, both qubits
        const EncoderFamily fam = random_channel_family(2, 2, 2, rng);
        const double before = objective_causal_mixed(mixed, 2, fam, rp);
        const PureState pure = purify(mixed);  // K x (R x J)
        EXPECT_GE(objective_causal(pure, fam, rp), before - 1e-8);
    }
}

TEST(capacity, isometric_extension_keeps_i_as_for_ancilla_families) {
    // F^(s)(rho) = U_s rho U_s^dagger x tau: the environment purifies the
    // ancilla and carries nothing about s, so I(A E;S) = I(A;S).
    Rng rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        const auto rp = fixtures::random_two_param_qubit(rng);
        const PureState theta(random_unit_vector(4, rng));
        const EncoderFamily fam = ancilla_family(2, rng);
        const NoncausalValue mixed = objective_noncausal(theta, fam, rp, false);
        const NoncausalValue iso = objective_noncausal(theta, extended(fam), rp);
        EXPECT_NEAR(iso.i_as, mixed.i_as, 1e-9) << "rep " << rep;
        EXPECT_GE(iso.i_ab, mixed.i_ab - 1e-8);
    }
}

TEST(capacity, isometric_extension_general_families_only_bound_i_as) {
    // For arbitrary Kraus families the environment can depend on s given A.
    Rng rng(10);
    double largest_gap = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const auto rp = fixtures::random_two_param_qubit(rng);
        const PureState theta(random_unit_vector(4, rng));
        const EncoderFamily fam = random_channel_family(2, 2, 2, rng);
        const NoncausalValue mixed = objective_noncausal(theta, fam, rp, false);
        const NoncausalValue iso = objective_noncausal(theta, extended(fam), rp);
        EXPECT_GE(iso.i_ab, mixed.i_ab - 1e-8);
        EXPECT_GE(iso.i_as, mixed.i_as - 1e-8);
        largest_gap = std::max(largest_gap, iso.i_as - mixed.i_as);
    }
    EXPECT_GT(largest_gap, 1e-3);
}

TEST(capacity, maximize_identity_and_depolarizing) {
    const auto id = maximize(CsiScenario::kNone, fixtures::identity_channel(2), quick(4, 1));
    EXPECT_NEAR(id.value_bits, 2, 1e-3);
    EXPECT_EQ(id.restart_values.size(), 4u);
    const auto dep = maximize(CsiScenario::kNone, fixtures::depolarizing(2), quick(2, 1));
    EXPECT_LE(dep.value_bits, 1e-3);
    EXPECT_GE(dep.value_bits, -1e-8);
}

TEST(capacity, maximize_noncausal_dephasing) {
    const auto est = maximize(CsiScenario::kEncoderNoncausal, fixtures::dephasing_parameter(), quick(6, 3));
    EXPECT_GE(est.value_bits, 1.95);
    EXPECT_LE(est.value_bits, 2 + 1e-6);
    EXPECT_NEAR(est.noncausal.value, est.value_bits, 1e-9);
}

TEST(capacity, maximize_is_deterministic) {
    const auto rp = fixtures::dephasing_parameter();
    const auto a = maximize(CsiScenario::kEncoderCausal, rp, quick(3, 42));
    const auto b = maximize(CsiScenario::kEncoderCausal, rp, quick(3, 42));
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    const auto c = maximize(CsiScenario::kEncoderCausal, rp, quick(3, 43));
    EXPECT_NE(to_json(a).dump(), to_json(c).dump());
}

TEST(capacity, maximize_value_is_best_restart) {
    const auto est = maximize(CsiScenario::kDecoder, fixtures::stuck_at(0.5), quick(3, 5));
    double best = -1;
    for (double v : est.restart_values) best = std::max(best, v);
    EXPECT_EQ(est.value_bits, best);
    EXPECT_NEAR(est.value_bits, 1, 0.05);
}

TEST(capacity, maximize_rejects_bad_config) {
    EXPECT_THROW(maximize(CsiScenario::kNone, fixtures::identity_channel(2), quick(0, 1)), InvalidArgument);
    OptimizerConfig cfg = quick(1, 1);
    cfg.dim_k = 3;
    cfg.dim_ref = 2;
    EXPECT_THROW(maximize(CsiScenario::kEncoderNoncausal, fixtures::dephasing_parameter(), cfg), InvalidArgument);
}

TEST(capacity, quantum_from_classical) {
    EXPECT_EQ(quantum_capacity_from_classical(2), 1);
    EXPECT_EQ(quantum_capacity_from_classical(0), 0);
    EXPECT_EQ(quantum_capacity_from_classical(1.5), 0.75);
    EXPECT_THROW(quantum_capacity_from_classical(-0.1), InvalidArgument);
}

TEST(capacity, blahut_arimoto_bsc) {
    for (double eps : {0.0, 0.1, 0.3, 0.5}) {
        const auto r = blahut_arimoto({{1 - eps, eps}, {eps, 1 - eps}});
        EXPECT_NEAR(r.capacity, 1 - h2(eps), 1e-9) << eps;
    }
    // Z channel with 0.5: capacity log2(1 + 2^{-h(0.5)/0.5}) = log2(1.25).
    EXPECT_NEAR(blahut_arimoto({{1, 0}, {0.5, 0.5}}).capacity, std::log2(1.25), 1e-8);
}

TEST(capacity, shannon_strategy_examples) {
    ClassicalChannelWithState noiseless = classical_fixtures::bsc(0.0);
    EXPECT_NEAR(classical_shannon_strategy(noiseless), 1, 1e-9);

    // Exhaustive over the 4 strategies t: S -> X: t(s) = s xor b gives Y = b, a noiseless bit.
    EXPECT_NEAR(classical_shannon_strategy(classical_fixtures::xor_state()), 1, 1e-6);

    ClassicalChannelWithState flat = classical_fixtures::bsc(0.5);
    EXPECT_NEAR(classical_shannon_strategy(flat), 0, 1e-9);

    ClassicalChannelWithState big = classical_fixtures::xor_state();
    EXPECT_THROW(classical_shannon_strategy(big, 3), InvalidArgument);
}

TEST(capacity, gelfand_pinsker_state_independent) {
    const auto bsc = classical_fixtures::bsc(0.1);
    const auto r = classical_gelfand_pinsker(bsc, 2);
    EXPECT_NEAR(r.value, 1 - h2(0.1), 1e-4);
    EXPECT_NEAR(classical_gelfand_pinsker(classical_fixtures::stuck_at_memory(0.0), 2).value, 1, 1e-9);
}

TEST(capacity, gelfand_pinsker_stuck_at_grid_oracle) {
    // Independent oracle: x = u, grid over p(u=1|s) at step 0.01, objective
    // computed from the joint distribution of (S, U, Y).
    const double p = 0.3;
    const double q[3] = {p / 2, p / 2, 1 - p};
    double oracle = -1;
    for (int a = 0; a <= 100; ++a) {
        for (int b = 0; b <= 100; ++b) {
            for (int c = 0; c <= 100; ++c) {
                const double pu1[3] = {a / 100.0, b / 100.0, c / 100.0};
                double joint_su[3][2], joint_uy[2][2] = {{0, 0}, {0, 0}}, pu[2] = {0, 0};
                for (int s = 0; s < 3; ++s) {
                    joint_su[s][1] = q[s] * pu1[s];
                    joint_su[s][0] = q[s] * (1 - pu1[s]);
                    for (int u = 0; u < 2; ++u) {
                        const int y = s == 2 ? u : s;
                        joint_uy[u][y] += joint_su[s][u];
                        pu[u] += joint_su[s][u];
                    }
                }
                const double py[2] = {joint_uy[0][0] + joint_uy[1][0], joint_uy[0][1] + joint_uy[1][1]};
                double iuy = 0, ius = 0;
                for (int u = 0; u < 2; ++u) {
                    for (int y = 0; y < 2; ++y)
                        if (joint_uy[u][y] > 0) iuy += joint_uy[u][y] * std::log2(joint_uy[u][y] / (pu[u] * py[y]));
                    for (int s = 0; s < 3; ++s)
                        if (joint_su[s][u] > 0) ius += joint_su[s][u] * std::log2(joint_su[s][u] / (pu[u] * q[s]));
                }
                oracle = std::max(oracle, iuy - ius);
            }
        }
    }
    EXPECT_NEAR(oracle, 0.7, 0.02);
    const auto r = classical_gelfand_pinsker(classical_fixtures::stuck_at_memory(p), 2);
    EXPECT_NEAR(r.value, oracle, 0.02);
    EXPECT_NEAR(r.value, 0.7, 0.02);
}

TEST(capacity, classical_file_parsing) {
    const std::string text = R"({"name":"xor","w":[[[1,0],[0,1]],[[0,1],[1,0]]],"q":[0.5,0.5]})";
    const auto ch = parse_classical(text);
    EXPECT_EQ(ch.x_size, 2);
    EXPECT_EQ(ch.s_size, 2);
    EXPECT_EQ(ch.p(1, 0, 1), 1.0);
    EXPECT_NEAR(classical_shannon_strategy(ch), 1, 1e-6);
    EXPECT_THROW(parse_classical(R"({"w":[[[0.5]]],"q":[1]})"), InvalidArgument);
    EXPECT_THROW(parse_classical(R"({"w":[[[1]]],"q":[0.5]})"), InvalidArgument);
    EXPECT_THROW(parse_classical("[]"), InvalidArgument);
}
