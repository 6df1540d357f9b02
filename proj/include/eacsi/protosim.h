#pragma once

// Finite-blocklength execution of the entanglement-assisted coding schemes:
// type-block Heisenberg-Weyl codebooks, causal and non-causal encoders,
// covering with binning, square-root measurement decoding and a checker for
// the packing-lemma conditions.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "eacsi/mtypes.h"
#include "eacsi/rpchannel.h"

namespace eacsi {

/// kTypes: one block per type class. kSingle: the whole d^n space is one
/// block. kAuto: kSingle when the shared state has a flat full-rank Schmidt
/// spectrum, kTypes otherwise.
enum class BlockLayout { kTypes, kSingle, kAuto };

std::string layout_name(BlockLayout l);
BlockLayout parse_layout(const std::string& name);

/// Block structure of U(gamma) on (C^dim)^{x n}.
struct CodeLayout {
    int n = 0;
    int dim = 0;
    BlockLayout kind = BlockLayout::kTypes;
    std::vector<std::vector<long>> blocks;  // sequence indices, ascending

    static CodeLayout make(int n, int dim, BlockLayout kind);
    int num_blocks() const { return static_cast<int>(blocks.size()); }
    int block_dim(int t) const { return static_cast<int>(blocks[t].size()); }
    long total_dim() const;
    /// log2 of the number of operators U(gamma) distinct up to a global phase.
    double log2_distinct() const;
};

struct GammaTriple {
    int a = 0;
    int b = 0;
    int c = 0;
    bool operator==(const GammaTriple&) const = default;
};

struct GammaVector {
    std::vector<GammaTriple> triples;  // one per block of the layout
    bool operator==(const GammaVector&) const = default;
};

/// Block t is (-1)^{c_t} X(a_t) Z(b_t) in the block basis.
CMatrix u_of_gamma(const GammaVector& g, const CodeLayout& layout);
CMatrix u_of_gamma(const GammaVector& g, int n, int dim, BlockLayout kind = BlockLayout::kTypes);

struct GammaCodebook {
    CodeLayout layout;
    std::vector<GammaVector> entries;
    uint64_t seed = 0;

    int n() const { return layout.n; }
    int dim() const { return layout.dim; }
};

/// Uniform draws. While the requested count does not exceed the number of
/// phase classes, entries are distinct up to a global phase.
GammaCodebook make_gamma_codebook(const CodeLayout& layout, int count, uint64_t seed);

struct BinnedCodebook {
    int n = 0;
    int num_messages = 0;
    int bin_size = 0;
    double rate = 0;        // log2(num_messages) / n
    double rate_tilde = 0;  // rate + log2(bin_size) / n
    std::vector<double> p_x;
    std::vector<std::vector<std::vector<int>>> bins;  // bins[m][j] = x^n
    uint64_t seed = 0;

    long global_index(int m, int j) const { return static_cast<long>(m) * bin_size + j; }
};

/// bin_size = 2^ceil(n * bin_rate), sequences i.i.d. p_x.
BinnedCodebook make_binned_codebook(int n, int num_messages, double bin_rate, const std::vector<double>& p_x,
                                    uint64_t seed);

struct CoveringChoice {
    int bin_offset = 0;
    bool failure = false;
};

/// Smallest index in bin m jointly typical with sn; index 0 and the failure
/// flag when there is none.
CoveringChoice select_codeword(const BinnedCodebook& cb, int m, const std::vector<int>& sn, const JointPmf& p_sx,
                               double delta);

/// Shared pair xi on K x B with dim K = dim B, written as
/// xi = sum_x sqrt(p_x) W|x> (x) Psi|x>.
struct SharedPair {
    int dim = 0;
    RVector schmidt_probs;  // descending
    CMatrix w;              // dim x dim unitary on K
    CMatrix psi;            // dim x dim unitary on B
    CMatrix coeff;          // coefficient matrix of xi

    static SharedPair from_state(const PureState& xi);
    bool is_flat() const;
    /// Coefficient matrix of xi^{x n} with systems grouped as K^n x B^n.
    CMatrix power_coeff(int n) const;
    /// Resolves kAuto.
    BlockLayout resolve(BlockLayout requested) const;
};

/// U(gamma) expressed on K^n in the Schmidt basis of xi.
CMatrix causal_k_operator(const CMatrix& u, const SharedPair& pair, int n);
/// The reflection of causal_k_operator onto B^n.
CMatrix causal_b_operator(const CMatrix& u, const SharedPair& pair, int n);

/// U(gamma(m)) on the K^n half of xi^{x n}, then F^(s_i) on letter i. Output
/// on A^n x B^n.
DensityOperator encode_causal(int m, const GammaCodebook& cb, const PureState& xi, const EncoderFamily& fam,
                              const std::vector<int>& sn);

struct NoncausalEncoding {
    long ell = 0;  // global codeword index
    bool covering_failure = false;
    DensityOperator state;
};

/// F^(s_i) letterwise, then U(gamma(ell)) in the computational basis of A^n.
NoncausalEncoding encode_noncausal(int m, const BinnedCodebook& bins, const GammaCodebook& gammas,
                                   const PureState& xi, const EncoderFamily& fam, const std::vector<int>& sn,
                                   const JointPmf& p_sx, double delta);

/// N^(s_i) on letter i of the A^n half of a state on A^n x B^n.
DensityOperator channel_apply_n(const RandomParameterChannel& rp, const std::vector<int>& sn,
                                const DensityOperator& state);

/// p(s, x) = q(s) * (Schmidt probabilities of (F^(s) x 1) xi).
JointPmf noncausal_joint_pmf(const RandomParameterChannel& rp, const EncoderFamily& fam, const PureState& xi);

struct Povm {
    int dim = 0;
    std::vector<CMatrix> elements;

    /// Each element PSD within 1e-9, sum equal to 1 within 1e-8.
    void validate() const;
};

/// Lambda_m = T^{-1/2} S_m T^{-1/2}, T = sum_m S_m, with the completion
/// 1 - sum_m Lambda_m appended as the last element.
Povm sqrt_measurement(const std::vector<CMatrix>& signals);

struct PackingEnsemble {
    std::vector<CMatrix> states;
    std::vector<double> pmf;
    std::optional<CMatrix> average;  // computed from states and pmf when absent
};

/// Single-letter entropies entering the rank and sandwich conditions.
struct PackingTargets {
    int n = 1;
    double h_ab = 0;
    double h_a = 0;
    double h_b = 0;
};

struct PackingCondition {
    std::string name;
    double measured_alpha = 0;  // smallest alpha at which the condition holds
    bool pass = false;
};

struct PackingReport {
    double alpha = 0;
    double measured_alpha = 0;
    std::vector<PackingCondition> conditions;
    bool all_pass = false;
};

/// Evaluates the four packing conditions at alpha; without alpha the largest
/// measured value is used.
PackingReport packing_conditions_check(const Projector& code_proj, const std::vector<Projector>& codeword_projs,
                                       const PackingEnsemble& ens, const PackingTargets& targets,
                                       std::optional<double> alpha = std::nullopt);

struct PackingInstance {
    Projector code_proj;
    std::vector<Projector> codeword_projs;
    PackingEnsemble ensemble;
    PackingTargets targets;
    double alpha_bound = 0;  // typical-subspace bound on every measured alpha
    long codewords = 0;
};

/// The causal construction with the type layout and a maximally entangled
/// shared pair. Conditions are checked on num_codewords drawn gamma vectors;
/// the ensemble average is taken over every gamma.
PackingInstance causal_packing_instance(const RandomParameterChannel& rp, const EncoderFamily& fam, int n,
                                        double delta, int num_codewords = 64, uint64_t seed = 0);

/// Average of rho over every gamma of the layout, acting on the B^n half of a
/// state on B'^n x B^n.
CMatrix gamma_twirl(const CMatrix& rho, const CodeLayout& layout, int dim_front);

/// Reorders (x1 y1 x2 y2 ...) into (x1 ... xn y1 ... yn).
CMatrix group_interleaved(const CMatrix& m, int d1, int d2, int n);

enum class Scheme { kCausal, kNoncausal };
enum class DecoderKind { kProjector, kPrettyGood };

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);
std::string decoder_name(DecoderKind d);
DecoderKind parse_decoder(const std::string& name);

inline constexpr long kSimDimCap = 4096;
inline constexpr long kExactParamCap = 4096;

struct SimConfig {
    Scheme scheme = Scheme::kCausal;
    int n = 1;
    int num_messages = 4;
    double bin_rate = 0;  // non-causal: R~ - R
    double delta = 0.2;
    uint64_t seed = 0;
    BlockLayout layout = BlockLayout::kAuto;
    DecoderKind decoder = DecoderKind::kProjector;
    long dim_cap = kSimDimCap;
    long exact_param_cap = kExactParamCap;
    long mc_samples = kExactParamCap;
};

struct SimReport {
    Scheme scheme = Scheme::kCausal;
    int n = 0;
    int message_count = 0;
    double rate = 0;
    double rate_tilde = 0;
    double delta = 0;
    BlockLayout layout = BlockLayout::kTypes;
    DecoderKind decoder = DecoderKind::kProjector;
    std::vector<double> per_message_error;
    double max_error = 0;
    double avg_error = 0;
    long covering_failures = 0;
    double covering_failure_prob = 0;
    bool monte_carlo = false;
    long parameter_sequences = 0;
    uint64_t seed = 0;
};

/// Throws InvalidArgument naming the limiting dimension when the cap is exceeded.
SimReport simulate(const RandomParameterChannel& rp, const EncoderFamily& fam, const PureState& xi,
                   const SimConfig& cfg);

nlohmann::ordered_json to_json(const SimReport& r);
std::string sim_csv_header();
std::string to_csv_row(const SimReport& r);

}  // namespace eacsi
