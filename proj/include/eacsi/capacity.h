#pragma once

// Capacity objectives for the side-information scenarios, a multi-start
// local optimizer over pure states and isometric encoder families, and the
// classical causal / non-causal baselines.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "eacsi/quantum.h"
#include "eacsi/rpchannel.h"

namespace eacsi {

enum class CsiScenario { kNone, kEncoderCausal, kEncoderNoncausal, kDecoder, kBothNoncausal };

/// Short CLI name: none, causal, noncausal, decoder, both.
std::string scenario_name(CsiScenario s);
/// Accepts the short names and the long tags (encoder_causal, ...).
CsiScenario parse_scenario(const std::string& name);

struct OptimizerConfig {
    int dim_k = 0;    // 0 selects the channel input dimension
    int dim_ref = 0;  // 0 selects dim_k
    int dim_env = 1;  // Kraus rank of causal encoder maps
    int restarts = 8;
    int max_iters = 400;
    double step_init = 0.2;
    double tol = 1e-9;
    double fd_step = 1e-5;
    uint64_t seed = 0;
};

struct NoncausalValue {
    double i_ab = 0;
    double i_as = 0;
    double value = 0;
};

struct CapacityEstimate {
    CsiScenario scenario = CsiScenario::kNone;
    double value_bits = 0;
    std::vector<double> restart_values;
    std::vector<int> restart_iterations;
    bool converged = false;
    uint64_t seed = 0;
    int dim_k = 0;
    int dim_ref = 0;
    int best_restart = 0;
    CVector best_state;
    EncoderFamily best_family;  // empty for scenarios without an encoder map
    NoncausalValue noncausal;   // filled for the non-causal scenario
};

/// I(A;B) of (1 x ch)(phi), phi on A x A'.
double objective_no_csi(const PureState& phi, const KrausChannel& ch);

/// I(R;B) of sum_s q(s) (N^(s) F^(s) x 1)(theta), theta on K x R.
double objective_causal(const PureState& theta, const EncoderFamily& fam, const RandomParameterChannel& rp);
/// Same quantity through the virtual channel: I(R;B) of (1 x M)(theta reordered to R x K).
double objective_causal_virtual(const PureState& theta, const EncoderFamily& fam, const RandomParameterChannel& rp);
/// Mixed-input variant on K x R.
double objective_causal_mixed(const DensityOperator& theta, int dim_k, const EncoderFamily& fam,
                              const RandomParameterChannel& rp);

/// theta on K x A'. Non-isometric families are rejected unless allowed.
NoncausalValue objective_noncausal(const PureState& theta, const EncoderFamily& fam,
                                   const RandomParameterChannel& rp, bool require_isometric = true);
double objective_decoder(const PureState& phi, const RandomParameterChannel& rp);
double objective_both(const PureState& theta, const EncoderFamily& fam, const RandomParameterChannel& rp,
                      bool require_isometric = true);

CapacityEstimate maximize(CsiScenario scenario, const RandomParameterChannel& rp, const OptimizerConfig& cfg);

nlohmann::ordered_json to_json(const CapacityEstimate& est);

double quantum_capacity_from_classical(double c);

/// p(y | x, s) with parameter pmf q.
struct ClassicalChannelWithState {
    std::string name;
    int x_size = 0;
    int y_size = 0;
    int s_size = 0;
    std::vector<double> w;  // index (y * x_size + x) * s_size + s
    std::vector<double> q;
    int u_size = 0;         // 0 selects x_size

    double p(int y, int x, int s) const { return w[(static_cast<size_t>(y) * x_size + x) * s_size + s]; }
    void validate() const;
};

ClassicalChannelWithState parse_classical(const std::string& text);
ClassicalChannelWithState load_classical(const std::string& path);

namespace classical_fixtures {

ClassicalChannelWithState stuck_at_memory(double p);
ClassicalChannelWithState xor_state();
ClassicalChannelWithState bsc(double eps);

}  // namespace classical_fixtures

struct BlahutArimotoResult {
    double capacity = 0;
    std::vector<double> input;
    int iterations = 0;
};

/// w[t][y]; stops when the upper and lower capacity bounds differ by < tol.
BlahutArimotoResult blahut_arimoto(const std::vector<std::vector<double>>& w, double tol = 1e-9,
                                   int max_iters = 100000);

inline constexpr long kStrategyCap = 4096;

double classical_shannon_strategy(const ClassicalChannelWithState& ch, long cap = kStrategyCap);

struct GelfandPinskerResult {
    double value = 0;
    std::vector<int> f;                   // f[u * s_size + s]
    std::vector<std::vector<double>> p_u_given_s;  // [s][u]
};

GelfandPinskerResult classical_gelfand_pinsker(const ClassicalChannelWithState& ch, int u_size,
                                               long cap = kStrategyCap);

/// I(U;Y) - I(U;S) for a deterministic map f and conditional p(u|s).
double gelfand_pinsker_objective(const ClassicalChannelWithState& ch, int u_size, const std::vector<int>& f,
                                 const std::vector<std::vector<double>>& p_u_given_s);

}  // namespace eacsi
