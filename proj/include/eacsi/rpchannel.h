#pragma once

// Random-parameter channels: a classical parameter S ~ q(s) selects one of a
// list of Kraus channels sharing input and output dimensions.

#include <string>
#include <vector>

#include "eacsi/quantum.h"
#include "eacsi/random.h"

namespace eacsi {

struct RandomParameterChannel {
    std::string name;
    std::vector<std::string> labels;
    std::vector<double> probs;
    std::vector<KrausChannel> branches;

    int dim_in() const { return branches.front().dim_in(); }
    int dim_out() const { return branches.front().dim_out(); }
    int num_params() const { return static_cast<int>(branches.size()); }

    /// Throws InvalidArgument naming the failing quantity.
    void validate() const;
    int index_of(const std::string& label) const;
};

/// One map F^(s): K -> A per parameter symbol.
struct EncoderFamily {
    int dim_k = 0;
    int dim_a = 0;
    std::vector<KrausChannel> maps;
    bool isometric = false;

    void validate(int num_params) const;

    /// Same map for every parameter value.
    static EncoderFamily constant(const KrausChannel& map, int num_params);
    static EncoderFamily identity(int dim, int num_params);
    /// F^(s) = U_s, flagged isometric.
    static EncoderFamily unitaries(const std::vector<CMatrix>& us);
    static EncoderFamily isometries(const std::vector<CMatrix>& vs);
};

KrausChannel projected(const RandomParameterChannel& rp, const std::string& label);
KrausChannel projected(const RandomParameterChannel& rp, int s);

/// Kraus set {sqrt(q(s)) K} over all branches.
KrausChannel average_channel(const RandomParameterChannel& rp);

/// Kraus set {sqrt(q(s)) N_j^(s) F_k^(s)}.
KrausChannel virtual_channel(const RandomParameterChannel& rp, const EncoderFamily& fam);

/// Canonical text form: fixed key order, %.17g doubles, trailing newline.
std::string to_canonical_json(const RandomParameterChannel& rp);
RandomParameterChannel parse_spec(const std::string& text);
RandomParameterChannel load_spec(const std::string& path);
void save_spec(const RandomParameterChannel& rp, const std::string& path);

/// {"dim_k", "dim_a", "maps": [[Kraus matrices of F^(s)] per parameter value]},
/// matrices in the channel spec format.
EncoderFamily parse_family(const std::string& text);
EncoderFamily load_family(const std::string& path);

namespace fixtures {

CMatrix pauli_x();
CMatrix pauli_y();
CMatrix pauli_z();

RandomParameterChannel single(const KrausChannel& ch, const std::string& name);
/// {identity, Z-conjugation} with q = (1-p, p).
RandomParameterChannel dephasing_parameter(double p = 0.5);
/// Branches replace-with-|0>, replace-with-|1>, identity with q = (a/2, a/2, 1-a).
RandomParameterChannel stuck_at(double alpha);
RandomParameterChannel identity_channel(int dim);
RandomParameterChannel depolarizing(int dim);
KrausChannel amplitude_damping(double gamma);
/// Two identical amplitude-damping branches with unequal weights.
RandomParameterChannel state_independent(double gamma = 0.3);
/// Two branches, each a random qubit channel with two Kraus operators.
RandomParameterChannel random_two_param_qubit(Rng& rng);
KrausChannel random_channel(int dim_in, int dim_out, int num_kraus, Rng& rng);

}  // namespace fixtures

}  // namespace eacsi
