#pragma once

// Method of types and typical subspaces.

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "eacsi/quantum.h"

namespace eacsi {

using BigInt = boost::multiprecision::cpp_int;

/// Largest d^n for which dense projectors are built.
inline constexpr long kDenseCap = 4096;
/// Largest n accepted by type_class_size.
inline constexpr int kTypeSizeCap = 64;

struct TypeVector {
    int n = 0;
    std::vector<int> counts;

    bool operator==(const TypeVector&) const = default;
    std::vector<double> empirical() const;
};

struct Projector {
    int dim = 0;
    CMatrix matrix;

    /// Checks Hermiticity and P^2 = P within 1e-9.
    void validate() const;
    double rank() const { return matrix.trace().real(); }
};

/// p[s][x]; rows index the first sequence, columns the second.
using JointPmf = std::vector<std::vector<double>>;

TypeVector type_of(const std::vector<int>& xn, int alphabet_size);
TypeVector type_of(const std::vector<std::string>& xn, const std::vector<std::string>& alphabet);

/// All types of length-n sequences, ascending lexicographic on count vectors.
std::vector<TypeVector> enumerate_types(int n, int alphabet_size);

BigInt type_class_size(const TypeVector& t, int n_cap = kTypeSizeCap);
BigInt multinomial(int n, const std::vector<int>& counts);
double log2_multinomial(int n, const std::vector<int>& counts);

/// Digits of a sequence index, most significant letter first.
std::vector<int> sequence_digits(long index, int dim, int n);
long sequence_index(const std::vector<int>& digits, int dim);

/// Members of a type class in increasing sequence-index order.
std::vector<long> type_class_members(const TypeVector& t, int dim);

bool is_jointly_typical(const std::vector<int>& sn, const std::vector<int>& xn, const JointPmf& p_sx, double delta);

Projector type_projector(const TypeVector& t, int dim, int n, long cap = kDenseCap);

/// Groups equal eigenvalues (within 1e-9) of a density operator.
struct EigenClasses {
    std::vector<double> values;      // eigenvalue of each class, descending
    std::vector<int> multiplicity;
    std::vector<int> class_of;       // class index of each eigenvector column
    CMatrix eigenvectors;            // columns ordered as class_of
    RVector eigenvalues;

    int size() const { return static_cast<int>(values.size()); }
    /// Total weight multiplicity * eigenvalue of each class.
    double weight(int c) const { return multiplicity[c] * values[c]; }
};

EigenClasses eigen_classes(const CMatrix& rho);

/// True iff the per-class counts satisfy |N_c/n - p_c| <= delta, with
/// N_c = 0 for every zero-eigenvalue class.
bool counts_typical(const std::vector<int>& class_counts, const EigenClasses& ec, int n, double delta);

struct TypicalProjector {
    Projector proj;
    double entropy = 0;   // H(rho) in bits
    double c = 0;         // instance constant in the sandwich and rank bounds
    double weight = 0;    // Tr(Pi rho^{x n})
};

/// Spans the eigenvector sequences whose eigenvalue-class counts are
/// delta-typical. Basis independent within each degenerate eigenspace.
TypicalProjector typical_projector(const DensityOperator& rho, int n, double delta, long cap = kDenseCap);

/// Exact rank and weight of the typical projector without building it.
struct TypicalSummary {
    double rank = 0;
    double log2_rank = 0;
    double weight = 0;
    double entropy = 0;
    double c = 0;
    double min_exponent = 0;  // min over typical sequences of -log2(eigenvalue)/n
    double max_exponent = 0;
};

TypicalSummary typical_summary(const DensityOperator& rho, int n, double delta);

/// W^{x n} M W^{x n dagger} for a local operator W, applied site by site.
CMatrix conjugate_by_power(const CMatrix& m, const CMatrix& w, int n);

struct CoveringResult {
    double fail_prob_hat = 0;
    double stderr_ = 0;
    long trials = 0;
    long failures = 0;
    double log2_codewords = 0;
    bool explicit_codewords = false;
};

/// Codewords X^n(m) ~ p_X^n, 2^ceil(n rate) of them; failure when none is
/// jointly typical with S^n ~ p_S^n.
CoveringResult covering_monte_carlo(const JointPmf& p_sx, double rate, int n, double delta, long trials,
                                    uint64_t seed);

/// Probability that one X^n ~ p_X^n is jointly typical with a fixed s^n
/// whose per-symbol counts are `s_counts`.
double joint_typical_prob(const JointPmf& p_sx, const std::vector<int>& s_counts, int n, double delta);

std::vector<double> marginal_s(const JointPmf& p_sx);
std::vector<double> marginal_x(const JointPmf& p_sx);
double mutual_info_pmf(const JointPmf& p_sx);

}  // namespace eacsi
