#pragma once

// States, channels and entropic quantities. All entropies are in bits.

#include <span>
#include <string>
#include <vector>

#include "eacsi/qcore.h"

namespace eacsi {

/// Hermitian, unit-trace, positive semidefinite operator (within tolerance).
class DensityOperator {
  public:
    /// Validates the invariants; throws InvalidArgument naming the violated one.
    explicit DensityOperator(CMatrix m);

    static DensityOperator maximally_mixed(int dim);
    static DensityOperator basis_projector(int dim, int index);

    int dim() const { return static_cast<int>(m_.rows()); }
    const CMatrix& matrix() const { return m_; }

  private:
    CMatrix m_;
};

class PureState {
  public:
    /// Requires squared norm 1 within 1e-9.
    explicit PureState(CVector amplitudes);
    /// Rescales to unit norm; throws on the zero vector.
    static PureState normalized(CVector amplitudes);
    static PureState basis(int dim, int index);

    int dim() const { return static_cast<int>(v_.size()); }
    const CVector& amplitudes() const { return v_; }
    CMatrix projector() const { return v_ * v_.adjoint(); }
    DensityOperator density() const { return DensityOperator(projector()); }

  private:
    CVector v_;
};

/// |<a|b>|^2, the global-phase-insensitive comparison used throughout.
double fidelity(const PureState& a, const PureState& b);

/// rho -> sum_j K_j rho K_j^dagger with sum_j K_j^dagger K_j = 1.
class KrausChannel {
  public:
    /// Validates completeness within 1e-9.
    KrausChannel(int dim_in, int dim_out, std::vector<CMatrix> kraus_ops);

    static KrausChannel identity(int dim);
    static KrausChannel unitary(const CMatrix& u);
    /// rho -> Tr(rho) |index><index| on a dim_out system.
    static KrausChannel replacer(int dim_in, int dim_out, int index);
    /// rho -> Tr(rho) * 1/dim.
    static KrausChannel completely_depolarizing(int dim);

    int dim_in() const { return dim_in_; }
    int dim_out() const { return dim_out_; }
    const std::vector<CMatrix>& kraus_ops() const { return ops_; }

    double completeness_residual() const;
    CMatrix apply(const CMatrix& rho) const;
    /// Acts on subsystem `target` of a multipartite operator.
    CMatrix apply(const CMatrix& rho, std::span<const int> dims, int target) const;

  private:
    int dim_in_;
    int dim_out_;
    std::vector<CMatrix> ops_;
};

double completeness_residual(std::span<const CMatrix> kraus_ops, int dim_in);

/// V^dagger V = 1 with dim_out >= dim_in.
class Isometry {
  public:
    explicit Isometry(CMatrix v);

    int dim_in() const { return static_cast<int>(v_.cols()); }
    int dim_out() const { return static_cast<int>(v_.rows()); }
    const CMatrix& matrix() const { return v_; }
    KrausChannel as_channel() const { return KrausChannel(dim_in(), dim_out(), {v_}); }

  private:
    CMatrix v_;
};

/// sum_s q(s) |s><s| x rho_s with a classical register.
struct CqState {
    std::vector<std::string> labels;
    std::vector<double> probs;
    std::vector<DensityOperator> blocks;

    void validate() const;
    CMatrix average() const;
};

struct SchmidtDecomposition {
    RVector coefficients;  // descending, squares sum to 1
    CMatrix left_basis;    // dim_a x rank, orthonormal columns
    CMatrix right_basis;   // dim_b x rank, orthonormal columns
};

double vn_entropy(const DensityOperator& rho);
double mutual_info(const DensityOperator& rho_ab, int dim_a, int dim_b);
double cond_mutual_info(const CqState& cq, int dim_a, int dim_b);

/// Unchecked variants for hot loops where the operand is known to be a state.
double entropy_bits(const CMatrix& rho);
double mutual_info_bits(const CMatrix& rho_ab, int dim_a, int dim_b);
double binary_entropy(double p);

DensityOperator apply_channel(const KrausChannel& ch, const DensityOperator& rho, std::span<const int> dims,
                              int target);

/// Purification on A x J with dim J equal to the numerical rank of rho.
PureState purify(const DensityOperator& rho);

/// V = sum_j K_j x |j>, output ordered as (channel output) x (environment).
Isometry isometric_extension(const KrausChannel& ch);

/// X(a) Z(b) with X(a)|j> = |j+a mod D> and Z(b)|j> = exp(2 pi i b j / D)|j>.
CMatrix heisenberg_weyl(int dim, int a, int b);

/// (1/sqrt(D)) sum_j |j>|j>.
PureState max_entangled(int dim);

SchmidtDecomposition schmidt(const PureState& psi, int dim_a, int dim_b);

/// || (U x 1)|Phi> - (1 x U^T)|Phi> ||.
double ricochet_check(const CMatrix& u, int dim);

/// |psi><psi| as a D_a x D_b coefficient matrix, i.e. psi = sum M_ij |i>|j>.
CMatrix coefficient_matrix(const CVector& psi, int dim_a, int dim_b);

}  // namespace eacsi
