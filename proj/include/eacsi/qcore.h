#pragma once

// Dense complex linear algebra used by every other module: Kronecker
// products, partial traces, Hermitian spectra and spectral functions,
// operator-order tests and the trace distance.

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eacsi {

using cplx = std::complex<double>;
using CMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVector = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
using RVector = Eigen::VectorXd;

/// Eigenvalues with magnitude at or below this are treated as exact zeros.
inline constexpr double kClipTol = 1e-10;
/// Largest negative eigenvalue accepted for a density operator.
inline constexpr double kNegativeTol = 1e-8;

/// Raised for shape and dimension mismatches and malformed inputs.
class InvalidArgument : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a spectral function is evaluated outside its domain.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Raised when a numerical procedure cannot produce a meaningful result.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Spectrum {
    RVector eigenvalues;   // ascending
    CMatrix eigenvectors;  // column k belongs to eigenvalues[k]
};

enum class SpectralFn { kLog2, kSqrt, kInvSqrtSupport };

CMatrix identity(int dim);

/// Entry (i1*rb + i2, j1*cb + j2) = a(i1, j1) * b(i2, j2).
CMatrix tensor_product(const CMatrix& a, const CMatrix& b);
CMatrix tensor_product(std::span<const CMatrix> factors);
CVector tensor_product(const CVector& a, const CVector& b);

/// Traces out every subsystem not listed in `keep`. Kept subsystems stay in
/// their original order.
CMatrix partial_trace(const CMatrix& m, std::span<const int> dims, std::span<const int> keep);
CMatrix partial_trace(const CMatrix& m, std::initializer_list<int> dims, std::initializer_list<int> keep);

/// The input is symmetrized as (h + h^dagger)/2 before decomposition.
Spectrum eig_hermitian(const CMatrix& h);
RVector eigenvalues_hermitian(const CMatrix& h);

CMatrix spectral_function(const CMatrix& h, SpectralFn f, double clip_tol = kClipTol);

double trace_distance(const CMatrix& rho, const CMatrix& sigma);

/// True iff the smallest eigenvalue of (b - a) is >= -tol.
bool psd_leq(const CMatrix& a, const CMatrix& b, double tol);

double hermitian_residual(const CMatrix& h);
double max_abs_entry(const CMatrix& m);

/// op acting on subsystem `target` of a multipartite operator: returns
/// (1 x op x 1) * m, with dims[target] replaced by op.rows() in the row space.
CMatrix apply_left(const CMatrix& op, const CMatrix& m, std::span<const int> dims, int target);

/// m * (1 x op x 1)^dagger, acting on the column space.
CMatrix apply_right_adjoint(const CMatrix& m, const CMatrix& op, std::span<const int> dims, int target);

/// (1 x op x 1) * v for a state vector.
CVector apply_to_vector(const CMatrix& op, const CVector& v, std::span<const int> dims, int target);

/// 1 x ... x op x ... x 1 as an explicit matrix.
CMatrix embed(const CMatrix& op, std::span<const int> dims, int target);

long product(std::span<const int> dims);

std::string dims_to_string(std::span<const int> dims);

}  // namespace eacsi
