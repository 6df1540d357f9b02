#include "eacsi/qcore.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace eacsi {

CMatrix identity(int dim) { return CMatrix::Identity(dim, dim); }

CMatrix tensor_product(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

CMatrix tensor_product(std::span<const CMatrix> factors) {
    if (factors.empty()) {
        return CMatrix::Ones(1, 1);
    }
    CMatrix out = factors[0];
    for (size_t k = 1; k < factors.size(); ++k) {
        out = tensor_product(out, factors[k]);
    }
    return out;
}

CVector tensor_product(const CVector& a, const CVector& b) {
    CVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

long product(std::span<const int> dims) {
    long p = 1;
    for (int d : dims) {
        p *= d;
    }
    return p;
}

std::string dims_to_string(std::span<const int> dims) {
    std::ostringstream os;
    os << "(";
    for (size_t k = 0; k < dims.size(); ++k) {
        os << (k ? "," : "") << dims[k];
    }
    os << ")";
    return os.str();
}

namespace {

void check_dims(std::span<const int> dims, Eigen::Index size, const char* what) {
    for (int d : dims) {
        if (d <= 0) {
            throw InvalidArgument(std::string(what) + ": subsystem dimensions must be positive");
        }
    }
    if (product(dims) != size) {
        std::ostringstream os;
        os << what << ": dims " << dims_to_string(dims) << " multiply to " << product(dims)
           << " but the operand has dimension " << size;
        throw InvalidArgument(os.str());
    }
}

}  // namespace

CMatrix partial_trace(const CMatrix& m, std::span<const int> dims, std::span<const int> keep) {
    if (m.rows() != m.cols()) {
        throw InvalidArgument("partial_trace: matrix must be square");
    }
    check_dims(dims, m.rows(), "partial_trace");
    const int nsys = static_cast<int>(dims.size());
    std::vector<bool> kept(nsys, false);
    for (int k : keep) {
        if (k < 0 || k >= nsys) {
            throw InvalidArgument("partial_trace: kept subsystem index out of range");
        }
        if (kept[k]) {
            throw InvalidArgument("partial_trace: kept subsystem listed twice");
        }
        kept[k] = true;
    }

    // Split each full index into (kept index, traced index).
    const long full = m.rows();
    long kept_dim = 1;
    long traced_dim = 1;
    for (int s = 0; s < nsys; ++s) {
        (kept[s] ? kept_dim : traced_dim) *= dims[s];
    }
    std::vector<long> kidx(full), tidx(full);
    for (long i = 0; i < full; ++i) {
        long rem = i;
        long k = 0, t = 0, kstride = 1, tstride = 1;
        for (int s = nsys - 1; s >= 0; --s) {
            const long digit = rem % dims[s];
            rem /= dims[s];
            if (kept[s]) {
                k += digit * kstride;
                kstride *= dims[s];
            } else {
                t += digit * tstride;
                tstride *= dims[s];
            }
        }
        kidx[i] = k;
        tidx[i] = t;
    }
    std::vector<std::vector<long>> groups(traced_dim);
    for (long i = 0; i < full; ++i) {
        groups[tidx[i]].push_back(i);
    }
    CMatrix out = CMatrix::Zero(kept_dim, kept_dim);
    for (const auto& g : groups) {
        for (long i : g) {
            for (long j : g) {
                out(kidx[i], kidx[j]) += m(i, j);
            }
        }
    }
    return out;
}

CMatrix partial_trace(const CMatrix& m, std::initializer_list<int> dims, std::initializer_list<int> keep) {
    std::vector<int> d(dims), k(keep);
    return partial_trace(m, std::span<const int>(d), std::span<const int>(k));
}

Spectrum eig_hermitian(const CMatrix& h) {
    if (h.rows() != h.cols()) {
        throw InvalidArgument("eig_hermitian: matrix must be square");
    }
    Eigen::MatrixXcd sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw NumericError("eig_hermitian: eigensolver did not converge");
    }
    return Spectrum{solver.eigenvalues(), solver.eigenvectors()};
}

RVector eigenvalues_hermitian(const CMatrix& h) {
    if (h.rows() != h.cols()) {
        throw InvalidArgument("eigenvalues_hermitian: matrix must be square");
    }
    Eigen::MatrixXcd sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericError("eigenvalues_hermitian: eigensolver did not converge");
    }
    return solver.eigenvalues();
}

CMatrix spectral_function(const CMatrix& h, SpectralFn f, double clip_tol) {
    if (clip_tol < 0) {
        throw InvalidArgument("spectral_function: clip_tol must be non-negative");
    }
    const Spectrum sp = eig_hermitian(h);
    RVector mapped(sp.eigenvalues.size());
    for (Eigen::Index k = 0; k < mapped.size(); ++k) {
        double lam = sp.eigenvalues(k);
        if (std::abs(lam) <= clip_tol) {
            lam = 0.0;
        }
        if (lam < 0.0) {
            std::ostringstream os;
            os << "spectral_function: eigenvalue " << lam << " is below -" << clip_tol;
            throw DomainError(os.str());
        }
        switch (f) {
            case SpectralFn::kLog2:
                mapped(k) = lam > 0.0 ? std::log2(lam) : 0.0;
                break;
            case SpectralFn::kSqrt:
                mapped(k) = std::sqrt(lam);
                break;
            case SpectralFn::kInvSqrtSupport:
                mapped(k) = lam > 0.0 ? 1.0 / std::sqrt(lam) : 0.0;
                break;
        }
    }
    return sp.eigenvectors * mapped.cast<cplx>().asDiagonal() * sp.eigenvectors.adjoint();
}

double trace_distance(const CMatrix& rho, const CMatrix& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
        throw InvalidArgument("trace_distance: dimension mismatch");
    }
    const RVector ev = eigenvalues_hermitian(rho - sigma);
    return 0.5 * ev.cwiseAbs().sum();
}

bool psd_leq(const CMatrix& a, const CMatrix& b, double tol) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw InvalidArgument("psd_leq: dimension mismatch");
    }
    const RVector ev = eigenvalues_hermitian(b - a);
    return ev.size() == 0 || ev.minCoeff() >= -tol;
}

double hermitian_residual(const CMatrix& h) {
    if (h.rows() != h.cols()) {
        return std::numeric_limits<double>::infinity();
    }
    return max_abs_entry(h - h.adjoint());
}

double max_abs_entry(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

CMatrix apply_left(const CMatrix& op, const CMatrix& m, std::span<const int> dims, int target) {
    check_dims(dims, m.rows(), "apply_left");
    if (target < 0 || target >= static_cast<int>(dims.size())) {
        throw InvalidArgument("apply_left: target subsystem out of range");
    }
    if (op.cols() != dims[target]) {
        throw InvalidArgument("apply_left: operator input dimension " + std::to_string(op.cols()) +
                              " does not match subsystem dimension " + std::to_string(dims[target]));
    }
    long left = 1, right = 1;
    for (int s = 0; s < target; ++s) left *= dims[s];
    for (size_t s = target + 1; s < dims.size(); ++s) right *= dims[s];
    const long a_in = op.cols();
    const long a_out = op.rows();
    const long cols = m.cols();
    CMatrix out(left * a_out * right, cols);
    CMatrix block(a_in, cols);
    for (long l = 0; l < left; ++l) {
        for (long r = 0; r < right; ++r) {
            for (long a = 0; a < a_in; ++a) {
                block.row(a) = m.row((l * a_in + a) * right + r);
            }
            const CMatrix res = op * block;
            for (long a = 0; a < a_out; ++a) {
                out.row((l * a_out + a) * right + r) = res.row(a);
            }
        }
    }
    return out;
}

CMatrix apply_right_adjoint(const CMatrix& m, const CMatrix& op, std::span<const int> dims, int target) {
    return apply_left(op, m.adjoint(), dims, target).adjoint();
}

CVector apply_to_vector(const CMatrix& op, const CVector& v, std::span<const int> dims, int target) {
    CMatrix as_col = v;
    CMatrix res = apply_left(op, as_col, dims, target);
    return res.col(0);
}

CMatrix embed(const CMatrix& op, std::span<const int> dims, int target) {
    if (target < 0 || target >= static_cast<int>(dims.size())) {
        throw InvalidArgument("embed: target subsystem out of range");
    }
    long left = 1, right = 1;
    for (int s = 0; s < target; ++s) left *= dims[s];
    for (size_t s = target + 1; s < dims.size(); ++s) right *= dims[s];
    return tensor_product(tensor_product(identity(static_cast<int>(left)), op), identity(static_cast<int>(right)));
}

}  // namespace eacsi
