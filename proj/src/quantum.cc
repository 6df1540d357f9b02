#include "eacsi/quantum.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace eacsi {

namespace {

constexpr double kStateTol = 1e-9;
constexpr double kEntropyFloor = 1e-12;

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(3);
    os << x;
    return os.str();
}

}  // namespace

DensityOperator::DensityOperator(CMatrix m) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols()) {
        throw InvalidArgument("density operator must be a non-empty square matrix");
    }
    if (!m_.allFinite()) {
        throw InvalidArgument("density operator has non-finite entries");
    }
    const double herm = hermitian_residual(m_);
    if (herm > kStateTol) {
        throw InvalidArgument("density operator Hermiticity residual " + fmt(herm));
    }
    const double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > kStateTol) {
        throw InvalidArgument("density operator trace " + fmt(tr) + " differs from 1");
    }
    const double lmin = eigenvalues_hermitian(m_).minCoeff();
    if (lmin < -kNegativeTol) {
        throw InvalidArgument("density operator minimum eigenvalue " + fmt(lmin) + " is negative");
    }
}

DensityOperator DensityOperator::maximally_mixed(int dim) {
    if (dim <= 0) {
        throw InvalidArgument("maximally_mixed: dimension must be positive");
    }
    return DensityOperator(identity(dim) / static_cast<double>(dim));
}

DensityOperator DensityOperator::basis_projector(int dim, int index) {
    return PureState::basis(dim, index).density();
}

PureState::PureState(CVector amplitudes) : v_(std::move(amplitudes)) {
    if (v_.size() == 0 || !v_.allFinite()) {
        throw InvalidArgument("pure state must be a non-empty finite vector");
    }
    const double n2 = v_.squaredNorm();
    if (std::abs(n2 - 1.0) > kStateTol) {
        throw InvalidArgument("pure state squared norm " + fmt(n2) + " differs from 1");
    }
}

PureState PureState::normalized(CVector amplitudes) {
    const double n = amplitudes.norm();
    if (!(n > 0.0)) {
        throw InvalidArgument("cannot normalize the zero vector");
    }
    return PureState(amplitudes / n);
}

PureState PureState::basis(int dim, int index) {
    if (dim <= 0 || index < 0 || index >= dim) {
        throw InvalidArgument("basis state index out of range");
    }
    CVector v = CVector::Zero(dim);
    v(index) = 1.0;
    return PureState(v);
}

double fidelity(const PureState& a, const PureState& b) {
    if (a.dim() != b.dim()) {
        throw InvalidArgument("fidelity: dimension mismatch");
    }
    return std::norm(a.amplitudes().dot(b.amplitudes()));
}

double completeness_residual(std::span<const CMatrix> kraus_ops, int dim_in) {
    CMatrix sum = CMatrix::Zero(dim_in, dim_in);
    for (const auto& k : kraus_ops) {
        sum += k.adjoint() * k;
    }
    return max_abs_entry(sum - identity(dim_in));
}

KrausChannel::KrausChannel(int dim_in, int dim_out, std::vector<CMatrix> kraus_ops)
    : dim_in_(dim_in), dim_out_(dim_out), ops_(std::move(kraus_ops)) {
    if (dim_in <= 0 || dim_out <= 0) {
        throw InvalidArgument("channel dimensions must be positive");
    }
    if (ops_.empty()) {
        throw InvalidArgument("channel needs at least one Kraus operator");
    }
    for (size_t j = 0; j < ops_.size(); ++j) {
        if (ops_[j].rows() != dim_out || ops_[j].cols() != dim_in) {
            std::ostringstream os;
            os << "Kraus operator " << j << " has shape " << ops_[j].rows() << "x" << ops_[j].cols() << ", expected "
               << dim_out << "x" << dim_in;
            throw InvalidArgument(os.str());
        }
    }
    const double res = completeness_residual();
    if (!(res <= kStateTol)) {
        throw InvalidArgument("Kraus completeness residual " + fmt(res));
    }
}

KrausChannel KrausChannel::identity(int dim) { return KrausChannel(dim, dim, {eacsi::identity(dim)}); }

KrausChannel KrausChannel::unitary(const CMatrix& u) {
    return KrausChannel(static_cast<int>(u.cols()), static_cast<int>(u.rows()), {u});
}

KrausChannel KrausChannel::replacer(int dim_in, int dim_out, int index) {
    std::vector<CMatrix> ops;
    for (int i = 0; i < dim_in; ++i) {
        CMatrix k = CMatrix::Zero(dim_out, dim_in);
        k(index, i) = 1.0;
        ops.push_back(std::move(k));
    }
    return KrausChannel(dim_in, dim_out, std::move(ops));
}

KrausChannel KrausChannel::completely_depolarizing(int dim) {
    // |i><j| / sqrt(D) for all i, j.
    std::vector<CMatrix> ops;
    const double w = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            CMatrix k = CMatrix::Zero(dim, dim);
            k(i, j) = w;
            ops.push_back(std::move(k));
        }
    }
    return KrausChannel(dim, dim, std::move(ops));
}

double KrausChannel::completeness_residual() const { return eacsi::completeness_residual(ops_, dim_in_); }

CMatrix KrausChannel::apply(const CMatrix& rho) const {
    if (rho.rows() != dim_in_ || rho.cols() != dim_in_) {
        throw InvalidArgument("channel input has dimension " + std::to_string(rho.rows()) + ", expected " +
                              std::to_string(dim_in_));
    }
    CMatrix out = CMatrix::Zero(dim_out_, dim_out_);
    for (const auto& k : ops_) {
        out.noalias() += k * rho * k.adjoint();
    }
    return out;
}

CMatrix KrausChannel::apply(const CMatrix& rho, std::span<const int> dims, int target) const {
    if (target < 0 || target >= static_cast<int>(dims.size())) {
        throw InvalidArgument("channel target subsystem out of range");
    }
    if (dims[target] != dim_in_) {
        throw InvalidArgument("channel input dimension " + std::to_string(dim_in_) + " does not match subsystem " +
                              std::to_string(target) + " of dims " + dims_to_string(dims));
    }
    std::vector<int> out_dims(dims.begin(), dims.end());
    out_dims[target] = dim_out_;
    CMatrix out;
    for (const auto& k : ops_) {
        CMatrix left = apply_left(k, rho, dims, target);
        CMatrix term = apply_right_adjoint(left, k, dims, target);
        if (out.size() == 0) {
            out = std::move(term);
        } else {
            out += term;
        }
    }
    return out;
}

Isometry::Isometry(CMatrix v) : v_(std::move(v)) {
    if (v_.rows() < v_.cols() || v_.cols() == 0) {
        throw InvalidArgument("isometry needs dim_out >= dim_in > 0");
    }
    const double res = max_abs_entry(v_.adjoint() * v_ - eacsi::identity(static_cast<int>(v_.cols())));
    if (!(res <= kStateTol)) {
        throw InvalidArgument("isometry residual |V^dagger V - 1| = " + fmt(res));
    }
}

void CqState::validate() const {
    if (probs.size() != blocks.size() || (!labels.empty() && labels.size() != probs.size())) {
        throw InvalidArgument("cq state: labels, probs and blocks must have equal length");
    }
    if (blocks.empty()) {
        throw InvalidArgument("cq state needs at least one block");
    }
    double total = 0.0;
    for (double p : probs) {
        if (p < 0.0) {
            throw InvalidArgument("cq state has a negative probability");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > kStateTol) {
        throw InvalidArgument("cq state probabilities sum to " + fmt(total));
    }
    for (const auto& b : blocks) {
        if (b.dim() != blocks.front().dim()) {
            throw InvalidArgument("cq state blocks have unequal dimensions");
        }
    }
}

CMatrix CqState::average() const {
    validate();
    CMatrix out = CMatrix::Zero(blocks.front().dim(), blocks.front().dim());
    for (size_t s = 0; s < blocks.size(); ++s) {
        out += probs[s] * blocks[s].matrix();
    }
    return out;
}

double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) {
        return 0.0;
    }
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double entropy_bits(const CMatrix& rho) {
    const RVector ev = eigenvalues_hermitian(rho);
    double h = 0.0;
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        const double lam = ev(k);
        if (lam > kEntropyFloor) {
            h -= lam * std::log2(lam);
        }
    }
    return std::max(h, 0.0);
}

double vn_entropy(const DensityOperator& rho) { return entropy_bits(rho.matrix()); }

double mutual_info_bits(const CMatrix& rho_ab, int dim_a, int dim_b) {
    if (static_cast<long>(dim_a) * dim_b != rho_ab.rows()) {
        throw InvalidArgument("mutual_info: dim_a * dim_b = " + std::to_string(long(dim_a) * dim_b) +
                              " but the state has dimension " + std::to_string(rho_ab.rows()));
    }
    const CMatrix ra = partial_trace(rho_ab, {dim_a, dim_b}, {0});
    const CMatrix rb = partial_trace(rho_ab, {dim_a, dim_b}, {1});
    return entropy_bits(ra) + entropy_bits(rb) - entropy_bits(rho_ab);
}

double mutual_info(const DensityOperator& rho_ab, int dim_a, int dim_b) {
    return mutual_info_bits(rho_ab.matrix(), dim_a, dim_b);
}

double cond_mutual_info(const CqState& cq, int dim_a, int dim_b) {
    cq.validate();
    double total = 0.0;
    for (size_t s = 0; s < cq.blocks.size(); ++s) {
        if (cq.probs[s] > 0.0) {
            total += cq.probs[s] * mutual_info(cq.blocks[s], dim_a, dim_b);
        }
    }
    return total;
}

DensityOperator apply_channel(const KrausChannel& ch, const DensityOperator& rho, std::span<const int> dims,
                              int target) {
    if (product(dims) != rho.dim()) {
        throw InvalidArgument("apply_channel: dims " + dims_to_string(dims) + " do not match state dimension " +
                              std::to_string(rho.dim()));
    }
    return DensityOperator(ch.apply(rho.matrix(), dims, target));
}

PureState purify(const DensityOperator& rho) {
    const Spectrum sp = eig_hermitian(rho.matrix());
    const int d = rho.dim();
    // Descending order, keep eigenvalues above the clip tolerance.
    std::vector<int> keep;
    for (int k = d - 1; k >= 0; --k) {
        if (sp.eigenvalues(k) > kClipTol) {
            keep.push_back(k);
        }
    }
    const int r = static_cast<int>(keep.size());
    CVector psi = CVector::Zero(static_cast<Eigen::Index>(d) * r);
    for (int j = 0; j < r; ++j) {
        const double w = std::sqrt(sp.eigenvalues(keep[j]));
        for (int a = 0; a < d; ++a) {
            psi(a * r + j) = w * sp.eigenvectors(a, keep[j]);
        }
    }
    return PureState::normalized(psi);
}

Isometry isometric_extension(const KrausChannel& ch) {
    const int e = static_cast<int>(ch.kraus_ops().size());
    CMatrix v = CMatrix::Zero(static_cast<Eigen::Index>(ch.dim_out()) * e, ch.dim_in());
    for (int j = 0; j < e; ++j) {
        const CMatrix& k = ch.kraus_ops()[j];
        for (int b = 0; b < ch.dim_out(); ++b) {
            v.row(b * e + j) = k.row(b);
        }
    }
    return Isometry(v);
}

CMatrix heisenberg_weyl(int dim, int a, int b) {
    if (dim <= 0 || a < 0 || a >= dim || b < 0 || b >= dim) {
        throw InvalidArgument("heisenberg_weyl: need 0 <= a, b < D");
    }
    CMatrix out = CMatrix::Zero(dim, dim);
    for (int j = 0; j < dim; ++j) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>((static_cast<long>(b) * j) % dim) / dim;
        out((a + j) % dim, j) = std::polar(1.0, phase);
    }
    return out;
}

PureState max_entangled(int dim) {
    if (dim <= 0) {
        throw InvalidArgument("max_entangled: dimension must be positive");
    }
    CVector v = CVector::Zero(static_cast<Eigen::Index>(dim) * dim);
    const double w = 1.0 / std::sqrt(static_cast<double>(dim));
    for (int j = 0; j < dim; ++j) {
        v(j * dim + j) = w;
    }
    return PureState(v);
}

CMatrix coefficient_matrix(const CVector& psi, int dim_a, int dim_b) {
    if (static_cast<long>(dim_a) * dim_b != psi.size()) {
        throw InvalidArgument("coefficient_matrix: dim_a * dim_b does not match the vector length");
    }
    CMatrix m(dim_a, dim_b);
    for (int i = 0; i < dim_a; ++i) {
        for (int j = 0; j < dim_b; ++j) {
            m(i, j) = psi(i * dim_b + j);
        }
    }
    return m;
}

SchmidtDecomposition schmidt(const PureState& psi, int dim_a, int dim_b) {
    if (static_cast<long>(dim_a) * dim_b != psi.dim()) {
        throw InvalidArgument("schmidt: dim_a * dim_b = " + std::to_string(long(dim_a) * dim_b) +
                              " but the state has dimension " + std::to_string(psi.dim()));
    }
    const Eigen::MatrixXcd m = coefficient_matrix(psi.amplitudes(), dim_a, dim_b);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    int r = 0;
    while (r < sv.size() && sv(r) * sv(r) > kClipTol) {
        ++r;
    }
    SchmidtDecomposition out;
    out.coefficients = sv.head(r);
    out.left_basis = svd.matrixU().leftCols(r);
    out.right_basis = svd.matrixV().leftCols(r).conjugate();
    return out;
}

double ricochet_check(const CMatrix& u, int dim) {
    if (u.rows() != dim || u.cols() != dim) {
        throw InvalidArgument("ricochet_check: unitary must be D x D");
    }
    const CVector phi = max_entangled(dim).amplitudes();
    const std::vector<int> dims{dim, dim};
    const CVector lhs = apply_to_vector(u, phi, dims, 0);
    const CVector rhs = apply_to_vector(u.transpose(), phi, dims, 1);
    return (lhs - rhs).norm();
}

}  // namespace eacsi
