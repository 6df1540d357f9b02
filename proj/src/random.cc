#include "eacsi/random.h"

#include <cmath>

namespace eacsi {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t SeedStream::derive(std::string_view name, uint64_t index) const {
    // FNV-1a over the stream name, then mixed with the seed and index.
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return splitmix64(splitmix64(seed_ ^ h) + splitmix64(index + 0x632be59bd9b4e019ULL));
}

CMatrix random_ginibre(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix g(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const double re = normal(rng);
            const double im = normal(rng);
            g(i, j) = cplx(re, im) / std::sqrt(2.0);
        }
    }
    return g;
}

CMatrix random_unitary(int dim, Rng& rng) {
    const CMatrix g = random_ginibre(dim, dim, rng);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Phase fix makes the distribution Haar.
    for (int k = 0; k < dim; ++k) {
        const cplx d = r(k, k);
        const double mag = std::abs(d);
        q.col(k) *= mag > 0 ? d / mag : cplx(1.0);
    }
    return q;
}

CVector random_unit_vector(int dim, Rng& rng) {
    CMatrix g = random_ginibre(dim, 1, rng);
    CVector v = g.col(0);
    return v / v.norm();
}

CMatrix random_hermitian(int dim, Rng& rng) {
    const CMatrix g = random_ginibre(dim, dim, rng);
    return 0.5 * (g + g.adjoint());
}

CMatrix random_density_matrix(int dim, Rng& rng) {
    const CMatrix g = random_ginibre(dim, dim, rng);
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return rho;
}

}  // namespace eacsi
