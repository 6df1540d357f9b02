#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "eacsi/qcore.h"

namespace eacsi {

using Rng = std::mt19937_64;

/// Derives independent named sub-streams from one user seed, so that e.g.
/// codebook draws and optimizer restarts never share generator state.
class SeedStream {
  public:
    explicit SeedStream(uint64_t seed) : seed_(seed) {}

    uint64_t seed() const { return seed_; }
    uint64_t derive(std::string_view name, uint64_t index = 0) const;
    Rng rng(std::string_view name, uint64_t index = 0) const { return Rng(derive(name, index)); }

  private:
    uint64_t seed_;
};

uint64_t splitmix64(uint64_t x);

CMatrix random_ginibre(int rows, int cols, Rng& rng);
CMatrix random_unitary(int dim, Rng& rng);
CVector random_unit_vector(int dim, Rng& rng);
CMatrix random_hermitian(int dim, Rng& rng);
/// Full-rank density operator drawn from the Hilbert-Schmidt measure.
CMatrix random_density_matrix(int dim, Rng& rng);

}  // namespace eacsi
