#include <gtest/gtest.h>

#include "eacsi/capacity.h"
#include "eacsi/mtypes.h"
#include "eacsi/verify.h"

using namespace eacsi;

namespace {

bool all_pass(const std::vector<CheckResult>& checks) {
    for (const auto& c : checks) {
        if (!c.pass) return false;
    }
    return !checks.empty();
}

}  // namespace

TEST(VerifySuites, PassAcrossSeeds) {
    for (uint64_t seed : {0, 1, 2, 17}) {
        VerifyOptions opt;
        opt.seed = seed;
        opt.trials = 2000;
        EXPECT_TRUE(all_pass(verify_algebra(opt))) << seed;
        EXPECT_TRUE(all_pass(verify_packing(opt))) << seed;
        EXPECT_TRUE(all_pass(verify_covering(opt))) << seed;
    }
}

TEST(VerifySuites, FaultInjectionFails) {
    VerifyOptions opt;
    opt.inject_fault = true;
    opt.trials = 2000;
    EXPECT_FALSE(all_pass(verify_algebra(opt)));
    EXPECT_FALSE(all_pass(verify_packing(opt)));
    EXPECT_FALSE(all_pass(verify_covering(opt)));
}

TEST(VerifySuites, PackingAtOtherBlockLengths) {
    for (int n : {1, 2, 4}) {
        VerifyOptions opt;
        opt.n = n;
        EXPECT_TRUE(all_pass(verify_packing(opt))) << n;
    }
}

TEST(VerifySuites, UnknownSuiteThrows) { EXPECT_THROW(run_suite("nope", {}), InvalidArgument); }

TEST(Dsbs, MarginalsAreUniform) {
    const auto p = dsbs(0.1);
    EXPECT_NEAR(marginal_s(p)[0], 0.5, 1e-15);
    EXPECT_NEAR(marginal_x(p)[1], 0.5, 1e-15);
    // I(X;S) = 1 - h2(0.1)
    EXPECT_NEAR(mutual_info_pmf(p), 1 + 0.1 * std::log2(0.1) + 0.9 * std::log2(0.9), 1e-12);
}

TEST(AncillaFamily, EnvironmentIsIndependentOfParameter) {
    Rng rng(9);
    const EncoderFamily fam = ancilla_family(3, rng);
    EXPECT_EQ(fam.dim_a, 4);
    const EncoderFamily ext = extended_family(fam);
    EXPECT_TRUE(ext.isometric);
    // Tracing the output qubit leaves the same ancilla state for every s.
    const CMatrix rho = random_density_matrix(2, rng);
    CMatrix first;
    for (const auto& m : fam.maps) {
        const CMatrix anc = partial_trace(m.apply(rho), {2, 2}, {1});
        if (first.size() == 0) first = anc;
        EXPECT_LT(max_abs_entry(anc - first), 1e-12);
    }
}
