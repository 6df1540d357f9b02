#include "eacsi/rpchannel.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"

using namespace eacsi;

namespace {

CMatrix plus_state() { return CMatrix::Constant(2, 2, 0.5); }

std::string temp_path(const std::string& stem) {
    return (std::filesystem::temp_directory_path() / ("eacsi_" + stem + "_" + std::to_string(::getpid()))).string();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST(rpchannel, projected) {
    const auto single = fixtures::identity_channel(2);
    EXPECT_LT(max_abs_entry(projected(single, 0).kraus_ops()[0] - identity(2)), 1e-15);

    const auto deph = fixtures::dephasing_parameter();
    EXPECT_LT(max_abs_entry(projected(deph, "1").kraus_ops()[0] - fixtures::pauli_z()), 1e-15);

    const auto stuck = fixtures::stuck_at(0.5);
    Rng rng(1);
    const CMatrix rho = random_density_matrix(2, rng);
    EXPECT_LT(max_abs_entry(projected(stuck, "2").apply(rho) - rho), 1e-15);
    EXPECT_THROW(projected(stuck, "7"), InvalidArgument);
}

TEST(rpchannel, average_channel) {
    Rng rng(2);
    const auto same = fixtures::state_independent();
    for (int rep = 0; rep < 10; ++rep) {
        const CMatrix rho = random_density_matrix(2, rng);
        EXPECT_LT(max_abs_entry(average_channel(same).apply(rho) - same.branches[0].apply(rho)), 1e-12);
    }

    const auto deph = fixtures::dephasing_parameter(0.5);
    const CMatrix plus = plus_state();
    const CMatrix z = fixtures::pauli_z();
    EXPECT_LT(max_abs_entry(average_channel(deph).apply(plus) - 0.5 * (plus + z * plus * z)), 1e-15);
    EXPECT_LT(max_abs_entry(average_channel(deph).apply(plus) - identity(2) / 2.0), 1e-15);

    const auto stuck = fixtures::stuck_at(1.0);
    const CMatrix rho = random_density_matrix(2, rng);
    EXPECT_LT(max_abs_entry(average_channel(stuck).apply(rho) - identity(2) / 2.0), 1e-14);
    EXPECT_LT(average_channel(stuck).completeness_residual(), 1e-9);
}

TEST(rpchannel, virtual_channel) {
    Rng rng(3);
    const auto deph = fixtures::dephasing_parameter(0.5);
    const auto idfam = EncoderFamily::identity(2, 2);
    for (int rep = 0; rep < 10; ++rep) {
        const CMatrix rho = random_density_matrix(2, rng);
        EXPECT_LT(max_abs_entry(virtual_channel(deph, idfam).apply(rho) - average_channel(deph).apply(rho)), 1e-12);
    }

    const auto flip = EncoderFamily::unitaries({identity(2), fixtures::pauli_z()});
    for (int rep = 0; rep < 10; ++rep) {
        const CMatrix rho = random_density_matrix(2, rng);
        EXPECT_LT(max_abs_entry(virtual_channel(deph, flip).apply(rho) - rho), 1e-12);
    }

    const auto dep = fixtures::depolarizing(2);
    const auto fam = EncoderFamily::constant(fixtures::random_channel(2, 2, 3, rng), 1);
    const KrausChannel m = virtual_channel(dep, fam);
    EXPECT_LT(m.completeness_residual(), 1e-9);
    EXPECT_LT(max_abs_entry(m.apply(random_density_matrix(2, rng)) - identity(2) / 2.0), 1e-12);

    const auto wrong = EncoderFamily::identity(3, 2);
    EXPECT_THROW(virtual_channel(deph, wrong), InvalidArgument);
}

TEST(rpchannel, virtual_channel_completeness_random) {
    Rng rng(4);
    for (int rep = 0; rep < 10; ++rep) {
        const auto rp = fixtures::random_two_param_qubit(rng);
        EncoderFamily fam;
        fam.dim_k = 3;
        fam.dim_a = 2;
        fam.maps = {fixtures::random_channel(3, 2, 2, rng), fixtures::random_channel(3, 2, 3, rng)};
        EXPECT_LT(virtual_channel(rp, fam).completeness_residual(), 1e-9);
        EXPECT_LT(average_channel(rp).completeness_residual(), 1e-9);
    }
}

TEST(rpchannel, canonical_round_trip) {
    Rng rng(5);
    for (const auto& rp : {fixtures::dephasing_parameter(), fixtures::stuck_at(0.3), fixtures::random_two_param_qubit(rng)}) {
        const std::string text = to_canonical_json(rp);
        const auto back = parse_spec(text);
        EXPECT_EQ(to_canonical_json(back), text);
        ASSERT_EQ(back.num_params(), rp.num_params());
        for (int s = 0; s < rp.num_params(); ++s) {
            EXPECT_EQ(back.probs[s], rp.probs[s]);
            for (size_t j = 0; j < rp.branches[s].kraus_ops().size(); ++j) {
                EXPECT_EQ(back.branches[s].kraus_ops()[j], rp.branches[s].kraus_ops()[j]);
            }
        }
    }
}

TEST(rpchannel, save_and_load) {
    const std::string path = temp_path("deph.json");
    save_spec(fixtures::dephasing_parameter(), path);
    const auto rp = load_spec(path);
    EXPECT_EQ(rp.num_params(), 2);
    std::remove(path.c_str());
}

TEST(rpchannel, fixture_file_loads) {
    const auto rp = load_spec(std::string(EACSI_DATA_DIR) + "/channels/dephasing.json");
    EXPECT_EQ(rp.num_params(), 2);
    EXPECT_EQ(to_canonical_json(rp), to_canonical_json(fixtures::dephasing_parameter()));
}

TEST(rpchannel, validation_errors_name_the_quantity) {
    const std::string bad_probs =
        R"({"name":"x","dim_in":1,"dim_out":1,"params":[{"label":"0","prob":0.9,"kraus":[[[[1,0]]]]}]})";
    try {
        parse_spec(bad_probs);
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("probabilities sum"), std::string::npos) << e.what();
    }

    const std::string incomplete =
        R"({"name":"x","dim_in":1,"dim_out":1,"params":[{"label":"0","prob":0.5,"kraus":[[[[1,0]]]]},)"
        R"({"label":"1","prob":0.5,"kraus":[[[[0.99,0]]]]}]})";
    try {
        parse_spec(incomplete);
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("branch s=1 Kraus completeness residual"), std::string::npos)
            << e.what();
    }

    EXPECT_THROW(parse_spec("{not json"), InvalidArgument);
    EXPECT_THROW(parse_spec(R"({"name":"x","dim_in":2,"dim_out":2,"params":[]})"), InvalidArgument);
    EXPECT_THROW(load_spec("/nonexistent/channel.json"), InvalidArgument);
}
