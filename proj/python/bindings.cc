#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "eacsi/capacity.h"
#include "eacsi/protosim.h"
#include "eacsi/verify.h"

namespace py = pybind11;
using namespace eacsi;

namespace {

std::string capacity_json(const std::string& spec, const std::string& scenario, int restarts, int max_iters,
                          int dim_k, int dim_ref, int dim_env, uint64_t seed) {
    OptimizerConfig cfg;
    cfg.restarts = restarts;
    cfg.max_iters = max_iters;
    cfg.dim_k = dim_k;
    cfg.dim_ref = dim_ref;
    cfg.dim_env = dim_env;
    cfg.seed = seed;
    const RandomParameterChannel rp = parse_spec(spec);
    CapacityEstimate est;
    {
        py::gil_scoped_release release;
        est = maximize(parse_scenario(scenario), rp, cfg);
    }
    return to_json(est).dump();
}

std::string simulate_json(const std::string& spec, const std::optional<std::string>& family, const std::string& scheme,
                          int n, int messages, double bin_rate, double delta, const std::string& layout,
                          const std::string& decoder, uint64_t seed, long cap, long mc_samples) {
    const RandomParameterChannel rp = parse_spec(spec);
    const EncoderFamily fam = family ? parse_family(*family) : EncoderFamily::identity(rp.dim_in(), rp.num_params());
    SimConfig cfg;
    cfg.scheme = parse_scheme(scheme);
    cfg.n = n;
    cfg.num_messages = messages;
    cfg.bin_rate = bin_rate;
    cfg.delta = delta;
    cfg.layout = parse_layout(layout);
    cfg.decoder = parse_decoder(decoder);
    cfg.seed = seed;
    cfg.dim_cap = cap;
    cfg.mc_samples = mc_samples;
    py::gil_scoped_release release;
    return to_json(simulate(rp, fam, max_entangled(fam.dim_k), cfg)).dump();
}

std::string baseline_json(const std::string& text, int u_size) {
    const ClassicalChannelWithState ch = parse_classical(text);
    const int u = u_size > 0 ? u_size : (ch.u_size > 0 ? ch.u_size : ch.x_size);
    const GelfandPinskerResult gp = classical_gelfand_pinsker(ch, u);
    nlohmann::ordered_json j;
    j["channel"] = ch.name;
    j["shannon_strategy"] = classical_shannon_strategy(ch);
    j["gelfand_pinsker"] = gp.value;
    j["u_size"] = u;
    j["gp_map"] = gp.f;
    j["gp_p_u_given_s"] = gp.p_u_given_s;
    return j.dump();
}

py::list verify_checks(const std::string& suite, int n, double delta, long trials, uint64_t seed, bool inject_fault) {
    VerifyOptions opt;
    opt.n = n;
    opt.delta = delta;
    opt.trials = trials;
    opt.seed = seed;
    opt.inject_fault = inject_fault;
    py::list out;
    for (const auto& c : run_suite(suite, opt)) {
        py::dict d;
        d["name"] = c.name;
        d["passed"] = c.pass;
        d["detail"] = c.detail;
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_eacsi, m) {
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    m.def("capacity_json", &capacity_json, py::arg("spec"), py::arg("scenario"), py::arg("restarts"),
          py::arg("max_iters"), py::arg("dim_k"), py::arg("dim_ref"), py::arg("dim_env"), py::arg("seed"));
    m.def("simulate_json", &simulate_json, py::arg("spec"), py::arg("family"), py::arg("scheme"), py::arg("n"),
          py::arg("messages"), py::arg("bin_rate"), py::arg("delta"), py::arg("layout"), py::arg("decoder"),
          py::arg("seed"), py::arg("cap"), py::arg("mc_samples"));
    m.def("baseline_json", &baseline_json, py::arg("text"), py::arg("u_size"));
    m.def("verify", &verify_checks, py::arg("suite"), py::arg("n") = 0, py::arg("delta") = -1.0,
          py::arg("trials") = 10000, py::arg("seed") = 0, py::arg("inject_fault") = false);

    m.def(
        "mutual_info",
        [](const CMatrix& rho, int dim_a, int dim_b) { return mutual_info(DensityOperator(rho), dim_a, dim_b); },
        py::arg("rho"), py::arg("dim_a"), py::arg("dim_b"), "I(A;B) in bits of a density matrix on A x B.");
    m.def(
        "ricochet_residual", [](const CMatrix& u) { return ricochet_check(u, static_cast<int>(u.rows())); },
        py::arg("u"));
    m.def("heisenberg_weyl", &heisenberg_weyl, py::arg("dim"), py::arg("a"), py::arg("b"));
    m.def("canonical_spec", [](const std::string& spec) { return to_canonical_json(parse_spec(spec)); },
          py::arg("spec"), "Validates a channel spec and returns its canonical text.");

    m.attr("__version__") = EACSI_VERSION;
}
