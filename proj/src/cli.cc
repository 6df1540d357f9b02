#include "eacsi/cli.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "eacsi/capacity.h"
#include "eacsi/protosim.h"
#include "eacsi/verify.h"

#ifndef EACSI_VERSION
#define EACSI_VERSION "0.0.0"
#endif

namespace eacsi {

using nlohmann::ordered_json;

std::string tool_version() { return EACSI_VERSION; }

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

struct Common {
    uint64_t seed = 0;
    std::string out_path;
    bool json = false;
};

// Every subcommand records its effective arguments here, defaults included.
using Args = std::map<std::string, ordered_json>;

ordered_json manifest(const std::string& command, const Args& args, uint64_t seed) {
    ordered_json m;
    m["command"] = command;
    ordered_json kv = ordered_json::object();
    for (const auto& [k, v] : args) kv[k] = v;
    m["arguments"] = kv;
    m["seed"] = seed;
    m["tool_version"] = tool_version();
    m["timestamp"] = utc_timestamp();
    return m;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw InvalidArgument("cannot write output file '" + path + "'");
    f << text;
}

void emit(const Common& c, const ordered_json& doc, const std::string& summary, std::ostream& out) {
    if (!c.out_path.empty()) write_file(c.out_path, doc.dump(2) + "\n");
    if (c.json) {
        out << doc.dump(2) << "\n";
    } else {
        out << summary;
    }
}

std::vector<int> parse_n_list(const std::string& text) {
    std::vector<int> ns;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            throw InvalidArgument("--n: '" + item + "' is not an integer");
        }
        if (used != item.size() || v < 1) throw InvalidArgument("--n: '" + item + "' is not a positive integer");
        ns.push_back(v);
    }
    if (ns.empty()) throw InvalidArgument("--n: empty list");
    return ns;
}

struct CapacityArgs {
    std::string channel;
    std::string scenario = "none";
    int restarts = 8;
    int max_iters = 400;
    int dim_k = 0;
    int dim_ref = 0;
    int dim_env = 1;
};

int cmd_capacity(const CapacityArgs& a, const Common& c, std::ostream& out) {
    const RandomParameterChannel rp = load_spec(a.channel);
    OptimizerConfig cfg;
    cfg.restarts = a.restarts;
    cfg.max_iters = a.max_iters;
    cfg.dim_k = a.dim_k;
    cfg.dim_ref = a.dim_ref;
    cfg.dim_env = a.dim_env;
    cfg.seed = c.seed;
    const CsiScenario scenario = parse_scenario(a.scenario);
    const CapacityEstimate est = maximize(scenario, rp, cfg);
    const Args args = {{"channel", a.channel},        {"scenario", scenario_name(scenario)},
                       {"restarts", a.restarts}, {"max_iters", a.max_iters},
                       {"dim_k", a.dim_k},       {"dim_ref", a.dim_ref},
                       {"dim_env", a.dim_env}};
    ordered_json doc;
    doc["manifest"] = manifest("capacity", args, c.seed);
    doc["result"] = to_json(est);
    std::ostringstream s;
    s << std::setprecision(6) << "channel " << rp.name << ", scenario " << scenario_name(scenario) << ": "
      << est.value_bits << " bits (best of " << est.restart_values.size() << " restarts"
      << (est.converged ? "" : ", not converged") << ")\n";
    emit(c, doc, s.str(), out);
    return kExitOk;
}

struct SimulateArgs {
    std::string channel;
    std::string family;
    std::string scheme = "causal";
    std::string n = "1";
    int messages = 4;
    double bin_rate = 0;
    double delta = 0.2;
    std::string layout = "auto";
    std::string decoder = "projector";
    long cap = kSimDimCap;
    long mc_samples = kExactParamCap;
    std::string csv;
};

int cmd_simulate(const SimulateArgs& a, const Common& c, std::ostream& out) {
    const RandomParameterChannel rp = load_spec(a.channel);
    const EncoderFamily fam =
        a.family.empty() ? EncoderFamily::identity(rp.dim_in(), rp.num_params()) : load_family(a.family);
    const PureState xi = max_entangled(fam.dim_k);
    const std::vector<int> ns = parse_n_list(a.n);

    SimConfig cfg;
    cfg.scheme = parse_scheme(a.scheme);
    cfg.num_messages = a.messages;
    cfg.bin_rate = a.bin_rate;
    cfg.delta = a.delta;
    cfg.seed = c.seed;
    cfg.layout = parse_layout(a.layout);
    cfg.decoder = parse_decoder(a.decoder);
    cfg.dim_cap = a.cap;
    cfg.mc_samples = a.mc_samples;

    std::vector<SimReport> reports;
    for (int n : ns) {
        cfg.n = n;
        reports.push_back(simulate(rp, fam, xi, cfg));
    }

    const Args args = {{"channel", a.channel},
                       {"family", a.family.empty() ? "identity" : a.family},
                       {"scheme", scheme_name(cfg.scheme)},
                       {"n", a.n},
                       {"messages", a.messages},
                       {"bin_rate", a.bin_rate},
                       {"delta", a.delta},
                       {"layout", layout_name(cfg.layout)},
                       {"decoder", decoder_name(cfg.decoder)},
                       {"cap", a.cap},
                       {"mc_samples", a.mc_samples}};
    ordered_json doc;
    doc["manifest"] = manifest("simulate", args, c.seed);
    if (reports.size() == 1) {
        doc["result"] = to_json(reports.front());
    } else {
        ordered_json sweep = ordered_json::array();
        for (const auto& r : reports) sweep.push_back(to_json(r));
        doc["result"] = {{"sweep", sweep}};
    }
    if (!a.csv.empty()) {
        std::ostringstream csv;
        csv << "# " << doc["manifest"].dump() << "\n" << sim_csv_header() << "\n";
        for (const auto& r : reports) csv << to_csv_row(r) << "\n";
        write_file(a.csv, csv.str());
    }
    std::ostringstream s;
    s << std::setprecision(6);
    for (const auto& r : reports) {
        s << scheme_name(r.scheme) << " n=" << r.n << " M=" << r.message_count << " rate=" << r.rate
          << " max_error=" << r.max_error << " avg_error=" << r.avg_error;
        if (r.scheme == Scheme::kNoncausal) s << " covering_failure_prob=" << r.covering_failure_prob;
        s << "\n";
    }
    emit(c, doc, s.str(), out);
    return kExitOk;
}

struct VerifyArgs {
    std::string suite;
    int n = 0;
    double delta = -1;
    long trials = 10000;
    bool inject_fault = false;
};

int cmd_verify(const VerifyArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
    VerifyOptions opt;
    opt.n = a.n;
    opt.delta = a.delta;
    opt.trials = a.trials;
    opt.seed = c.seed;
    opt.inject_fault = a.inject_fault;
    const std::vector<CheckResult> checks = run_suite(a.suite, opt);

    const Args args = {{"suite", a.suite},
                       {"n", a.n},
                       {"delta", a.delta},
                       {"trials", a.trials},
                       {"inject_fault", a.inject_fault}};
    ordered_json list = ordered_json::array();
    std::ostringstream s;
    const CheckResult* first_fail = nullptr;
    for (const auto& ch : checks) {
        list.push_back({{"name", ch.name}, {"pass", ch.pass}, {"detail", ch.detail}});
        s << (ch.pass ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << "\n";
        if (!ch.pass && first_fail == nullptr) first_fail = &ch;
    }
    ordered_json doc;
    doc["manifest"] = manifest("verify", args, c.seed);
    doc["result"] = {{"suite", a.suite}, {"checks", list}, {"all_pass", first_fail == nullptr}};
    emit(c, doc, s.str(), out);
    if (first_fail != nullptr) {
        err << "verify: check '" << first_fail->name << "' failed: " << first_fail->detail << "\n";
        return kExitVerifyFailed;
    }
    return kExitOk;
}

struct BaselineArgs {
    std::string channel;
    int u_size = 0;
};

int cmd_baseline(const BaselineArgs& a, const Common& c, std::ostream& out) {
    const ClassicalChannelWithState ch = load_classical(a.channel);
    const int u_size = a.u_size > 0 ? a.u_size : (ch.u_size > 0 ? ch.u_size : ch.x_size);
    const double shannon = classical_shannon_strategy(ch);
    const GelfandPinskerResult gp = classical_gelfand_pinsker(ch, u_size);

    const Args args = {{"channel", a.channel}, {"u_size", u_size}};
    ordered_json doc;
    doc["manifest"] = manifest("baseline", args, c.seed);
    ordered_json r;
    r["channel"] = ch.name;
    r["shannon_strategy"] = shannon;
    r["gelfand_pinsker"] = gp.value;
    r["u_size"] = u_size;
    r["gp_map"] = gp.f;
    r["gp_p_u_given_s"] = gp.p_u_given_s;
    doc["result"] = r;
    std::ostringstream s;
    s << std::setprecision(6) << ch.name << ": causal (Shannon strategy) " << shannon << " bits, non-causal "
      << "(Gel'fand-Pinsker, |U|=" << u_size << ") " << gp.value << " bits\n";
    emit(c, doc, s.str(), out);
    return kExitOk;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "Root seed for all random streams");
    sub->add_option("--out", c.out_path, "Write the JSON document to this file");
    sub->add_flag("--json", c.json, "Print the JSON document instead of a summary");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Entanglement-assisted capacities with channel side information", "eacsi"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);

    Common common;

    CapacityArgs cap;
    auto* c_cap = app.add_subcommand("capacity", "Estimate a capacity by multi-start optimization");
    c_cap->add_option("--channel", cap.channel, "Channel spec (JSON)")->required();
    c_cap->add_option("--scenario", cap.scenario, "none | causal | noncausal | decoder | both")
        ->capture_default_str();
    c_cap->add_option("--restarts", cap.restarts)->capture_default_str();
    c_cap->add_option("--max-iters", cap.max_iters)->capture_default_str();
    c_cap->add_option("--dim-k", cap.dim_k, "Dimension of K (0: channel input)")->capture_default_str();
    c_cap->add_option("--dim-ref", cap.dim_ref, "Reference dimension (0: dim K)")->capture_default_str();
    c_cap->add_option("--dim-env", cap.dim_env, "Kraus rank of causal encoder maps")->capture_default_str();
    add_common(c_cap, common);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Run a coding scheme exactly at small block length");
    c_sim->add_option("--channel", sim.channel, "Channel spec (JSON)")->required();
    c_sim->add_option("--family", sim.family, "Encoder family (JSON); identity maps by default");
    c_sim->add_option("--scheme", sim.scheme, "causal | noncausal")->capture_default_str();
    c_sim->add_option("--n", sim.n, "Block length, or a comma-separated sweep")->capture_default_str();
    c_sim->add_option("--messages", sim.messages)->capture_default_str();
    c_sim->add_option("--bin-rate", sim.bin_rate, "Non-causal binning rate")->capture_default_str();
    c_sim->add_option("--delta", sim.delta)->capture_default_str();
    c_sim->add_option("--layout", sim.layout, "auto | types | single")->capture_default_str();
    c_sim->add_option("--decoder", sim.decoder, "projector | pgm")->capture_default_str();
    c_sim->add_option("--cap", sim.cap, "Largest Hilbert-space dimension simulated")->capture_default_str();
    c_sim->add_option("--mc-samples", sim.mc_samples, "Parameter sequences sampled above the enumeration cap")
        ->capture_default_str();
    c_sim->add_option("--csv", sim.csv, "Write n,rate,max_error,avg_error rows to this file");
    add_common(c_sim, common);

    VerifyArgs ver;
    auto* c_ver = app.add_subcommand("verify", "Run an invariant suite");
    c_ver->add_option("--suite", ver.suite, "algebra | packing | covering")->required();
    c_ver->add_option("--n", ver.n, "Block length (0: suite default)")->capture_default_str();
    c_ver->add_option("--delta", ver.delta, "Typicality slack (negative: suite default)")->capture_default_str();
    c_ver->add_option("--trials", ver.trials, "Monte Carlo trials for the covering suite")->capture_default_str();
    c_ver->add_flag("--inject-fault", ver.inject_fault, "Corrupt a fixture so that the suite must fail");
    add_common(c_ver, common);

    BaselineArgs base;
    auto* c_base = app.add_subcommand("baseline", "Classical capacities with causal and non-causal state");
    c_base->add_option("--channel", base.channel, "Classical channel spec (JSON)")->required();
    c_base->add_option("--u-size", base.u_size, "Auxiliary alphabet size (0: file value or |X|)")
        ->capture_default_str();
    add_common(c_base, common);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (c_cap->parsed()) return cmd_capacity(cap, common, out);
        if (c_sim->parsed()) return cmd_simulate(sim, common, out);
        if (c_ver->parsed()) return cmd_verify(ver, common, out, err);
        return cmd_baseline(base, common, out);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace eacsi
