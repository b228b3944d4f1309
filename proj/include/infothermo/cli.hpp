#pragma once

// Command-line front end. run_cli() is the whole program; tools/main.cpp only
// forwards argv and the standard streams.
//
// Exit codes: 0 success, 1 a scientific check failed, 2 bad input or usage.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "infothermo/bounds.hpp"
#include "infothermo/langevin.hpp"
#include "infothermo/measurement.hpp"
#include "infothermo/memory.hpp"
#include "infothermo/random.hpp"
#include "infothermo/serialize.hpp"
#include "infothermo/twobox.hpp"

#ifndef INFOTHERMO_VERSION
#define INFOTHERMO_VERSION "0.0.0"
#endif

namespace infothermo::cli {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_usage = 2 };

struct RunConfig {
    std::string subcommand;
    std::uint64_t seed = 0;
    bool seed_given = false;
    double temperature = 1.0;
    std::string out;     // empty: standard output
    std::string format;  // json or csv; empty picks the subcommand default
    std::string config;
    double tolerance = policy.residual_margin;

    // qcmi
    std::string state;
    std::string povm;

    // verify-bounds
    std::size_t instances = 100;
    std::size_t n_steps = 1000;
    std::uint64_t replay = 0;
    bool replay_given = false;

    // twobox, sweep
    double t = 0.5;
    double volume = 1.0;
    std::string grid = "0.1:0.9:0.1";

    // langevin
    std::size_t n_traj = 10000;
    double dt = 2e-3;
    double tau = 400.0;
    double ratio = 1.0;
    std::string schedule;
    bool frozen = false;
    std::string summary;
    double jarzynski_tau = 5.0;
    std::size_t jarzynski_n_traj = 100000;
    unsigned threads = 0;

    // convergence
    std::vector<std::size_t> steps{100, 1000, 10000};
};

inline json to_json(const RunConfig& c) {
    json j{{"subcommand", c.subcommand}, {"temperature", c.temperature}, {"format", c.format}, {"out", c.out}, {"tolerance", c.tolerance}};
    if (c.seed_given) j["seed"] = c.seed;
    if (!c.config.empty()) j["config"] = c.config;
    if (c.subcommand == "qcmi") {
        j["state"] = c.state;
        j["povm"] = c.povm;
    } else if (c.subcommand == "verify-bounds") {
        j["instances"] = c.instances;
        j["n_steps"] = c.n_steps;
        if (c.replay_given) j["replay"] = c.replay;
    } else if (c.subcommand == "twobox") {
        j["t"] = c.t;
        j["volume"] = c.volume;
    } else if (c.subcommand == "sweep") {
        j["grid"] = c.grid;
    } else if (c.subcommand == "langevin") {
        j["n_traj"] = c.n_traj;
        j["dt"] = c.dt;
        j["tau"] = c.tau;
        j["ratio"] = c.ratio;
        j["frozen"] = c.frozen;
        if (!c.schedule.empty()) j["schedule"] = c.schedule;
        j["jarzynski_tau"] = c.jarzynski_tau;
        j["jarzynski_n_traj"] = c.jarzynski_n_traj;
    } else if (c.subcommand == "convergence") {
        j["steps"] = c.steps;
    }
    return j;
}

inline json tool_info() { return {{"name", "infothermo"}, {"version", INFOTHERMO_VERSION}}; }

/// "lo:hi:step", inclusive of hi up to rounding.
inline std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw SchemaError(fmt::format("--grid: \"{}\" is not a number", item));
        }
    }
    if (parts.size() != 3) throw SchemaError(fmt::format("--grid expects lo:hi:step, got \"{}\"", spec));
    const double lo = parts[0];
    const double hi = parts[1];
    const double step = parts[2];
    if (!(step > 0.0) || !(hi >= lo)) throw SchemaError(fmt::format("--grid {}: need step > 0 and hi >= lo", spec));
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + static_cast<double>(i) * step;
    return out;
}

namespace detail {

inline void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
    if (path.empty() || path == "-") {
        fallback << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw SchemaError(fmt::format("{}: cannot open for writing", path));
    f << text;
    if (!f) throw SchemaError(fmt::format("{}: write failed", path));
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline void require_format(const RunConfig& c, std::initializer_list<const char*> allowed) {
    for (const char* f : allowed)
        if (c.format == f) return;
    throw SchemaError(fmt::format("{} does not support --format {}", c.subcommand, c.format));
}

inline void require_seed(const RunConfig& c) {
    if (!c.seed_given) throw SchemaError(fmt::format("{} is randomized and needs --seed", c.subcommand));
}

} // namespace detail

// ---------------------------------------------------------------------------
// Subcommands

inline int cmd_qcmi(RunConfig c, std::ostream& out, std::ostream& err) {
    if (c.format.empty()) c.format = "json";
    detail::require_format(c, {"json"});
    const auto state_doc = JsonDocument::from_file(c.state);
    const auto povm_doc = JsonDocument::from_file(c.povm);
    const DensityOperator rho = SchemaReader(state_doc).density(state_doc.value(), json::json_pointer());
    const MeasurementModel m = SchemaReader(povm_doc).measurement(povm_doc.value(), json::json_pointer());
    if (m.dim() != rho.dim()) throw SchemaError(fmt::format("{}: measurement acts on dimension {}, state has dimension {}", c.povm, m.dim(), rho.dim()));

    const auto r = qc_mutual_information_report(rho, m);
    const bool ok = r.formulas_agree() && r.in_range();
    json report{{"tool", tool_info()},
                {"config", to_json(c)},
                {"H", r.shannon},
                {"I", r.mutual},
                {"I_alt", r.mutual_alt},
                {"S_rho", r.system_entropy},
                {"p_k", r.statistics.probabilities},
                {"classical", m.is_classical() && is_diagonal(rho.matrix())},
                {"checks", {{"formulas_agree", r.formulas_agree()}, {"in_range", r.in_range()}}},
                {"passed", ok}};
    detail::write_text(c.out, detail::dump(report), out);
    if (!ok) err << fmt::format("qcmi: invariant check failed (I = {:.17g}, I_alt = {:.17g}, H = {:.17g})\n", r.mutual, r.mutual_alt, r.shannon);
    return ok ? exit_ok : exit_failure;
}

struct BoundInstance {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::size_t system_dim = 0;
    std::size_t outcomes = 0;
    double shannon = 0.0;
    double mutual_information = 0.0;
    BoundReport measurement;
    BoundReport erasure;
    BoundReport sum;

    double min_margin() const { return std::min({measurement.margin, erasure.margin, sum.margin}); }
};

/// One random classical measurement plus erasure, fully determined by `seed`.
inline BoundInstance run_bound_instance(std::uint64_t seed, Temperature temperature, std::size_t n_steps) {
    Rng rng(seed);
    boost::random::uniform_int_distribution<std::size_t> dim_pick(2, 4);
    boost::random::uniform_int_distribution<std::size_t> out_pick(2, 3);
    boost::random::uniform_int_distribution<std::size_t> branch_pick(1, 3);
    boost::random::uniform_real_distribution<double> level(0.0, 2.0 * temperature.value());

    BoundInstance inst;
    inst.seed = seed;
    inst.system_dim = dim_pick(rng);
    inst.outcomes = out_pick(rng);
    std::vector<std::vector<double>> likelihood;
    for (std::size_t s = 0; s < inst.system_dim; ++s) likelihood.push_back(random_probabilities(rng, inst.outcomes));
    const auto q = random_probabilities(rng, inst.system_dim);
    std::vector<std::vector<double>> branches(inst.outcomes);
    for (auto& b : branches) {
        b.resize(branch_pick(rng));
        for (auto& e : b) e = level(rng);
    }

    const MemoryLayout layout(branches);
    const auto m = MeasurementModel::classical(likelihood);
    const auto rho = DensityOperator::diagonal(q);
    RampOptions opt;
    opt.steps = n_steps;
    const auto meas = run_measurement_process(layout, temperature, m, rho, measurement_schedule(layout, temperature, m, opt));
    const auto eras = run_erasure_protocol(layout, temperature, meas.outcome_probabilities,
                                           erasure_schedule(layout, temperature, meas.outcome_probabilities, opt));
    inst.shannon = meas.shannon;
    inst.mutual_information = meas.mutual_information;
    inst.measurement = meas.bound;
    inst.erasure = eras.bound;
    inst.sum = verify_sum_bound(meas, eras, meas.mutual_information, temperature);
    return inst;
}

inline int cmd_verify_bounds(RunConfig c, std::ostream& out, std::ostream& err) {
    if (c.format.empty()) c.format = "json";
    detail::require_format(c, {"json", "csv"});
    if (!c.replay_given) detail::require_seed(c);
    if (c.n_steps < 1) throw SchemaError("--n-steps must be at least 1");
    const Temperature temp(c.temperature);

    std::vector<BoundInstance> rows;
    if (c.replay_given) {
        rows.push_back(run_bound_instance(c.replay, temp, c.n_steps));
    } else {
        for (std::size_t i = 0; i < c.instances; ++i) {
            rows.push_back(run_bound_instance(mix_seed(c.seed, i), temp, c.n_steps));
            rows.back().index = i;
        }
    }

    // Szilard engine on the two-box memory: one bit of feedback extracts T ln 2 from a system with no free-energy change.
    std::vector<BoundReport> szilard;
    for (double t : {0.5, twobox::zero_cost_fraction}) {
        const twobox::TwoBoxParams p(t, 1.0, temp.value());
        szilard.push_back(reconcile_demon(temp.value() * std::numbers::ln2, 0.0, twobox::measurement_work(p), twobox::erasure_work(p)));
    }

    double min_margin = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) min_margin = std::min(min_margin, r.min_margin());
    for (const auto& s : szilard) min_margin = std::min(min_margin, s.margin);
    const bool ok = min_margin >= -c.tolerance;

    for (const auto& r : rows)
        if (r.min_margin() < -c.tolerance)
            err << fmt::format("verify-bounds: instance {} violates a bound (margin {:.3e}); replay with --replay {}\n", r.index, r.min_margin(),
                               r.seed);

    if (c.format == "csv") {
        std::string csv = "index,seed,system_dim,outcomes,H,I,meas_margin,eras_margin,sum_margin\n";
        for (const auto& r : rows)
            csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.index, r.seed, r.system_dim, r.outcomes, fmt17(r.shannon), fmt17(r.mutual_information),
                               fmt17(r.measurement.margin), fmt17(r.erasure.margin), fmt17(r.sum.margin));
        detail::write_text(c.out, csv, out);
    } else {
        json inst = json::array();
        for (const auto& r : rows)
            inst.push_back({{"index", r.index},
                            {"seed", r.seed},
                            {"system_dim", r.system_dim},
                            {"outcomes", r.outcomes},
                            {"H", r.shannon},
                            {"I", r.mutual_information},
                            {"meas", infothermo::to_json(r.measurement)},
                            {"eras", infothermo::to_json(r.erasure)},
                            {"sum", infothermo::to_json(r.sum)}});
        json sz = json::array();
        const double ts[] = {0.5, twobox::zero_cost_fraction};
        for (std::size_t i = 0; i < szilard.size(); ++i) sz.push_back({{"t", ts[i]}, {"reconcile", infothermo::to_json(szilard[i])}});
        json report{{"tool", tool_info()}, {"config", to_json(c)}, {"instances", std::move(inst)}, {"szilard", std::move(sz)},
                    {"summary", {{"min_margin", min_margin}, {"count", rows.size()}, {"passed", ok}}}};
        detail::write_text(c.out, detail::dump(report), out);
    }
    return ok ? exit_ok : exit_failure;
}

inline int cmd_twobox(RunConfig c, std::ostream& out, std::ostream&) {
    if (c.format.empty()) c.format = "json";
    detail::require_format(c, {"json", "csv"});
    twobox::TwoBoxParams p;
    try {
        p = twobox::TwoBoxParams(c.t, c.volume, c.temperature);
    } catch (const InvariantViolation& e) {
        throw SchemaError(e.what());
    }
    const auto row = twobox::sweep_row(c.t, c.temperature);
    if (c.format == "csv") {
        detail::write_text(c.out, twobox::sweep_csv(std::span(&row, 1)), out);
        return exit_ok;
    }
    json report{{"tool", tool_info()},
                {"config", to_json(c)},
                {"t", c.t},
                {"stages", twobox::to_json(twobox::stage_works(p))},
                {"W_eras", twobox::erasure_work(p)},
                {"W_meas", twobox::measurement_work(p)},
                {"sum", twobox::erasure_work(p) + twobox::measurement_work(p)},
                {"dF", twobox::delta_free_energy(p)},
                {"entropy_balance", twobox::to_json(twobox::entropy_balance(p))},
                {"row", twobox::to_json(row)}};
    detail::write_text(c.out, detail::dump(report), out);
    return exit_ok;
}

inline int cmd_sweep(RunConfig c, std::ostream& out, std::ostream&) {
    if (c.format.empty()) c.format = "csv";
    detail::require_format(c, {"json", "csv"});
    const auto grid = parse_grid(c.grid);
    std::vector<twobox::SweepRow> rows;
    try {
        rows = twobox::sweep(grid, c.temperature);
    } catch (const InvariantViolation& e) {
        throw SchemaError(fmt::format("--grid {}: {}", c.grid, e.what()));
    }
    if (c.format == "csv") {
        detail::write_text(c.out, twobox::sweep_csv(rows), out);
    } else {
        json r = json::array();
        for (const auto& row : rows) r.push_back(twobox::to_json(row));
        detail::write_text(c.out, detail::dump({{"tool", tool_info()}, {"config", to_json(c)}, {"rows", std::move(r)}}), out);
    }
    return exit_ok;
}

inline int cmd_langevin(RunConfig c, std::ostream& out, std::ostream& err) {
    using namespace langevin;
    if (c.format.empty()) c.format = "csv";
    detail::require_format(c, {"json", "csv"});
    detail::require_seed(c);
    if (c.n_traj < 1) throw SchemaError("--n-traj must be at least 1");
    const double kt = Temperature(c.temperature).value();

    PotentialSpec pot;
    ProtocolSchedule schedule;
    if (!c.schedule.empty()) {
        schedule = schedule_from_json(JsonDocument::from_file(c.schedule));
        pot.params = schedule.initial_params();
    } else {
        if (!(c.tau > 0.0)) throw SchemaError("--tau must be positive");
        if (!(c.ratio > 0.0)) throw SchemaError("--ratio must be positive");
        if (c.ratio != 1.0) pot.params.c = tune_tilt(pot, kt, c.ratio);
        schedule = c.frozen ? ProtocolSchedule::frozen(pot.params, c.tau) : erasure_protocol(pot.params, c.tau);
    }

    EnsembleParams ep;
    ep.n_traj = c.n_traj;
    ep.seed = c.seed;
    ep.dt = c.dt;
    ep.temperature = kt;
    ep.threads = c.threads;
    const auto ens = simulate_erasure(pot, schedule, ep);

    const auto basins = basin_free_energies(pot, kt);
    const double df_endpoints = domain_free_energy(PotentialSpec{schedule.final_params(), pot.x_min, pot.x_max}, kt) - domain_free_energy(pot, kt);
    const auto landauer = landauer_check(ens, basins.delta, kt);
    const bool landauer_applies = landauer.success_fraction >= 0.99;
    const auto jar_main = jarzynski_check(ens, df_endpoints, kt);

    // Quasi-static ensembles almost never visit the failure tail that carries exp(-W/T), so the gating
    // Jarzynski check runs on a fast symmetric erasure unless --jarzynski-tau 0 asks for the main ensemble.
    JarzynskiReport jar_gate = jar_main;
    json gate_source{{"ensemble", "main"}};
    if (c.jarzynski_tau > 0.0) {
        PotentialSpec sym = pot;
        sym.params.c = 0.0;
        EnsembleParams fast = ep;
        fast.n_traj = c.jarzynski_n_traj;
        fast.seed = mix_seed(c.seed, 0x4a41525a);
        const auto fast_ens = simulate_erasure(sym, erasure_protocol(sym.params, c.jarzynski_tau), fast);
        jar_gate = jarzynski_check(fast_ens, 0.0, kt);
        gate_source = {{"ensemble", "fast_symmetric_erasure"}, {"tau", c.jarzynski_tau}, {"n_traj", fast.n_traj}, {"seed", fast.seed},
                       {"mean_work", fast_ens.mean_work()}};
    }

    const bool landauer_ok = !landauer_applies || landauer.satisfied;
    const bool ok = landauer_ok && !jar_gate.flagged;

    json landauer_json = to_json(landauer);
    landauer_json["applicable"] = landauer_applies;
    json gate_json = to_json(jar_gate);
    gate_json["source"] = gate_source;
    json summary{{"tool", tool_info()},
                 {"config", to_json(c)},
                 {"potential", {{"params", to_json(pot.params)}, {"x_min", pot.x_min}, {"x_max", pot.x_max}}},
                 {"schedule", to_json(schedule)},
                 {"n_traj", ens.work.size()},
                 {"mean", ens.mean_work()},
                 {"stderr", ens.stderr_work()},
                 {"success_fraction", ens.success_fraction()},
                 {"basins", {{"F_left", basins.left}, {"F_right", basins.right}, {"p_eq_left", basins.p_eq_left}, {"dF_M", basins.delta}}},
                 {"dF_endpoints", df_endpoints},
                 {"landauer", std::move(landauer_json)},
                 {"jarzynski", to_json(jar_main)},
                 {"jarzynski_check", std::move(gate_json)},
                 {"passed", ok}};

    if (c.format == "csv") {
        detail::write_text(c.out, ensemble_csv(ens), out);
        std::string summary_path = c.summary;
        if (summary_path.empty() && !c.out.empty() && c.out != "-") summary_path = c.out + ".summary.json";
        if (!summary_path.empty()) detail::write_text(summary_path, detail::dump(summary), out);
    } else {
        detail::write_text(c.out, detail::dump(summary), out);
        if (!c.summary.empty()) detail::write_text(c.summary, detail::dump(summary), out);
    }
    if (!landauer_ok)
        err << fmt::format("langevin: mean work {:.6g} is below the erasure bound {:.6g} by more than 3 stderr (seed {})\n", landauer.mean_work,
                           landauer.bound, c.seed);
    if (jar_gate.flagged) err << fmt::format("langevin: Jarzynski z-score {:.3g} exceeds 3 (seed {})\n", jar_gate.z_score, c.seed);
    return ok ? exit_ok : exit_failure;
}

inline int cmd_convergence(RunConfig c, std::ostream& out, std::ostream&) {
    if (c.format.empty()) c.format = "csv";
    detail::require_format(c, {"json", "csv"});
    const Temperature temp(c.temperature);
    const auto layout = MemoryLayout::symmetric(2, {0.0});
    const std::vector<double> p{0.5, 0.5};
    for (auto n : c.steps)
        if (n < 1) throw SchemaError("--steps entries must be positive");
    const auto rows = erasure_convergence(layout, temp, p, c.steps);
    if (c.format == "csv") {
        detail::write_text(c.out, convergence_csv(rows), out);
    } else {
        json r = json::array();
        for (const auto& row : rows) r.push_back({{"n_steps", row.steps}, {"W", row.work}, {"bound", row.bound}, {"margin", row.margin}});
        detail::write_text(c.out, detail::dump({{"tool", tool_info()}, {"config", to_json(c)}, {"rows", std::move(r)}}), out);
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// Entry point

namespace detail {

/// Values from --config for options not given on the command line.
inline void merge_config_file(const std::string& path, CLI::App& app, CLI::App& sub) {
    const auto doc = JsonDocument::from_file(path);
    const json& v = doc.value();
    if (!v.is_object()) doc.fail(json::json_pointer(), "config file must hold a JSON object");
    for (const auto& [key, value] : v.items()) {
        if (key == "config") doc.fail(json::json_pointer("/" + key), "config files cannot include other config files");
        const std::string flag = "--" + key;
        CLI::Option* opt = sub.get_option_no_throw(flag);
        if (!opt) opt = app.get_option_no_throw(flag);
        if (!opt) doc.fail(json::json_pointer("/" + key), fmt::format("unknown setting \"{}\" for {}", key, sub.get_name()));
        if (opt->count() > 0) continue;  // the command line wins
        std::vector<std::string> items;
        auto add = [&](const json& x) {
            if (x.is_string())
                items.push_back(x.get<std::string>());
            else if (x.is_number() || x.is_boolean())
                items.push_back(x.dump());
            else
                doc.fail(json::json_pointer("/" + key), "expected a string, number or boolean");
        };
        if (value.is_array())
            for (const auto& x : value) add(x);
        else
            add(value);
        try {
            opt->add_result(items);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            doc.fail(json::json_pointer("/" + key), e.what());
        }
    }
}

} // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    RunConfig cfg;
    CLI::App app{"infothermo: information-thermodynamics verification toolkit", "infothermo"};
    app.set_version_flag("--version", std::string(INFOTHERMO_VERSION));
    app.require_subcommand(1);

    auto common = [&](CLI::App* s) {
        s->add_option("--temperature", cfg.temperature, "bath temperature T (k_B = 1)");
        s->add_option("--out", cfg.out, "output file (default: standard output)");
        s->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        s->add_option("--config", cfg.config, "JSON file with default settings; flags override it");
        s->add_option("--tolerance", cfg.tolerance, "allowed negative margin");
    };
    auto seeded = [&](CLI::App* s) { s->add_option("--seed", cfg.seed, "random seed"); };

    auto* qcmi = app.add_subcommand("qcmi", "Shannon and QC-mutual information of a state and a measurement");
    common(qcmi);
    qcmi->add_option("--state", cfg.state, "density matrix JSON {dim, re, im}")->required();
    qcmi->add_option("--povm", cfg.povm, "measurement JSON {outcomes: [{k, operators}]}")->required();

    auto* verify = app.add_subcommand("verify-bounds", "measurement, erasure and sum bounds on random classical instances");
    common(verify);
    seeded(verify);
    verify->add_option("--instances", cfg.instances, "number of random instances");
    verify->add_option("--n-steps", cfg.n_steps, "ramp steps per protocol stage");
    verify->add_option("--replay", cfg.replay, "rerun the single instance with this seed");

    auto* tb = app.add_subcommand("twobox", "stage works of the two-box memory at one volume fraction");
    common(tb);
    tb->add_option("--t", cfg.t, "volume fraction of the left box, in (0,1)");
    tb->add_option("--volume", cfg.volume, "total volume");

    auto* sw = app.add_subcommand("sweep", "two-box works over a grid of volume fractions");
    common(sw);
    sw->add_option("--grid", cfg.grid, "lo:hi:step");

    auto* lv = app.add_subcommand("langevin", "double-well erasure ensemble");
    common(lv);
    seeded(lv);
    lv->add_option("--n-traj", cfg.n_traj, "trajectories");
    lv->add_option("--dt", cfg.dt, "time step");
    lv->add_option("--tau", cfg.tau, "protocol duration");
    lv->add_option("--ratio", cfg.ratio, "basin weight ratio Z_left/Z_right of the memory (1 = symmetric)");
    lv->add_option("--schedule", cfg.schedule, "schedule JSON {duration, knots}");
    lv->add_flag("--frozen", cfg.frozen, "keep the potential fixed");
    lv->add_option("--summary", cfg.summary, "JSON summary path");
    lv->add_option("--jarzynski-tau", cfg.jarzynski_tau, "duration of the fast erasure used for the Jarzynski check (0: use the main ensemble)");
    lv->add_option("--jarzynski-n-traj", cfg.jarzynski_n_traj, "trajectories in the fast Jarzynski ensemble");
    lv->add_option("--threads", cfg.threads, "worker threads (0: all cores)");

    auto* cv = app.add_subcommand("convergence", "quasi-static erasure work against ramp resolution");
    common(cv);
    cv->add_option("--steps", cfg.steps, "ramp step counts")->delimiter(',');

    try {
        app.parse(argc, argv);
        CLI::App* sub = app.get_subcommands().front();
        cfg.subcommand = sub->get_name();
        if (!cfg.config.empty()) detail::merge_config_file(cfg.config, app, *sub);
        if (auto* o = sub->get_option_no_throw("--seed")) cfg.seed_given = o->count() > 0;
        if (auto* o = sub->get_option_no_throw("--replay")) cfg.replay_given = o->count() > 0;

        if (cfg.subcommand == "qcmi") return cmd_qcmi(cfg, out, err);
        if (cfg.subcommand == "verify-bounds") return cmd_verify_bounds(cfg, out, err);
        if (cfg.subcommand == "twobox") return cmd_twobox(cfg, out, err);
        if (cfg.subcommand == "sweep") return cmd_sweep(cfg, out, err);
        if (cfg.subcommand == "langevin") return cmd_langevin(cfg, out, err);
        if (cfg.subcommand == "convergence") return cmd_convergence(cfg, out, err);
        return exit_usage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const InvariantViolation& e) {
        err << "error: invalid input: " << e.what() << "\n";
        return exit_usage;
    } catch (const DimensionMismatch& e) {
        err << "error: invalid input: " << e.what() << "\n";
        return exit_usage;
    } catch (const NumericalInstability& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const Error& e) {
        err << "check failed: " << e.what() << "\n";
        return exit_failure;
    }
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    std::vector<const char*> argv{"infothermo"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace infothermo::cli
