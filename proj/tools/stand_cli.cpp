// SPDX-License-Identifier: Apache-2.0
// Command-line driver: simulate, times, optimize, verify.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "stand/stand.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitConstraint = 2;
constexpr int kExitVerify = 3;

using stand::io::json;

double parse_number(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty())
        throw stand::ConfigError(0, what + ": not a number: '" + s + "'");
    return v;
}

stand::Level parse_level(const std::string& s, const stand::StandParams& p) {
    if (s == "hold")
        return stand::Level::hold();
    if (s == "max")
        return stand::Level::of_rate(p.e_max);
    return stand::Level::of_rate(parse_number(s, "level"));
}

/// Piecewise policy file: one `start_time level` pair per line, level being a
/// rate, `max` or `hold`. The first start time must be 0.
stand::Policy load_piecewise(const std::string& path, const stand::StandParams& p) {
    std::ifstream in(path);
    if (!in)
        throw stand::ConfigError(0, "cannot open policy file '" + path + "'");
    std::vector<double> bps;
    std::vector<stand::Level> levels;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        std::istringstream ls(hash == std::string::npos ? raw : raw.substr(0, hash));
        std::string ts, lv, extra;
        if (!(ls >> ts))
            continue;
        if (!(ls >> lv) || (ls >> extra))
            throw stand::ConfigError(line, path + ": expected 'start_time level'");
        try {
            const double t = parse_number(ts, "start time");
            if (levels.empty() && t != 0.0)
                throw stand::ConfigError(0, "first segment must start at 0");
            if (!levels.empty())
                bps.push_back(t);
            levels.push_back(parse_level(lv, p));
        } catch (const stand::ConfigError& e) {
            throw stand::ConfigError(line, path + ": " + e.what());
        }
    }
    if (levels.empty())
        throw stand::ConfigError(0, "policy file '" + path + "' has no segments");
    try {
        auto pol = stand::Policy::piecewise(bps, levels);
        pol.validate(p);
        return pol;
    } catch (const stand::DomainError& e) {
        throw stand::ConfigError(0, path + ": " + e.what());
    }
}

stand::Policy parse_policy(const std::string& spec, const stand::Scenario& sc) {
    using stand::CanonicalKind;
    if (spec == "zero")
        return stand::Policy::zero();
    if (spec == "max")
        return stand::Policy::max(sc.params);
    if (spec == "e0")
        return stand::build_policy(sc, CanonicalKind::E0);
    if (spec == "esup")
        return stand::build_policy(sc, CanonicalKind::Esup);
    if (spec.rfind("et:", 0) == 0)
        return stand::build_policy(sc, CanonicalKind::ET, parse_number(spec.substr(3), "et horizon"));
    if (spec.rfind("pw:", 0) == 0)
        return load_piecewise(spec.substr(3), sc.params);
    throw stand::ConfigError(0, "unknown policy '" + spec + "' (zero, max, e0, et:T, esup, pw:file)");
}

std::vector<stand::Level> parse_levels(const std::string& spec, const stand::StandParams& p) {
    if (spec == "fine")
        return stand::default_levels(p, true);
    std::vector<stand::Level> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_level(item, p));
    if (out.empty())
        throw stand::ConfigError(0, "--levels needs at least one level");
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw stand::ConfigError(0, "cannot write '" + path + "'");
    out << text;
}

double resolve_horizon(const stand::ScenarioFile& f, double cli) {
    if (cli > 0.0)
        return cli;
    return f.run.horizon.value_or(f.scenario.params.t_star);
}

struct Args {
    std::string scenario;
    std::string policy = "zero";
    std::string out;
    std::string levels = "0,max,hold";
    std::string candidates_csv;
    double step = 0.0;
    double horizon = 0.0;
    double et = 0.0;
    int intervals = 8;
    int policies = 100;
    std::uint64_t seed = 1;
    double growth_bias = 1.0;
    bool terminal = false;
};

int cmd_simulate(const Args& a) {
    const auto f = stand::load_scenario(a.scenario);
    const auto& sc = f.scenario;
    const double horizon = resolve_horizon(f, a.horizon);
    const auto pol = parse_policy(a.policy, sc);
    stand::IntegrateOptions io;
    io.step = a.step > 0.0 ? a.step : f.run.step;
    const auto tr = stand::integrate(sc, pol, horizon, io);

    std::ostringstream csv;
    stand::io::write_trajectory_csv(csv, sc, tr);
    json events = stand::io::to_json(tr);
    events["policy"] = stand::io::to_json(pol);
    if (a.out.empty()) {
        std::cout << csv.str();
    } else {
        write_text(a.out + ".csv", csv.str());
        write_text(a.out + ".events.json", events.dump(2) + "\n");
    }
    if (!tr.reached_horizon()) {
        std::cerr << "constraint exit at t = " << tr.validity_end << " ("
                  << stand::to_string(tr.termination) << ")\n";
        return kExitConstraint;
    }
    return kExitOk;
}

int cmd_times(const Args& a) {
    const auto f = stand::load_scenario(a.scenario);
    std::optional<double> et;
    if (a.et > 0.0)
        et = a.et;
    json out = stand::io::to_json(stand::characteristic_times(f.scenario, et));
    out["s_bar"] = f.scenario.params.s_bar();
    out["initial_rdi"] = f.scenario.initial_rdi();
    out["validity"] = stand::io::to_json(stand::validity_diagnostic(f.scenario));
    write_text(a.out, out.dump(2) + "\n");
    return kExitOk;
}

int cmd_optimize(const Args& a) {
    const auto f = stand::load_scenario(a.scenario);
    if (!f.economics)
        throw stand::ConfigError(0, "optimize needs an [economics] section");
    stand::SearchOptions opt;
    opt.intervals = a.intervals;
    opt.levels = parse_levels(a.levels, f.scenario.params);
    opt.terminal_n_min = a.terminal || f.run.terminal_n_min;
    opt.keep_candidates = !a.candidates_csv.empty();
    const double horizon = resolve_horizon(f, a.horizon);
    const auto res = stand::brute_force(f.scenario, *f.economics, horizon, opt);
    write_text(a.out, stand::io::to_json(res).dump(2) + "\n");
    if (!a.candidates_csv.empty()) {
        std::ostringstream csv;
        stand::io::write_candidates_csv(csv, res);
        write_text(a.candidates_csv, csv.str());
    }
    return kExitOk;
}

int cmd_verify(const Args& a) {
    const auto f = stand::load_scenario(a.scenario);
    stand::VerifyOptions opt;
    opt.policies = a.policies;
    opt.seed = a.seed;
    opt.horizon = resolve_horizon(f, a.horizon);
    opt.step = a.step > 0.0 ? a.step : f.run.step;
    opt.growth_bias = a.growth_bias;
    const auto rep = stand::verify_random_policies(f.scenario, opt);
    write_text(a.out, stand::io::to_json(rep).dump(2) + "\n");

    for (const auto& h : rep.hypotheses)
        std::cerr << (h.pass ? "pass " : "FAIL ") << h.name << "  margin " << h.margin << '\n';
    std::cerr << (rep.ok() ? "pass " : "FAIL ") << "envelopes  " << rep.envelope_violations.size()
              << " violations in " << rep.checks << " checks over " << rep.trajectories
              << " trajectories\n";
    return rep.ok() ? kExitOk : kExitVerify;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Controlled stand growth: simulation, characteristic times, optimization, audits"};
    app.require_subcommand(1);
    Args a;

    auto* sim = app.add_subcommand("simulate", "Integrate one policy and export the trajectory");
    sim->add_option("scenario", a.scenario, "Scenario file")->required();
    sim->add_option("--policy", a.policy, "zero | max | e0 | et:T | esup | pw:file");
    sim->add_option("--step", a.step, "Integrator step (default horizon/4096)");
    sim->add_option("--horizon", a.horizon, "Horizon (default run.horizon or t_star)");
    sim->add_option("--out", a.out, "Output prefix for PREFIX.csv and PREFIX.events.json");

    auto* times = app.add_subcommand("times", "Characteristic times as JSON");
    times->add_option("scenario", a.scenario, "Scenario file")->required();
    times->add_option("--et", a.et, "Also compute the E_T switch time for this horizon");
    times->add_option("--out", a.out, "Output file (default stdout)");

    auto* opt = app.add_subcommand("optimize", "Brute-force piecewise-constant search");
    opt->add_option("scenario", a.scenario, "Scenario file")->required();
    opt->add_option("--intervals", a.intervals, "Number of equal control intervals");
    opt->add_option("--levels", a.levels, "Comma list of 0|max|hold|rate, or 'fine'");
    opt->add_option("--horizon", a.horizon, "Horizon (default run.horizon or t_star)");
    opt->add_flag("--terminal", a.terminal, "Require n(T) = n_min");
    opt->add_option("--out", a.out, "Output file (default stdout)");
    opt->add_option("--candidates-csv", a.candidates_csv, "Per-candidate values as CSV");

    auto* ver = app.add_subcommand("verify", "Audit envelope bounds on random admissible policies");
    ver->add_option("scenario", a.scenario, "Scenario file")->required();
    ver->add_option("--policies", a.policies, "Number of random policies")->check(CLI::PositiveNumber);
    ver->add_option("--seed", a.seed, "Random seed");
    ver->add_option("--horizon", a.horizon, "Horizon (default run.horizon or t_star)");
    ver->add_option("--step", a.step, "Integrator step");
    ver->add_option("--out", a.out, "Output file (default stdout)");
    ver->add_option("--growth-bias", a.growth_bias, "")->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*sim)
            return cmd_simulate(a);
        if (*times)
            return cmd_times(a);
        if (*opt)
            return cmd_optimize(a);
        return cmd_verify(a);
    } catch (const stand::ConfigError& e) {
        std::cerr << "error: " << a.scenario << ": " << e.what() << '\n';
        return kExitConfig;
    } catch (const stand::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}
