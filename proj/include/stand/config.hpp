// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "economics.hpp"
#include "errors.hpp"
#include "model.hpp"

namespace stand {

/// Run settings read from the [run] section.
struct RunSettings {
    std::optional<double> horizon;
    double step = 0.0;  // 0: horizon / 4096
    bool terminal_n_min = false;
};

/// Parsed scenario file: the scenario plus optional economics and run settings.
///
/// Text format: `[section]` headers and `key = value` lines; `#` or `;` start a
/// comment. Sections: [stand] q A n_min e_max t_star; [growth] variant
/// (fagacees|power|linear) with p or theta; [environment] v
/// (exponential|hyperbolic) v0 lambda h0 (saturating) h_inf tau; [initial] s n;
/// [economics] k alpha delta; [run] horizon step terminal_n_min.
struct ScenarioFile {
    Scenario scenario;
    std::optional<EconomicModel> economics;
    RunSettings run;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    int line = 0;
};

class ConfigTable {
  public:
    void set(const std::string& key, std::string value, int line) {
        if (entries_.count(key))
            throw ConfigError(line, "duplicate key '" + key + "'");
        entries_[key] = {std::move(value), line};
    }
    void section(const std::string& name, int line) { sections_[name] = line; }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    bool has_section(const std::string& name) const { return sections_.count(name) > 0; }
    int section_line(const std::string& name) const {
        auto it = sections_.find(name);
        return it == sections_.end() ? 0 : it->second;
    }

    int line_of(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    std::string text(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            const auto dot = key.find('.');
            throw ConfigError(section_line(key.substr(0, dot)), "missing required key '" + key + "'");
        }
        used_.insert(key);
        return it->second.value;
    }

    double number(const std::string& key) const {
        const std::string v = text(key);
        double out = 0.0;
        const auto* first = v.data();
        const auto* last = v.data() + v.size();
        auto [ptr, ec] = std::from_chars(first, last, out);
        if (ec != std::errc() || ptr != last || !std::isfinite(out))
            throw ConfigError(line_of(key), "'" + key + "' is not a finite number: '" + v + "'");
        return out;
    }

    std::optional<double> maybe_number(const std::string& key) const {
        if (!has(key))
            return std::nullopt;
        return number(key);
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key))
            return fallback;
        const std::string v = text(key);
        if (v == "true" || v == "1" || v == "yes")
            return true;
        if (v == "false" || v == "0" || v == "no")
            return false;
        throw ConfigError(line_of(key), "'" + key + "' is not a boolean: '" + v + "'");
    }

    /// Line of the first key mentioned in a validation message.
    int blame(const std::string& message) const {
        int best = 0;
        std::size_t best_pos = std::string::npos;
        for (const auto& [key, e] : entries_) {
            const auto pos = message.find(key);
            if (pos != std::string::npos && pos < best_pos) {
                best_pos = pos;
                best = e.line;
            }
        }
        return best;
    }

    void reject_unused(const std::set<std::string>& allowed) const {
        for (const auto& [key, e] : entries_)
            if (!allowed.count(key))
                throw ConfigError(e.line, "unknown key '" + key + "'");
    }

  private:
    std::map<std::string, Entry> entries_;
    std::map<std::string, int> sections_;
    mutable std::set<std::string> used_;
};

inline const std::set<std::string>& known_sections() {
    static const std::set<std::string> s{"stand",   "growth",    "environment",
                                         "initial", "economics", "run"};
    return s;
}

inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> k{
        "stand.q",         "stand.A",           "stand.n_min",   "stand.e_max",
        "stand.t_star",    "growth.variant",    "growth.p",      "growth.theta",
        "environment.v",   "environment.v0",    "environment.lambda", "environment.h0",
        "environment.h_inf", "environment.tau", "initial.s",     "initial.n",
        "economics.k",     "economics.alpha",   "economics.delta", "run.horizon",
        "run.step",        "run.terminal_n_min"};
    return k;
}

inline ConfigTable tokenize(std::istream& in) {
    ConfigTable table;
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find_first_of("#;");
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty())
            continue;
        if (body.front() == '[') {
            if (body.back() != ']')
                throw ConfigError(line, "malformed section header '" + body + "'");
            section = trim(body.substr(1, body.size() - 2));
            if (!known_sections().count(section))
                throw ConfigError(line, "unknown section [" + section + "]");
            table.section(section, line);
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line, "expected 'key = value', got '" + body + "'");
        if (section.empty())
            throw ConfigError(line, "key outside of any section");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(line, "empty key or value");
        const std::string full = section + "." + key;
        if (!known_keys().count(full))
            throw ConfigError(line, "unknown key '" + key + "' in [" + section + "]");
        table.set(full, value, line);
    }
    return table;
}

template <class F>
auto with_blame(const ConfigTable& t, F&& f) {
    try {
        return f();
    } catch (const DomainError& e) {
        throw ConfigError(t.blame(e.what()), e.what());
    }
}

} // namespace detail

inline ScenarioFile parse_scenario(std::istream& in) {
    const auto t = detail::tokenize(in);
    ScenarioFile out;
    auto& sc = out.scenario;

    sc.params.q = t.number("stand.q");
    sc.params.A = t.number("stand.A");
    sc.params.n_min = t.number("stand.n_min");
    sc.params.e_max = t.number("stand.e_max");
    sc.params.t_star = t.number("stand.t_star");
    detail::with_blame(t, [&] { sc.params.validate(); return 0; });

    const std::string variant = t.text("growth.variant");
    sc.growth = detail::with_blame(t, [&] {
        if (variant == "fagacees") {
            if (t.has("growth.theta"))
                throw ConfigError(t.line_of("growth.theta"), "growth.theta is not used by fagacees");
            return GrowthFunction::fagacees(t.number("growth.p"));
        }
        if (variant == "power") {
            if (t.has("growth.p"))
                throw ConfigError(t.line_of("growth.p"), "growth.p is not used by power");
            return GrowthFunction::power(t.number("growth.theta"));
        }
        if (variant == "linear") {
            if (t.has("growth.p") || t.has("growth.theta"))
                throw ConfigError(t.line_of("growth.variant"), "linear growth takes no parameters");
            return GrowthFunction::linear();
        }
        throw ConfigError(t.line_of("growth.variant"),
                          "growth.variant must be fagacees, power or linear");
    });

    sc.env = detail::with_blame(t, [&] {
        const std::string v = t.text("environment.v");
        const double v0 = t.number("environment.v0");
        const double lambda = t.number("environment.lambda");
        Environment::EnergyFamily fam;
        if (v == "exponential")
            fam = Exponential{v0, lambda};
        else if (v == "hyperbolic")
            fam = Hyperbolic{v0, lambda};
        else
            throw ConfigError(t.line_of("environment.v"),
                              "environment.v must be exponential or hyperbolic");
        if (t.text("environment.h0") != "saturating")
            throw ConfigError(t.line_of("environment.h0"), "environment.h0 must be saturating");
        return Environment(fam, Saturating{t.number("environment.h_inf"), t.number("environment.tau")});
    });

    sc.initial = {0.0, t.number("initial.s"), t.number("initial.n")};
    detail::with_blame(t, [&] { sc.validate(); return 0; });

    if (t.has_section("economics")) {
        EconomicModel m{t.number("economics.k"), t.number("economics.alpha"),
                        t.number("economics.delta")};
        detail::with_blame(t, [&] { m.validate(); return 0; });
        out.economics = m;
    }

    out.run.horizon = t.maybe_number("run.horizon");
    out.run.step = t.maybe_number("run.step").value_or(0.0);
    out.run.terminal_n_min = t.boolean("run.terminal_n_min", false);
    if (out.run.horizon && !(*out.run.horizon > 0.0 && *out.run.horizon <= sc.params.t_star))
        throw ConfigError(t.line_of("run.horizon"), "run.horizon must lie in (0, stand.t_star]");
    if (out.run.step < 0.0)
        throw ConfigError(t.line_of("run.step"), "run.step must be >= 0");
    return out;
}

inline ScenarioFile parse_scenario_string(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

inline ScenarioFile load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(0, "cannot open scenario file '" + path + "'");
    return parse_scenario(in);
}

/// Serialize in the format read by parse_scenario; round-trips exactly.
inline std::string to_config_string(const ScenarioFile& f) {
    std::ostringstream o;
    o.precision(17);
    const auto& sc = f.scenario;
    const auto& p = sc.params;
    o << "[stand]\nq = " << p.q << "\nA = " << p.A << "\nn_min = " << p.n_min
      << "\ne_max = " << p.e_max << "\nt_star = " << p.t_star << "\n\n[growth]\n";
    std::visit(
        [&](const auto& g) {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, Fagacees>)
                o << "variant = fagacees\np = " << g.p << "\n";
            else if constexpr (std::is_same_v<T, Power>)
                o << "variant = power\ntheta = " << g.theta << "\n";
            else
                o << "variant = linear\n";
        },
        sc.growth.variant());
    o << "\n[environment]\n";
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            o << "v = " << (std::is_same_v<T, Exponential> ? "exponential" : "hyperbolic")
              << "\nv0 = " << v.v0 << "\nlambda = " << v.lambda << "\n";
        },
        sc.env.energy_family());
    const auto& h = std::get<Saturating>(sc.env.height_family());
    o << "h0 = saturating\nh_inf = " << h.h_inf << "\ntau = " << h.tau << "\n";
    o << "\n[initial]\ns = " << sc.initial.s << "\nn = " << sc.initial.n << "\n";
    if (f.economics)
        o << "\n[economics]\nk = " << f.economics->k << "\nalpha = " << f.economics->alpha
          << "\ndelta = " << f.economics->delta << "\n";
    o << "\n[run]\n";
    if (f.run.horizon)
        o << "horizon = " << *f.run.horizon << "\n";
    o << "step = " << f.run.step << "\nterminal_n_min = " << (f.run.terminal_n_min ? "true" : "false")
      << "\n";
    return o.str();
}

} // namespace stand
