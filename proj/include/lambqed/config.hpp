// config.hpp: Run configuration: flat key-value files with per-mode sections

#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lambqed/dynamics.hpp"
#include "lambqed/io.hpp"
#include "lambqed/metrics.hpp"
#include "lambqed/model.hpp"
#include "lambqed/sweep.hpp"

namespace lambqed {

inline constexpr const char* version_string = "1.0.0";

/// Malformed configuration (bad syntax, unknown key, out-of-range value).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct AxisSpec {
    double start{0.0};
    double stop{0.0};
    int count{1};

    /// "start:stop:count"
    static AxisSpec parse(const std::string& text) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw ConfigError("grid spec '" + text + "' is not start:stop:count");
        AxisSpec a;
        try {
            a.start = parse_double(trim(parts[0]));
            a.stop = parse_double(trim(parts[1]));
            const double c = parse_double(trim(parts[2]));
            if (c != std::floor(c) || c < 1) throw ConfigError("grid count must be a positive integer");
            a.count = static_cast<int>(c);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("grid spec '" + text + "': " + e.what());
        }
        if (!std::isfinite(a.start) || !std::isfinite(a.stop)) throw ConfigError("grid spec '" + text + "' is not finite");
        return a;
    }

    [[nodiscard]] std::string str() const { return format_double(start) + ":" + format_double(stop) + ":" + std::to_string(count); }
    [[nodiscard]] Axis axis(const std::string& name) const { return Axis::uniform(name, start, stop, count); }
    friend bool operator==(const AxisSpec&, const AxisSpec&) = default;
};

inline const std::vector<std::string>& run_modes() {
    static const std::vector<std::string> modes{"evolve", "steady", "sweep-time-theta", "sweep-steady", "verify"};
    return modes;
}

/// Parsed `[section]` / `key = value` text. Keys keep file order within a section.
struct KeyValueFile {
    struct Entry {
        std::string section;
        std::string key;
        std::string value;
        int line;
    };
    std::vector<Entry> entries;

    static KeyValueFile parse(std::istream& is) {
        KeyValueFile f;
        std::string section;
        std::string raw;
        int line_no = 0;
        while (std::getline(is, raw)) {
            ++line_no;
            const auto hash = raw.find('#');
            const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
            f.entries.push_back({section, std::move(key), trim(line.substr(eq + 1)), line_no});
        }
        return f;
    }
};

/// Every resolved setting of one CLI run.
struct RunConfig {
    std::string mode{"evolve"};
    SystemParams params{};
    std::map<std::string, AxisSpec> grids;  // axis name → spec (theta, t, kappa)
    std::vector<std::string> metrics;       // empty → mode default
    std::string out_dir{"out"};
    bool render{false};
    Frame frame{Frame::effective};
    double t_max{100.0};
    int t_points{401};
    double ode_tol{1e-8};
    double ode_atol{1e-10};
    double steady_tol{1e-9};
    SteadyMethod steady_method{SteadyMethod::null_space};
    unsigned threads{0};
    double truncation_tol{1e-4};
    bool t_max_set{false};

    [[nodiscard]] std::vector<std::string> resolved_metrics() const {
        if (!metrics.empty()) return metrics;
        if (mode == "evolve") return {"C", "I", "n_ph", "p_exc", "pop_uu", "pop_ud", "pop_du", "pop_dd", "C0"};
        if (mode == "sweep-time-theta") return {"C"};
        return {"C", "I", "n_ph", "p_exc"};
    }

    [[nodiscard]] Axis axis(const std::string& name) const {
        const auto it = grids.find(name);
        if (it != grids.end()) return it->second.axis(name);
        if (name == "theta") return default_theta_axis();
        if (name == "kappa") return default_kappa_axis();
        if (name == "t") {
            if (mode == "sweep-time-theta" && !t_max_set) return default_time_axis();
            return Axis::uniform("t", 0.0, t_max, t_points);
        }
        throw ConfigError("unknown axis '" + name + "'");
    }

    [[nodiscard]] EvolveOptions evolve_options() const {
        EvolveOptions o;
        o.ode.rtol = ode_tol;
        o.ode.atol = ode_atol;
        return o;
    }

    [[nodiscard]] SweepOptions sweep_options() const {
        SweepOptions o;
        o.threads = threads;
        o.truncation_tol = truncation_tol;
        o.frame = frame;
        o.ode.rtol = ode_tol;
        o.ode.atol = ode_atol;
        o.steady_method = steady_method;
        o.steady.steady_tol = steady_tol;
        return o;
    }

    /// Assigns one key; throws ConfigError on unknown keys or bad values.
    void set(const std::string& key, const std::string& value) {
        auto num = [&](double lo, double hi) {
            double v;
            try {
                v = parse_double(value);
            } catch (const std::exception&) {
                throw ConfigError("key '" + key + "': '" + value + "' is not a number");
            }
            if (!(v >= lo && v <= hi)) {
                throw ConfigError("key '" + key + "': " + value + " outside [" + format_double(lo) + ", " + format_double(hi) + "]");
            }
            return v;
        };
        auto integer = [&](double lo, double hi) {
            const double v = num(lo, hi);
            if (v != std::floor(v)) throw ConfigError("key '" + key + "': expected an integer");
            return static_cast<int>(v);
        };
        const double inf = std::numeric_limits<double>::infinity();
        if (key == "mode") {
            if (std::find(run_modes().begin(), run_modes().end(), value) == run_modes().end()) {
                throw ConfigError("unknown mode '" + value + "'");
            }
            mode = value;
        } else if (key == "g") {
            params.g = num(0.0, inf);
        } else if (key == "theta") {
            params.theta = num(0.0, 1.0);
        } else if (key == "kappa") {
            params.kappa = num(0.0, inf);
        } else if (key == "gamma") {
            params.gamma = num(0.0, inf);
        } else if (key == "gamma_phi") {
            params.gamma_phi = num(0.0, inf);
        } else if (key == "n_max") {
            params.n_max = integer(1, 1000);
        } else if (key == "t_max") {
            t_max = num(0.0, inf);
            if (t_max <= 0.0) throw ConfigError("key 't_max' must be > 0");
            t_max_set = true;
        } else if (key == "t_points") {
            t_points = integer(2, 1e7);
        } else if (key == "ode_tol") {
            ode_tol = num(1e-14, 1e-2);
        } else if (key == "ode_atol") {
            ode_atol = num(1e-16, 1e-2);
        } else if (key == "steady_tol") {
            steady_tol = num(1e-15, 1.0);
        } else if (key == "frame") {
            if (value == "effective") frame = Frame::effective;
            else if (value == "lab") frame = Frame::lab;
            else throw ConfigError("frame must be 'effective' or 'lab'");
        } else if (key == "method") {
            if (value == "null-space") steady_method = SteadyMethod::null_space;
            else if (value == "long-time") steady_method = SteadyMethod::long_time;
            else throw ConfigError("method must be 'null-space' or 'long-time'");
        } else if (key == "metrics") {
            std::vector<std::string> names;
            for (const auto& n : split(value, ',')) {
                const std::string t = trim(n);
                if (t.empty()) continue;
                try {
                    (void)Metric::parse(t);
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(e.what());
                }
                names.push_back(t);
            }
            if (names.empty()) throw ConfigError("metrics list is empty");
            metrics = std::move(names);
        } else if (key == "out") {
            if (value.empty()) throw ConfigError("out must not be empty");
            out_dir = value;
        } else if (key == "render") {
            if (value == "true" || value == "1") render = true;
            else if (value == "false" || value == "0") render = false;
            else throw ConfigError("render must be true or false");
        } else if (key == "threads") {
            threads = static_cast<unsigned>(integer(0, 4096));
        } else if (key == "truncation_tol") {
            truncation_tol = num(0.0, 1.0);
        } else if (key.rfind("grid.", 0) == 0) {
            const std::string axis = key.substr(5);
            if (axis != "theta" && axis != "t" && axis != "kappa") throw ConfigError("unknown grid axis '" + axis + "'");
            const AxisSpec spec = AxisSpec::parse(value);
            if (axis == "theta" && (std::min(spec.start, spec.stop) < 0.0 || std::max(spec.start, spec.stop) > 1.0)) {
                throw ConfigError("theta grid must lie in [0, 1]");
            }
            if (axis == "kappa" && std::min(spec.start, spec.stop) < 0.0) throw ConfigError("kappa grid must be >= 0");
            if (axis == "t" && (spec.start != 0.0 || spec.stop <= 0.0)) throw ConfigError("t grid must run from 0 to a positive time");
            grids[axis] = spec;
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }

    /// Applies a parsed file. Common sections apply first, then the section named
    /// after the active mode; sections for other modes are validated but ignored.
    void apply(const KeyValueFile& file) {
        static const std::set<std::string> common{"", "run", "params", "tolerances", "output"};
        for (const auto& e : file.entries) {
            if (e.section == "manifest") continue;
            const bool is_mode = std::find(run_modes().begin(), run_modes().end(), e.section) != run_modes().end();
            if (!common.count(e.section) && !is_mode) {
                throw ConfigError("line " + std::to_string(e.line) + ": unknown section [" + e.section + "]");
            }
            if (common.count(e.section)) wrap(e, [&] { set(e.key, e.value); });
        }
        for (const auto& e : file.entries) {
            if (e.section == mode) wrap(e, [&] { set(e.key, e.value); });
            else if (e.section != "manifest" && !common.count(e.section)) {
                RunConfig scratch;  // check syntax of inactive sections too
                wrap(e, [&] { scratch.set(e.key, e.value); });
            }
        }
    }

    /// Writes a config that, applied to a default RunConfig, reproduces this one.
    void write_manifest(std::ostream& os, const std::string& command_line) const {
        os << "# run manifest; feed back with --config to reproduce\n";
        os << "[manifest]\n";
        os << "tool = lambqed " << version_string << '\n';
        os << "command = " << command_line << "\n\n";
        os << "[run]\nmode = " << mode << "\n\n";
        os << "[params]\n";
        os << "g = " << format_double(params.g) << '\n';
        os << "theta = " << format_double(params.theta) << '\n';
        os << "kappa = " << format_double(params.kappa) << '\n';
        os << "gamma = " << format_double(params.gamma) << '\n';
        os << "gamma_phi = " << format_double(params.gamma_phi) << '\n';
        os << "n_max = " << params.n_max << "\n\n";
        os << "[tolerances]\n";
        os << "ode_tol = " << format_double(ode_tol) << '\n';
        os << "ode_atol = " << format_double(ode_atol) << '\n';
        os << "steady_tol = " << format_double(steady_tol) << '\n';
        os << "truncation_tol = " << format_double(truncation_tol) << "\n\n";
        os << "[output]\n";
        os << "out = " << out_dir << '\n';
        os << "render = " << (render ? "true" : "false") << "\n\n";
        os << '[' << mode << "]\n";
        os << "frame = " << to_string(frame) << '\n';
        os << "method = " << to_string(steady_method) << '\n';
        os << "threads = " << threads << '\n';
        os << "metrics = ";
        const auto ms = resolved_metrics();
        for (std::size_t k = 0; k < ms.size(); ++k) os << (k ? "," : "") << ms[k];
        os << '\n';
        for (const char* name : {"theta", "kappa", "t"}) {
            const Axis a = axis(name);
            os << "grid." << name << " = " << AxisSpec{a.values.front(), a.values.back(), static_cast<int>(a.size())}.str() << '\n';
        }
    }

private:
    template <class F>
    static void wrap(const KeyValueFile::Entry& e, F&& f) {
        try {
            f();
        } catch (const ConfigError& err) {
            throw ConfigError("line " + std::to_string(e.line) + " [" + e.section + "] " + err.what());
        }
    }
};

}  // namespace lambqed
