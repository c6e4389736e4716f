#pragma once

#include "spinclock/clock.hpp"
#include "spinclock/noise.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

// Plain-text `key = value` configuration: strict parsing (unknown keys, bad
// values and out-of-range values are hard errors carrying line numbers) and a
// canonical dump that round-trips byte-identically.

namespace spinclock {

struct ConfigError : std::runtime_error {
    int line;
    explicit ConfigError(int line_no, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

// Full resolved configuration: clock + noise + protocol extras.
struct ParsedConfig {
    ClockConfig clock;
    NoiseModel noise;
    double phase = 1e-3;           // imprinted phase for the satin subcommand (radians)
    double detection_sigma = 0.0;  // additive readout noise, Sz units
    int resolution = 91;           // tomography grid points per axis
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& v, int line, const std::string& key) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError(line, "key '" + key + "': cannot parse number from '" + v + "'");
    return x;
}

// radians by default; explicit "deg" suffix converts (CLI-boundary convention)
inline double parse_angle(const std::string& v, int line, const std::string& key) {
    std::string body = v;
    bool deg = false;
    if (body.size() > 3 && body.substr(body.size() - 3) == "deg") {
        deg = true;
        body = trim(body.substr(0, body.size() - 3));
    }
    const double x = parse_double(body, line, key);
    return deg ? x * kPi / 180.0 : x;
}

inline long parse_long(const std::string& v, int line, const std::string& key) {
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError(line, "key '" + key + "': cannot parse integer from '" + v + "'");
    return x;
}

inline bool parse_on_off(const std::string& v, int line, const std::string& key) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw ConfigError(line, "key '" + key + "': expected on/off, got '" + v + "'");
}

inline void require(bool ok, int line, const std::string& msg) {
    if (!ok) throw ConfigError(line, msg);
}

}  // namespace detail

inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "f_a",        "n_atoms",    "ramsey_time", "dead_time",       "servo_gain",
        "n_cycles",   "seed",       "input_state", "shear",           "light_qfi",
        "efficiency", "qnd_unwrap", "weak_resolution", "gamma_lo",    "h0",
        "h_minus1",   "h_minus2",   "gamma_nat",   "gamma_deph",      "gamma_loss",
        "phase",      "detection_sigma", "resolution"};
    return keys;
}

inline void apply_config_key(ParsedConfig& cfg, const std::string& key, const std::string& value,
                             int line) {
    using namespace detail;
    if (key == "f_a") {
        cfg.clock.f_a = parse_double(value, line, key);
        require(cfg.clock.f_a > 0.0, line, "f_a out of range: must be > 0 (Hz)");
    } else if (key == "n_atoms") {
        const long n = parse_long(value, line, key);
        require(n >= 1, line, "n_atoms out of range: must be >= 1");
        cfg.clock.n_atoms = static_cast<int>(n);
    } else if (key == "ramsey_time") {
        cfg.clock.ramsey_time = parse_double(value, line, key);
        require(cfg.clock.ramsey_time > 0.0, line, "ramsey_time out of range: must be > 0 (s)");
    } else if (key == "dead_time") {
        cfg.clock.dead_time = parse_double(value, line, key);
        require(cfg.clock.dead_time >= 0.0, line, "dead_time out of range: must be >= 0 (s)");
    } else if (key == "servo_gain") {
        cfg.clock.servo_gain = parse_double(value, line, key);
        require(cfg.clock.servo_gain >= 0.0 && cfg.clock.servo_gain < 2.0, line,
                "servo_gain out of range: must be in [0, 2)");
    } else if (key == "n_cycles") {
        const long n = parse_long(value, line, key);
        require(n >= 2, line, "n_cycles out of range: must be >= 2");
        cfg.clock.n_cycles = n;
    } else if (key == "seed") {
        const long long s = std::strtoll(value.c_str(), nullptr, 10);
        require(s >= 0, line, "seed out of range: must be >= 0");
        cfg.clock.seed = static_cast<std::uint64_t>(s);
    } else if (key == "input_state") {
        if (value == "css")
            cfg.clock.input_state = InputStateKind::css;
        else if (value == "oat")
            cfg.clock.input_state = InputStateKind::oat;
        else if (value == "measurement")
            cfg.clock.input_state = InputStateKind::measurement;
        else if (value == "satin")
            cfg.clock.input_state = InputStateKind::satin;
        else
            throw ConfigError(line, "input_state must be one of css|oat|measurement|satin");
    } else if (key == "shear") {
        cfg.clock.shear = parse_double(value, line, key);
        require(cfg.clock.shear >= 0.0, line, "shear out of range: must be >= 0");
    } else if (key == "light_qfi") {
        cfg.clock.light_qfi = parse_double(value, line, key);
        require(cfg.clock.light_qfi >= 0.0, line, "light_qfi out of range: must be >= 0");
    } else if (key == "efficiency") {
        cfg.clock.efficiency = parse_double(value, line, key);
        require(cfg.clock.efficiency > 0.0 && cfg.clock.efficiency <= 1.0, line,
                "efficiency out of range: must be in (0, 1]");
    } else if (key == "qnd_unwrap") {
        cfg.clock.qnd_unwrap = parse_on_off(value, line, key);
    } else if (key == "weak_resolution") {
        cfg.clock.weak_resolution = parse_double(value, line, key);
        require(cfg.clock.weak_resolution >= 1.0, line,
                "weak_resolution out of range: must be >= 1 (SQL units)");
    } else if (key == "gamma_lo") {
        cfg.noise.gamma_lo = parse_double(value, line, key);
        require(cfg.noise.gamma_lo >= 0.0, line, "gamma_lo out of range: must be >= 0 (s^-1)");
    } else if (key == "h0") {
        cfg.noise.h0 = parse_double(value, line, key);
        require(cfg.noise.h0 >= 0.0, line, "h0 out of range: must be >= 0");
    } else if (key == "h_minus1") {
        cfg.noise.h_minus1 = parse_double(value, line, key);
        require(cfg.noise.h_minus1 >= 0.0, line, "h_minus1 out of range: must be >= 0");
    } else if (key == "h_minus2") {
        cfg.noise.h_minus2 = parse_double(value, line, key);
        require(cfg.noise.h_minus2 >= 0.0, line, "h_minus2 out of range: must be >= 0");
    } else if (key == "gamma_nat") {
        cfg.noise.gamma_nat = parse_double(value, line, key);
        require(cfg.noise.gamma_nat >= 0.0, line, "gamma_nat out of range: must be >= 0 (s^-1)");
    } else if (key == "gamma_deph") {
        cfg.noise.gamma_deph = parse_double(value, line, key);
        require(cfg.noise.gamma_deph >= 0.0, line, "gamma_deph out of range: must be >= 0 (s^-1)");
    } else if (key == "gamma_loss") {
        cfg.noise.gamma_loss = parse_double(value, line, key);
        require(cfg.noise.gamma_loss >= 0.0, line, "gamma_loss out of range: must be >= 0 (s^-1)");
    } else if (key == "phase") {
        cfg.phase = parse_angle(value, line, key);
    } else if (key == "detection_sigma") {
        cfg.detection_sigma = parse_double(value, line, key);
        require(cfg.detection_sigma >= 0.0, line, "detection_sigma out of range: must be >= 0");
    } else if (key == "resolution") {
        const long r = parse_long(value, line, key);
        require(r >= 8, line, "resolution out of range: must be >= 8 points per axis");
        cfg.resolution = static_cast<int>(r);
    } else {
        throw ConfigError(line, "unknown key '" + key + "'");
    }
}

inline ParsedConfig parse_config(const std::string& text) {
    ParsedConfig cfg;
    int line_no = 0;
    std::size_t pos = 0;
    std::vector<std::string> seen;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string line =
            eol == std::string::npos ? text.substr(pos) : text.substr(pos, eol - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line_no, "expected 'key = value', got '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        for (const auto& s : seen)
            if (s == key) throw ConfigError(line_no, "duplicate key '" + key + "'");
        seen.push_back(key);
        apply_config_key(cfg, key, value, line_no);
    }
    try {
        cfg.clock.validate();
        cfg.noise.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(0, e.what());
    }
    return cfg;
}

// canonical echo dump; parse(dump(x)) == x and dump is idempotent byte-for-byte
inline std::string dump_config(const ParsedConfig& cfg) {
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::string out;
    out += "f_a = " + num(cfg.clock.f_a) + "\n";
    out += "n_atoms = " + std::to_string(cfg.clock.n_atoms) + "\n";
    out += "ramsey_time = " + num(cfg.clock.ramsey_time) + "\n";
    out += "dead_time = " + num(cfg.clock.dead_time) + "\n";
    out += "servo_gain = " + num(cfg.clock.servo_gain) + "\n";
    out += "n_cycles = " + std::to_string(cfg.clock.n_cycles) + "\n";
    out += "seed = " + std::to_string(cfg.clock.seed) + "\n";
    out += "input_state = " + std::string(to_string(cfg.clock.input_state)) + "\n";
    out += "shear = " + num(cfg.clock.shear) + "\n";
    out += "light_qfi = " + num(cfg.clock.light_qfi) + "\n";
    out += "efficiency = " + num(cfg.clock.efficiency) + "\n";
    out += "qnd_unwrap = " + std::string(cfg.clock.qnd_unwrap ? "on" : "off") + "\n";
    out += "weak_resolution = " + num(cfg.clock.weak_resolution) + "\n";
    out += "gamma_lo = " + num(cfg.noise.gamma_lo) + "\n";
    out += "h0 = " + num(cfg.noise.h0) + "\n";
    out += "h_minus1 = " + num(cfg.noise.h_minus1) + "\n";
    out += "h_minus2 = " + num(cfg.noise.h_minus2) + "\n";
    out += "gamma_nat = " + num(cfg.noise.gamma_nat) + "\n";
    out += "gamma_deph = " + num(cfg.noise.gamma_deph) + "\n";
    out += "gamma_loss = " + num(cfg.noise.gamma_loss) + "\n";
    out += "phase = " + num(cfg.phase) + "\n";
    out += "detection_sigma = " + num(cfg.detection_sigma) + "\n";
    out += "resolution = " + std::to_string(cfg.resolution) + "\n";
    return out;
}

// --- parameter sweeps ------------------------------------------------------------

struct SweepSpec {
    std::string param;           // must name a numeric config key
    std::vector<double> values;  // resolved value list
};

inline bool sweep_param_known(const std::string& param) {
    for (const auto& k : config_keys())
        if (k == param && k != "input_state" && k != "qnd_unwrap") return true;
    return false;
}

inline SweepSpec make_sweep(const std::string& param, double min, double max, int count,
                            bool log_spacing) {
    if (!sweep_param_known(param))
        throw std::invalid_argument("sweep: unknown or non-numeric parameter '" + param + "'");
    if (count < 1) throw std::invalid_argument("sweep: count must be >= 1");
    if (log_spacing && (min <= 0.0 || max <= 0.0))
        throw std::invalid_argument("sweep: log spacing requires positive bounds");
    SweepSpec spec;
    spec.param = param;
    if (count == 1) {
        spec.values.push_back(min);
        return spec;
    }
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / (count - 1);
        spec.values.push_back(log_spacing ? min * std::pow(max / min, t)
                                          : min + (max - min) * t);
    }
    return spec;
}

inline SweepSpec make_sweep(const std::string& param, const std::vector<double>& values) {
    if (!sweep_param_known(param))
        throw std::invalid_argument("sweep: unknown or non-numeric parameter '" + param + "'");
    if (values.empty()) throw std::invalid_argument("sweep: empty value list");
    return SweepSpec{param, values};
}

inline void apply_sweep_value(ParsedConfig& cfg, const std::string& param, double value) {
    char buf[64];
    if (param == "n_atoms" || param == "n_cycles" || param == "resolution" || param == "seed")
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(std::llround(value)));
    else
        std::snprintf(buf, sizeof(buf), "%.17g", value);
    apply_config_key(cfg, param, buf, 0);
}

}  // namespace spinclock
