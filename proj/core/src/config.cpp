#include "cellpol/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "cellpol/errors.hpp"

namespace cellpol {

std::string to_string(Model model) {
    switch (model) {
        case Model::Periodic1D: return "periodic1d";
        case Model::Simplified1D: return "simplified1d";
        case Model::Exchange1D: return "exchange1d";
        case Model::Exchange2D: return "exchange2d";
        case Model::Reduced: return "reduced";
    }
    return "exchange2d";
}

Model parse_model(const std::string& text) {
    for (Model m : {Model::Periodic1D, Model::Simplified1D, Model::Exchange1D, Model::Exchange2D, Model::Reduced}) {
        if (to_string(m) == text) return m;
    }
    throw std::invalid_argument("unknown model '" + text +
                                "' (periodic1d | simplified1d | exchange1d | exchange2d | reduced)");
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string ScaledValue::str() const {
    return relative ? format_double(value) + "x" : format_double(value);
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& text, int line) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || text.empty()) {
        throw ConfigError(key, line, "expected a real number, got '" + text + "'");
    }
    if (!std::isfinite(v)) throw ConfigError(key, line, "value must be finite");
    return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text, int line) {
    std::uint64_t v = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || text.empty()) {
        throw ConfigError(key, line, "expected a nonnegative integer, got '" + text + "'");
    }
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text, int line) {
    std::string normalised = text;
    std::replace(normalised.begin(), normalised.end(), ',', ' ');
    std::istringstream in(normalised);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_real(key, tok, line));
    if (out.empty()) throw ConfigError(key, line, "expected at least one value");
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_double(v[i]);
    }
    return out;
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "model", "D", "chi", "S", "k_on", "k_off", "alpha", "r", "M", "N_x", "N_y", "L",
        "dt", "dt_max", "dt_floor", "T_end", "seed", "eps", "sign_convention",
        "snapshot_every", "snapshot_steps", "pol_threshold", "homog_threshold", "blowup_guard",
        "steady_window", "steady_tol"};
    return keys;
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& value, int line) {
    auto real = [&] { return parse_real(key, value, line); };
    auto count = [&] { return static_cast<std::size_t>(parse_unsigned(key, value, line)); };
    try {
        if (key == "model") c.model = parse_model(value);
        else if (key == "D") c.params.D = real();
        else if (key == "chi") c.params.chi = real();
        else if (key == "S") c.params.S = parse_list(key, value, line);
        else if (key == "k_on") c.params.k_on = real();
        else if (key == "k_off") c.params.k_off = real();
        else if (key == "alpha") c.params.alpha = real();
        else if (key == "r") c.params.r = real();
        else if (key == "M") c.params.M = real();
        else if (key == "N_x") c.nx = count();
        else if (key == "N_y") c.ny = count();
        else if (key == "L") c.L = real();
        else if (key == "dt") c.dt = real();
        else if (key == "dt_max") c.dt_max = real();
        else if (key == "dt_floor") c.dt_floor = real();
        else if (key == "T_end") c.T_end = real();
        else if (key == "seed") c.seed = parse_unsigned(key, value, line);
        else if (key == "eps") c.eps = real();
        else if (key == "sign_convention") c.sign = parse_sign_convention(value);
        else if (key == "snapshot_every") c.snapshot_every = real();
        else if (key == "snapshot_steps") c.snapshot_steps = count();
        else if (key == "pol_threshold") c.pol_threshold = real();
        else if (key == "homog_threshold") c.homog_threshold = real();
        else if (key == "blowup_guard") {
            const bool rel = !value.empty() && (value.back() == 'x' || value.back() == 'X');
            c.blowup_guard = {parse_real(key, rel ? value.substr(0, value.size() - 1) : value, line), rel};
        }
        else if (key == "steady_window") c.steady_window = real();
        else if (key == "steady_tol") c.steady_tol = real();
        else throw ConfigError(key, line, "unknown key");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(key, line, e.what());
    }
}

RunConfig parse_config(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string raw;
    std::map<std::string, int> seen;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("", line_no, "malformed section header");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("", line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("", line_no, "missing key");
        if (auto it = seen.find(key); it != seen.end()) {
            throw ConfigError(key, line_no, "repeated key (first set on line " + std::to_string(it->second) + ")");
        }
        seen.emplace(key, line_no);
        set_config_value(config, key, value, line_no);
    }
    try {
        config.validate();
    } catch (const ConfigError& e) {
        auto it = seen.find(e.key());
        if (it == seen.end()) throw;
        // Re-raise with the line of the offending assignment.
        std::string what = e.what();
        const std::string prefix = "key '" + e.key() + "': ";
        if (auto p = what.find(prefix); p != std::string::npos) what = what.substr(p + prefix.size());
        throw ConfigError(e.key(), it->second, what);
    }
    return config;
}

void RunConfig::validate() const {
    auto require = [](bool ok, const char* key, const std::string& what) {
        if (!ok) throw ConfigError(key, 0, what);
    };
    const Params& p = params;
    require(p.D > 0.0, "D", "constraint D > 0 violated");
    require(p.chi >= 0.0, "chi", "constraint chi >= 0 violated");
    require(p.k_on >= 0.0, "k_on", "constraint k_on >= 0 violated");
    require(p.k_off > 0.0, "k_off", "constraint k_off > 0 violated");
    require(std::all_of(p.S.begin(), p.S.end(), [](double s) { return s >= 0.0; }), "S",
            "constraint S >= 0 violated");
    require(p.alpha >= 0.0, "alpha", "constraint alpha >= 0 violated");
    require(p.r > 0.0, "r", "constraint r > 0 violated");
    require(p.M > 0.0, "M", "constraint M > 0 violated");
    require(nx >= 3, "N_x", "constraint N_x >= 3 violated");
    require(ny >= 3, "N_y", "constraint N_y >= 3 violated");
    require(L > 0.0, "L", "constraint L > 0 violated");
    require(dt > 0.0, "dt", "constraint dt > 0 violated");
    require(dt_max >= dt, "dt_max", "constraint dt_max >= dt violated");
    require(dt_floor > 0.0 && dt_floor < dt, "dt_floor", "constraint 0 < dt_floor < dt violated");
    require(T_end >= 0.0, "T_end", "constraint T_end >= 0 violated");
    require(eps >= 0.0 && eps < 1.0, "eps", "constraint 0 <= eps < 1 violated");
    require(snapshot_every > 0.0, "snapshot_every", "constraint snapshot_every > 0 violated");
    require(pol_threshold > 0.0 && pol_threshold <= 1.0, "pol_threshold",
            "constraint 0 < pol_threshold <= 1 violated");
    require(homog_threshold > 0.0 && homog_threshold < pol_threshold, "homog_threshold",
            "constraint 0 < homog_threshold < pol_threshold violated");
    require(blowup_guard.value > 0.0, "blowup_guard", "constraint blowup_guard > 0 violated");
    require(steady_window > 0.0, "steady_window", "constraint steady_window > 0 violated");
    require(steady_tol > 0.0, "steady_tol", "constraint steady_tol > 0 violated");

    if (model == Model::Exchange2D) {
        require(p.alpha > 0.0, "alpha", "constraint alpha > 0 violated (exchange2d)");
        require(dt_max * p.k_off <= 1.0, "dt_max", "constraint dt_max * k_off <= 1 violated");
    }
    if (model == Model::Exchange1D) {
        require(dt_max * p.k_off <= 1.0, "dt_max", "constraint dt_max * k_off <= 1 violated");
    }
    const bool boundary_array = model == Model::Exchange2D || model == Model::Reduced;
    if (p.S.size() != 1) {
        require(boundary_array, "S", "an S array is only meaningful for exchange2d and reduced");
        require(p.S.size() == ny, "S", "S array length " + std::to_string(p.S.size()) +
                                           " does not match N_y = " + std::to_string(ny));
    }
    if (model == Model::Reduced) {
        require(ny >= 4, "N_y", "constraint N_y >= 4 violated (reduced)");
    }
}

Thresholds RunConfig::thresholds(double initial_peak) const {
    Thresholds t;
    t.polarised = pol_threshold;
    t.homogeneous = homog_threshold;
    t.blowup_guard = blowup_guard.resolve(initial_peak);
    t.steady_window = steady_window;
    t.steady_tol = steady_tol;
    return t;
}

std::vector<std::pair<std::string, std::string>> resolved_entries(const RunConfig& c) {
    const auto f = [](double v) { return format_double(v); };
    return {
        {"model", to_string(c.model)},
        {"D", f(c.params.D)},
        {"chi", f(c.params.chi)},
        {"S", join(c.params.S)},
        {"k_on", f(c.params.k_on)},
        {"k_off", f(c.params.k_off)},
        {"alpha", f(c.params.alpha)},
        {"r", f(c.params.r)},
        {"M", f(c.params.M)},
        {"N_x", std::to_string(c.nx)},
        {"N_y", std::to_string(c.ny)},
        {"L", f(c.L)},
        {"dt", f(c.dt)},
        {"dt_max", f(c.dt_max)},
        {"dt_floor", f(c.dt_floor)},
        {"T_end", f(c.T_end)},
        {"seed", std::to_string(c.seed)},
        {"eps", f(c.eps)},
        {"sign_convention", to_string(c.sign)},
        {"snapshot_every", f(c.snapshot_every)},
        {"snapshot_steps", std::to_string(c.snapshot_steps)},
        {"pol_threshold", f(c.pol_threshold)},
        {"homog_threshold", f(c.homog_threshold)},
        {"blowup_guard", c.blowup_guard.str()},
        {"steady_window", f(c.steady_window)},
        {"steady_tol", f(c.steady_tol)},
    };
}

std::string format_config(const RunConfig& config) {
    std::string out;
    for (const auto& [k, v] : resolved_entries(config)) out += k + " = " + v + "\n";
    return out;
}

}  // namespace cellpol
