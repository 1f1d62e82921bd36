#pragma once

#include <gem/csv.hpp>
#include <gem/experiment.hpp>

#include <cstdlib>
#include <map>
#include <set>

#ifndef GEM_SCENARIO_DIR
#define GEM_SCENARIO_DIR "scenarios"
#endif

namespace gem {

/// Bad or contradictory configuration; `key` names the offending entry.
class config_error : public invalid_parameter
{
public:
    config_error(std::string key, const std::string& what)
      : invalid_parameter(key.empty() ? what : key + ": " + what), key_(std::move(key))
    {
    }
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/*
 * Config text is a list of `key = value` lines. `#` starts a comment,
 * blank lines are ignored and keys are dotted paths such as `medium.beta`.
 * Lists are comma separated. A `scenario = <preset>` line loads that preset
 * first; later lines and later layers (--config, then --set) override it.
 */
struct ConfigEntry
{
    std::string value;
    std::string origin;
};

using ConfigEntries = std::map<std::string, ConfigEntry>;

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty() || !out.empty())
        out.push_back(trim(cur));
    return out;
}

// Keys that replace one another. Setting any key of one alternative drops
// the keys of the other alternatives set by earlier layers.
inline const std::vector<std::vector<std::set<std::string>>>& exclusive_groups()
{
    static const std::vector<std::vector<std::set<std::string>>> groups{
        {{"medium.beta"}, {"medium.N"}},
        {{"medium.eta"}, {"medium.bandwidth", "medium.bandwidth_convention"}},
        {{"medium.intrinsic.fwhm"}, {"medium.intrinsic.fwhm_hz"}},
    };
    return groups;
}

inline const std::set<std::string>& known_keys()
{
    static const std::set<std::string> keys{
        "name",
        "scenario",
        "medium.g",
        "medium.N",
        "medium.beta",
        "medium.gamma",
        "medium.eta",
        "medium.bandwidth",
        "medium.bandwidth_convention",
        "medium.z_half",
        "medium.intrinsic.shape",
        "medium.intrinsic.fwhm",
        "medium.intrinsic.fwhm_hz",
        "medium.intrinsic.classes",
        "medium.intrinsic.truncation",
        "medium.orientations",
        "medium.orientation_weights",
        "pulse.shape",
        "pulse.duration",
        "pulse.amplitude",
        "pulse.amplitude_imag",
        "pulse.center",
        "pulse.carrier",
        "grid.n_z",
        "grid.dt",
        "grid.t_start",
        "grid.t_end",
        "grid.store_stride",
        "grid.allow_unstable",
        "grid.probe_cells",
        "protocol.flips",
        "protocol.initial_sign",
        "cascade.enabled",
        "cascade.polarity",
        "cascade.flip_time",
        "experiment.flip_marker",
        "experiment.broadening_ratio",
        "experiment.reference",
        "compare.validity_threshold",
        "sweep.key",
        "sweep.values",
    };
    return keys;
}

} // namespace detail

/// Parses config text. `origin` prefixes line numbers in diagnostics.
inline ConfigEntries parse_config(std::string_view text, const std::string& origin = "config")
{
    ConfigEntries out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        const std::string body = detail::trim(line);
        if (body.empty())
            continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw config_error("", where + ": expected 'key = value'");
        const std::string key = detail::trim(body.substr(0, eq));
        const std::string value = detail::trim(body.substr(eq + 1));
        if (key.empty())
            throw config_error("", where + ": empty key");
        if (!detail::known_keys().contains(key))
            throw config_error(key, "unknown key (" + where + ")");
        if (out.contains(key))
            throw config_error(key, "set twice (" + where + ")");
        out[key] = {value, where};
    }
    for (const auto& group : detail::exclusive_groups()) {
        std::vector<std::string> hits;
        for (const auto& alt : group)
            for (const auto& k : alt)
                if (out.contains(k)) {
                    hits.push_back(k);
                    break;
                }
        if (hits.size() > 1)
            throw config_error(hits[1], "conflicts with " + hits[0] + "; set only one of them");
    }
    return out;
}

/// Applies `layer` on top of `base`, honouring the exclusive groups.
inline ConfigEntries merge_config(ConfigEntries base, const ConfigEntries& layer)
{
    for (const auto& [key, entry] : layer) {
        for (const auto& group : detail::exclusive_groups()) {
            const auto mine = std::find_if(group.begin(), group.end(),
                                           [&](const auto& alt) { return alt.contains(key); });
            if (mine == group.end())
                continue;
            for (const auto& alt : group)
                if (&alt != &*mine)
                    for (const auto& k : alt)
                        base.erase(k);
        }
        base[key] = entry;
    }
    return base;
}

/// `key=value` from the command line.
inline ConfigEntries parse_assignment(const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos)
        throw config_error("", "--set expects key=value, got '" + text + "'");
    return parse_config(detail::trim(text.substr(0, eq)) + " = " + detail::trim(text.substr(eq + 1)),
                        "--set");
}

inline std::filesystem::path scenario_dir()
{
    if (const char* env = std::getenv("GEM_SCENARIO_DIR"); env && *env)
        return env;
    return GEM_SCENARIO_DIR;
}

inline std::string read_text(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw config_error("", "cannot read " + path.string());
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

/// Loads a config file (or preset) and everything it inherits through
/// `scenario = ...`.
inline ConfigEntries load_layer(const std::string& text, const std::string& origin,
                                const std::filesystem::path& presets, int depth = 0)
{
    if (depth > 8)
        throw config_error("scenario", "preset inheritance too deep");
    auto layer = parse_config(text, origin);
    ConfigEntries base;
    if (const auto it = layer.find("scenario"); it != layer.end()) {
        const auto name = it->second.value;
        const auto path = presets / (name + ".cfg");
        if (!std::filesystem::exists(path))
            throw config_error("scenario", "unknown preset '" + name + "' (looked in " + presets.string() + ")");
        base = load_layer(read_text(path), path.filename().string(), presets, depth + 1);
        layer.erase(it);
        if (!layer.contains("name") && !base.contains("name"))
            layer["name"] = {name, origin};
    }
    return merge_config(std::move(base), layer);
}

inline ConfigEntries load_preset(const std::string& name, const std::filesystem::path& presets = scenario_dir())
{
    return load_layer("scenario = " + name, "--scenario", presets);
}

//
// Typed view
//

struct ExperimentSettings
{
    double flip_marker = 0.0;
    std::optional<double> broadening_ratio;
    bool reference = true;
};

struct SweepAxis
{
    std::string key;
    std::vector<std::string> values;
};

struct RunConfig
{
    Scenario scenario;
    std::optional<ExperimentSettings> experiment;
    std::optional<SweepAxis> sweep;
    double validity_threshold = 2.0;
    ConfigEntries entries; // the layered input the scenario came from
};

namespace detail {

class reader
{
public:
    explicit reader(const ConfigEntries& e) : e_(e) {}

    bool has(const std::string& k) const { return e_.contains(k); }
    const std::string& raw(const std::string& k) const { return e_.at(k).value; }

    double number(const std::string& k) const
    {
        const auto& s = raw(k);
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v))
            throw config_error(k, "expected a finite number, got '" + s + "' (" + e_.at(k).origin + ")");
        return v;
    }
    double number(const std::string& k, double fallback) const { return has(k) ? number(k) : fallback; }

    long long integer(const std::string& k) const
    {
        const auto& s = raw(k);
        long long v = 0;
        const char* b = s.data();
        if (!s.empty() && s[0] == '+')
            ++b;
        const auto res = std::from_chars(b, s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
            throw config_error(k, "expected an integer, got '" + s + "' (" + e_.at(k).origin + ")");
        return v;
    }
    int integer(const std::string& k, int fallback) const
    {
        return has(k) ? static_cast<int>(integer(k)) : fallback;
    }

    bool boolean(const std::string& k, bool fallback) const
    {
        if (!has(k))
            return fallback;
        const auto& s = raw(k);
        if (s == "true" || s == "yes" || s == "1" || s == "on")
            return true;
        if (s == "false" || s == "no" || s == "0" || s == "off")
            return false;
        throw config_error(k, "expected true or false, got '" + s + "'");
    }

    template <class T>
    T choice(const std::string& k, const std::vector<std::pair<std::string, T>>& options, T fallback) const
    {
        if (!has(k))
            return fallback;
        const auto& s = raw(k);
        std::string names;
        for (const auto& [name, value] : options) {
            if (name == s)
                return value;
            names += (names.empty() ? "" : ", ") + name;
        }
        throw config_error(k, "'" + s + "' is not one of: " + names);
    }

    std::vector<double> numbers(const std::string& k) const
    {
        std::vector<double> out;
        for (const auto& item : split_list(raw(k))) {
            ConfigEntries one{{k, {item, e_.at(k).origin}}};
            out.push_back(reader(one).number(k));
        }
        return out;
    }

    std::vector<long long> integers(const std::string& k) const
    {
        std::vector<long long> out;
        for (const auto& item : split_list(raw(k))) {
            ConfigEntries one{{k, {item, e_.at(k).origin}}};
            out.push_back(reader(one).integer(k));
        }
        return out;
    }

private:
    const ConfigEntries& e_;
};

inline const std::vector<std::pair<std::string, broadening_convention>>& convention_names()
{
    static const std::vector<std::pair<std::string, broadening_convention>> v{
        {"half_width_cyclic", broadening_convention::half_width_cyclic},
        {"half_width_angular", broadening_convention::half_width_angular},
        {"full_width_cyclic", broadening_convention::full_width_cyclic},
        {"full_width_angular", broadening_convention::full_width_angular}};
    return v;
}

inline const std::vector<std::pair<std::string, line_shape>>& shape_names()
{
    static const std::vector<std::pair<std::string, line_shape>> v{
        {"delta", line_shape::delta}, {"lorentzian", line_shape::lorentzian}, {"gaussian", line_shape::gaussian}};
    return v;
}

template <class T>
std::string name_of(const std::vector<std::pair<std::string, T>>& names, T value)
{
    for (const auto& [n, v] : names)
        if (v == value)
            return n;
    return "?";
}

// Re-throws validation failures from the domain types as config errors
// naming the key their message starts with.
template <class Fn>
void validated(const std::string& fallback_key, Fn&& fn)
{
    try {
        fn();
    } catch (const config_error&) {
        throw;
    } catch (const invalid_parameter& e) {
        std::string msg = e.what();
        std::string key = fallback_key;
        const auto sp = msg.find(' ');
        const auto head = msg.substr(0, sp);
        if (head.find('.') != std::string::npos)
            key = head;
        throw config_error(key, msg);
    }
}

} // namespace detail

/// Builds the typed configuration and validates it.
inline RunConfig resolve_config(const ConfigEntries& entries)
{
    const detail::reader r(entries);
    RunConfig cfg;
    cfg.entries = entries;
    auto& sc = cfg.scenario;
    sc.name = r.has("name") ? r.raw("name") : "custom";

    auto& m = sc.medium;
    m.z_half = r.number("medium.z_half", m.z_half);
    if (!(m.z_half > 0.0))
        throw config_error("medium.z_half", "must be > 0");
    m.g = r.number("medium.g", m.g);
    m.gamma = r.number("medium.gamma", m.gamma);
    if (r.has("medium.bandwidth_convention") && !r.has("medium.bandwidth"))
        throw config_error("medium.bandwidth_convention", "only applies together with medium.bandwidth");
    if (r.has("medium.bandwidth")) {
        const auto conv = r.choice("medium.bandwidth_convention", detail::convention_names(),
                                   broadening_convention::half_width_cyclic);
        const double bw = r.number("medium.bandwidth");
        if (!(bw > 0.0))
            throw config_error("medium.bandwidth", "must be > 0");
        m.eta = eta_from_broadening(bw, conv, m.z_half);
    } else {
        m.eta = r.number("medium.eta", m.eta);
    }
    if (!(m.eta > 0.0))
        throw config_error(r.has("medium.eta") ? "medium.eta" : "medium.bandwidth", "must be > 0");
    if (r.has("medium.beta")) {
        const double b = r.number("medium.beta");
        if (b < 0.0)
            throw config_error("medium.beta", "must be >= 0");
        if (!(m.g > 0.0))
            throw config_error("medium.beta", "needs medium.g > 0; set medium.N instead");
        m.set_beta(b);
    } else {
        m.N = r.number("medium.N", m.N);
    }

    auto& in = m.intrinsic;
    in.shape = r.choice("medium.intrinsic.shape", detail::shape_names(), line_shape::delta);
    if (r.has("medium.intrinsic.fwhm_hz"))
        in.width = two_pi * r.number("medium.intrinsic.fwhm_hz");
    else
        in.width = r.number("medium.intrinsic.fwhm", 0.0);
    in.n_classes = r.integer("medium.intrinsic.classes", in.shape == line_shape::delta ? 1 : 41);
    in.truncation = r.number("medium.intrinsic.truncation", in.truncation);

    if (r.has("medium.orientations")) {
        const auto signs = r.integers("medium.orientations");
        std::vector<double> weights(signs.size(), signs.empty() ? 0.0 : 1.0 / static_cast<double>(signs.size()));
        if (r.has("medium.orientation_weights")) {
            weights = r.numbers("medium.orientation_weights");
            if (weights.size() != signs.size())
                throw config_error("medium.orientation_weights", "needs one weight per orientation");
        }
        m.orientations.clear();
        for (std::size_t k = 0; k < signs.size(); ++k)
            m.orientations.push_back({static_cast<int>(signs[k]), weights[k]});
    } else if (r.has("medium.orientation_weights")) {
        throw config_error("medium.orientation_weights", "only applies together with medium.orientations");
    }
    detail::validated("medium", [&] { m.validate(); });

    auto& p = sc.pulse;
    const std::vector<std::pair<std::string, pulse_shape>> pulse_names{{"gaussian", pulse_shape::gaussian},
                                                                       {"square", pulse_shape::square}};
    p.shape = r.choice("pulse.shape", pulse_names, pulse_shape::gaussian);
    p.t_pulse = r.number("pulse.duration", p.t_pulse);
    p.amplitude = {r.number("pulse.amplitude", 1.0), r.number("pulse.amplitude_imag", 0.0)};
    p.t_center = r.number("pulse.center", p.t_center);
    p.carrier_offset = r.number("pulse.carrier", 0.0);
    detail::validated("pulse.duration", [&] { p.validate(); });

    auto& g = sc.grid;
    g.n_z = r.integer("grid.n_z", g.n_z);
    g.dt = r.number("grid.dt", g.dt);
    g.t_start = r.number("grid.t_start", g.t_start);
    g.t_end = r.number("grid.t_end", g.t_end);
    g.store_stride = r.integer("grid.store_stride", g.store_stride);
    g.allow_unstable = r.boolean("grid.allow_unstable", false);
    if (r.has("grid.probe_cells"))
        for (auto c : r.integers("grid.probe_cells"))
            g.probe_cells.push_back(static_cast<int>(c));
    detail::validated("grid", [&] { g.validate(); });

    auto& pr = sc.protocol;
    if (r.has("protocol.flips")) {
        pr.flip_times.clear();
        if (r.raw("protocol.flips") != "none")
            pr.flip_times = r.numbers("protocol.flips");
    }
    pr.initial_sign = r.integer("protocol.initial_sign", 1);
    pr.cascade.enabled = r.boolean("cascade.enabled", false);
    pr.cascade.polarity = r.choice("cascade.polarity",
                                   std::vector<std::pair<std::string, stage_polarity>>{
                                       {"same", stage_polarity::same}, {"opposite", stage_polarity::opposite}},
                                   stage_polarity::same);
    if (r.has("cascade.flip_time") && r.raw("cascade.flip_time") != "auto")
        pr.cascade.flip_time = r.number("cascade.flip_time");
    detail::validated("protocol.flips", [&] { pr.validate(g); });
    if (pr.cascade.enabled && pr.flip_times.empty())
        throw config_error("cascade.enabled", "cascade needs protocol.flips");

    if (r.has("experiment.flip_marker") || r.has("experiment.broadening_ratio") || r.has("experiment.reference")) {
        ExperimentSettings ex;
        ex.flip_marker = r.number("experiment.flip_marker", pr.first_flip());
        ex.reference = r.boolean("experiment.reference", true);
        if (r.has("experiment.broadening_ratio")) {
            const double ratio = r.number("experiment.broadening_ratio");
            if (!(in.width > 0.0))
                throw config_error("experiment.broadening_ratio", "needs a nonzero intrinsic width");
            const double actual = 2.0 * m.half_bandwidth() / in.width;
            if (std::abs(actual - ratio) > 1e-6 * ratio)
                throw config_error("experiment.broadening_ratio",
                                   "disagrees with medium.bandwidth and intrinsic width (actual " +
                                       format_double(actual) + ")");
            ex.broadening_ratio = ratio;
        }
        cfg.experiment = ex;
    }

    cfg.validity_threshold = r.number("compare.validity_threshold", 2.0);

    if (r.has("sweep.key") != r.has("sweep.values"))
        throw config_error(r.has("sweep.key") ? "sweep.values" : "sweep.key", "sweep needs both key and values");
    if (r.has("sweep.key")) {
        SweepAxis axis;
        axis.key = r.raw("sweep.key");
        if (!detail::known_keys().contains(axis.key) || axis.key.starts_with("sweep.") || axis.key == "scenario")
            throw config_error("sweep.key", "'" + axis.key + "' cannot be swept");
        const auto& raw_values = r.raw("sweep.values");
        if (!raw_values.empty() && raw_values != "none")
            axis.values = detail::split_list(raw_values);
        cfg.sweep = axis;
    }
    return cfg;
}

/// Config for one sweep row: the base entries with the axis key replaced.
inline RunConfig sweep_row_config(const RunConfig& base, const std::string& value)
{
    if (!base.sweep)
        throw config_error("sweep.key", "no sweep axis configured");
    ConfigEntries layer{{base.sweep->key, {value, "sweep.values"}}};
    auto entries = merge_config(base.entries, layer);
    entries.erase("sweep.key");
    entries.erase("sweep.values");
    return resolve_config(entries);
}

/// Canonical text of a resolved configuration: every parameter explicit,
/// doubles in shortest round-trip form. Feeding it back reproduces the run.
inline std::string write_resolved(const RunConfig& cfg)
{
    const auto& sc = cfg.scenario;
    const auto& m = sc.medium;
    const auto& p = sc.pulse;
    const auto& g = sc.grid;
    const auto& pr = sc.protocol;
    const auto d = format_double;
    auto join = [](const auto& xs, auto fmt) {
        std::string s;
        for (const auto& x : xs)
            s += (s.empty() ? "" : ", ") + fmt(x);
        return s;
    };

    std::ostringstream o;
    o << "# resolved configuration; optical depth gN/eta = " << d(m.beta()) << "\n";
    o << "name = " << sc.name << "\n";
    o << "medium.g = " << d(m.g) << "\n";
    o << "medium.N = " << d(m.N) << "\n";
    o << "medium.gamma = " << d(m.gamma) << "\n";
    o << "medium.eta = " << d(m.eta) << "\n";
    o << "medium.z_half = " << d(m.z_half) << "\n";
    o << "medium.intrinsic.shape = " << detail::name_of(detail::shape_names(), m.intrinsic.shape) << "\n";
    o << "medium.intrinsic.fwhm = " << d(m.intrinsic.width) << "\n";
    o << "medium.intrinsic.classes = " << m.intrinsic.n_classes << "\n";
    o << "medium.intrinsic.truncation = " << d(m.intrinsic.truncation) << "\n";
    o << "medium.orientations = "
      << join(m.orientations, [](const Orientation& x) { return std::string(x.sign > 0 ? "+1" : "-1"); }) << "\n";
    o << "medium.orientation_weights = " << join(m.orientations, [&](const Orientation& x) { return d(x.weight); })
      << "\n";
    o << "pulse.shape = " << (p.shape == pulse_shape::square ? "square" : "gaussian") << "\n";
    o << "pulse.duration = " << d(p.t_pulse) << "\n";
    o << "pulse.amplitude = " << d(p.amplitude.real()) << "\n";
    o << "pulse.amplitude_imag = " << d(p.amplitude.imag()) << "\n";
    o << "pulse.center = " << d(p.t_center) << "\n";
    o << "pulse.carrier = " << d(p.carrier_offset) << "\n";
    o << "grid.n_z = " << g.n_z << "\n";
    o << "grid.dt = " << d(g.dt) << "\n";
    o << "grid.t_start = " << d(g.t_start) << "\n";
    o << "grid.t_end = " << d(g.t_end) << "\n";
    o << "grid.store_stride = " << g.store_stride << "\n";
    o << "grid.allow_unstable = " << (g.allow_unstable ? "true" : "false") << "\n";
    if (!g.probe_cells.empty())
        o << "grid.probe_cells = " << join(g.probe_cells, [](int c) { return std::to_string(c); }) << "\n";
    o << "protocol.flips = " << (pr.flip_times.empty() ? std::string("none") : join(pr.flip_times, d)) << "\n";
    o << "protocol.initial_sign = " << pr.initial_sign << "\n";
    o << "cascade.enabled = " << (pr.cascade.enabled ? "true" : "false") << "\n";
    o << "cascade.polarity = " << (pr.cascade.polarity == stage_polarity::same ? "same" : "opposite") << "\n";
    o << "cascade.flip_time = " << (pr.cascade.flip_time ? d(*pr.cascade.flip_time) : std::string("auto")) << "\n";
    if (cfg.experiment) {
        o << "experiment.flip_marker = " << d(cfg.experiment->flip_marker) << "\n";
        o << "experiment.reference = " << (cfg.experiment->reference ? "true" : "false") << "\n";
    }
    o << "compare.validity_threshold = " << d(cfg.validity_threshold) << "\n";
    if (cfg.sweep) {
        o << "sweep.key = " << cfg.sweep->key << "\n";
        o << "sweep.values = " << (cfg.sweep->values.empty() ? std::string("none") : join(cfg.sweep->values, [](const std::string& s) { return s; })) << "\n";
    }
    return o.str();
}

} // namespace gem
