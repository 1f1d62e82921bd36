#pragma once

#include <gem/analysis.hpp>
#include <gem/csv.hpp>

namespace gem {

/// Everything needed for one run, in the user's units. The solver works in
/// units of pulse duration and sample half-length; results come back in the
/// scenario's units.
struct Scenario
{
    std::string name;
    MediumParams medium;
    PulseSpec pulse;
    GridSpec grid;
    Protocol protocol;
};

struct ScenarioResult
{
    Scenario scenario;
    ScaledSystem natural;
    SpaceTimeField history;
    RunReport report;
};

namespace detail {

inline void to_physical(SpaceTimeField& h, const Scales& s)
{
    h.dt *= s.time;
    for (double& t : h.times)
        t *= s.time;
    for (double& z : h.z_nodes)
        z *= s.length;
    for (double& z : h.z_cells)
        z *= s.length;
    for (double& q : h.stored_energy)
        q *= s.length;
    for (auto& snap : h.snapshots)
        snap.t *= s.time;
    for (auto& snap : h.flip_snapshots)
        snap.t *= s.time;
    for (auto& p : h.probes)
        p.z *= s.length;
}

} // namespace detail

inline ScenarioResult run_scenario(const Scenario& sc)
{
    sc.grid.validate();
    sc.protocol.validate(sc.grid);
    ScenarioResult out;
    out.scenario = sc;
    out.natural = nondimensionalize(sc.medium, sc.pulse);
    const auto& s = out.natural.scales;
    const MaxwellBlochSolver solver(out.natural.medium, out.natural.pulse, s.to_natural(sc.protocol),
                                    s.to_natural(sc.grid));
    out.history = solver.run();
    detail::to_physical(out.history, s);
    out.report = make_report(out.history, sc.medium, sc.protocol, sc.grid, solver.families());
    return out;
}

/// Conditions under which the run is numerically or physically suspect.
/// Empty means no warning.
inline std::vector<std::string> validity_warnings(const ScenarioResult& r)
{
    std::vector<std::string> out;
    const auto& m = r.natural.medium;
    const auto& p = r.natural.pulse;
    const double T = r.natural.scales.time;
    const double h = 2.0 * m.z_half / static_cast<double>(r.scenario.grid.n_z);
    const double window = (r.scenario.grid.t_end - r.scenario.grid.t_start) / T;
    const double flip = r.scenario.protocol.first_flip() / T;
    if (std::isfinite(flip) && p.shape != pulse_shape::sampled) {
        // spatial frequency of the earliest stored part of the input
        const double k = m.eta * std::max(0.0, flip - (p.t_center - 1.5 * p.t_pulse));
        if (k * h > 1.0)
            out.push_back("grid.n_z under-resolves the stored field (k*h = " + format_double(k * h) + " > 1)");
    }
    const double recurrence = two_pi / (m.eta * h);
    if (window > 0.5 * recurrence)
        out.push_back("window exceeds half the discrete-gradient recurrence time " + format_double(recurrence * T));
    const auto& rep = r.report;
    if (r.scenario.medium.gamma >= 0.0 && rep.efficiency + rep.transmission > 1.0 + 1e-6)
        out.push_back("efficiency + transmission exceeds 1");
    if (rep.energy_residual > 1e-3)
        out.push_back("photon-flux balance residual " + format_double(rep.energy_residual) + " exceeds 1e-3");
    if (rep.status != "ok")
        out.push_back("report: " + rep.status);
    return out;
}

//
// Oracle comparisons (all in natural units)
//

namespace detail {

inline int flip_direction(const Scenario& sc)
{
    return sc.protocol.initial_sign * sc.medium.orientations.front().sign;
}

inline std::vector<double> natural_times(const ScenarioResult& r)
{
    std::vector<double> t(r.history.times);
    for (double& v : t)
        v /= r.natural.scales.time;
    return t;
}

} // namespace detail

struct EchoComparison
{
    std::vector<double> times; // natural units, flip at the scenario's first flip
    std::vector<complex> solver;
    std::vector<complex> oracle;
    double envelope_rms = nan;   // RMS of |solver| - |oracle| over the echo support, / peak |oracle|
    double complex_overlap = nan; // |<oracle, solver>| / norms over the same support
    double overlap_phase = nan;   // arg <oracle, solver>
    double fidelity = nan;
    double chirp_solver = nan;
    double chirp_oracle = nan;
};

/// Post-flip output against the large-depth input-output map (single flip,
/// first orientation's detuning direction).
inline EchoComparison compare_echo(const ScenarioResult& r, double support = 1e-3)
{
    const auto& sc = r.scenario;
    const double T = r.natural.scales.time;
    const double flip = sc.protocol.first_flip() / T;
    if (!std::isfinite(flip))
        throw invalid_parameter("echo comparison needs a flip");
    const auto t = detail::natural_times(r);
    const auto pulse = r.natural.pulse;
    const oracle::signal shifted = [pulse, flip](double s) { return pulse(s + flip); };

    EchoComparison out;
    std::vector<double> rel;
    for (std::size_t k = 0; k < t.size(); ++k)
        if (t[k] > flip) {
            out.times.push_back(t[k]);
            out.solver.push_back(r.history.E_out[k]);
            rel.push_back(t[k] - flip);
        }
    out.oracle = oracle::output_map(shifted, r.natural.medium, rel, detail::flip_direction(sc)).values;

    double peak = 0.0;
    for (const auto& v : out.oracle)
        peak = std::max(peak, std::abs(v));
    if (!(peak > 0.0))
        throw undefined_metric("oracle echo is identically zero");
    double sq = 0.0, n_sup = 0.0, no = 0.0, ns = 0.0;
    complex dot{};
    for (std::size_t k = 0; k < out.times.size(); ++k) {
        const double a = std::abs(out.oracle[k]), b = std::abs(out.solver[k]);
        if (std::max(a, b) < support * peak)
            continue;
        sq += (a - b) * (a - b);
        n_sup += 1.0;
        dot += std::conj(out.oracle[k]) * out.solver[k];
        no += a * a;
        ns += b * b;
    }
    out.envelope_rms = std::sqrt(sq / n_sup) / peak;
    out.complex_overlap = std::abs(dot) / std::sqrt(no * ns);
    out.overlap_phase = std::arg(dot);

    std::vector<complex> echo(t.size()), input(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        echo[k] = t[k] > flip ? r.history.E_out[k] : complex{};
        input[k] = r.history.E_in[k];
    }
    out.fidelity = envelope_fidelity(t, echo, input).value;
    out.chirp_solver = chirp_estimate(out.times, out.solver).frequency;
    out.chirp_oracle = chirp_estimate(out.times, out.oracle).frequency;
    return out;
}

struct TransferComparison
{
    std::vector<double> omega; // natural units
    std::vector<double> solver_log;
    std::vector<double> oracle_log;
    double max_log_error = nan; // max |ln|T_s| - ln|T_o|| / |ln|T_o||
};

/// Transmitted spectrum of a flip-free run against the spectral transfer
/// function at z0. The band keeps frequencies whose input amplitude is at
/// least `band_level` of its peak and that stay inside 80% of the applied
/// broadening.
inline TransferComparison compare_transfer(const Scenario& sc, std::size_t n_omega = 200,
                                           double band_level = 0.25)
{
    Scenario flat = sc;
    flat.protocol.flip_times.clear();
    const auto r = run_scenario(flat);
    const auto t = detail::natural_times(r);
    const auto& m = r.natural.medium;

    const double edge = 0.8 * m.half_bandwidth();
    const double centre = r.natural.pulse.carrier_offset;
    const auto grid = half_offset_grid(centre - edge, centre + edge, n_omega);
    const auto Fin = temporal_spectrum(t, r.history.E_in, grid);
    const auto Fout = temporal_spectrum(t, r.history.E_out, grid);
    double peak = 0.0;
    for (const auto& v : Fin)
        peak = std::max(peak, std::abs(v));

    TransferComparison out;
    std::vector<double> band;
    std::vector<complex> band_in, band_out;
    for (std::size_t k = 0; k < grid.size(); ++k)
        if (std::abs(Fin[k]) >= band_level * peak && std::abs(grid[k]) < edge) {
            band.push_back(grid[k]);
            band_in.push_back(Fin[k]);
            band_out.push_back(Fout[k]);
        }
    if (band.empty())
        throw undefined_metric("no input spectrum inside the applied broadening");
    const auto pred = oracle::spectral_transfer(band, band_in, m.z_half, m);
    out.max_log_error = 0.0;
    for (std::size_t k = 0; k < band.size(); ++k) {
        const double s = std::log(std::abs(band_out[k]) / std::abs(band_in[k]));
        const double o = std::log(pred.attenuation[k]);
        out.omega.push_back(band[k]);
        out.solver_log.push_back(s);
        out.oracle_log.push_back(o);
        const double scale = std::abs(o) > 0.0 ? std::abs(o) : 1.0;
        out.max_log_error = std::max(out.max_log_error, std::abs(s - o) / scale);
    }
    return out;
}

struct KSpaceComparison
{
    std::vector<double> k; // natural units
    std::vector<double> solver;
    std::vector<double> oracle;
    double correlation = nan;
    double ratio = nan; // applied broadening / pulse bandwidth
    bool valid = true;
    std::string warning;
};

/// Spatial spectrum of E at the first flip against the stored-field formula,
/// over k/eta within 2.5 pulse durations of the input's mirror image.
inline KSpaceComparison compare_kspace(const ScenarioResult& r, std::size_t n_k = 400)
{
    const auto& h = r.history;
    if (h.flip_snapshots.empty())
        throw invalid_parameter("k-space comparison needs a flip inside the window");
    const auto& m = r.natural.medium;
    const auto& p = r.natural.pulse;
    const double flip = h.flip_snapshots.front().t / r.natural.scales.time;
    const double c = p.t_center - flip;
    const double lo = std::max(1e-3, -c - 2.5 * p.t_pulse);
    const double hi = -c + 2.5 * p.t_pulse;
    if (!(hi > lo))
        throw invalid_parameter("input lies after the flip; no stored field to compare");

    std::vector<double> z(h.z_nodes);
    for (double& v : z)
        v /= r.natural.scales.length;
    std::vector<double> ks(n_k);
    for (std::size_t k = 0; k < n_k; ++k)
        ks[k] = m.eta * (lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n_k - 1));

    const auto Ek = spatial_spectrum(z, h.flip_snapshots.front().E, ks);
    const oracle::signal shifted = [p, flip](double s) { return p(s + flip); };
    const auto pred = oracle::flip_time_field(shifted, m, ks, p.t_pulse);

    KSpaceComparison out;
    out.k = ks;
    for (std::size_t k = 0; k < n_k; ++k) {
        out.solver.push_back(std::abs(Ek[k]));
        out.oracle.push_back(std::abs(pred.value[k]));
    }
    out.correlation = pearson(out.solver, out.oracle);
    out.ratio = pred.ratio;
    out.valid = pred.valid;
    out.warning = pred.warning;
    return out;
}

//
// Two memories in series
//

struct CascadeResult
{
    ScenarioResult stage1;
    std::optional<ScenarioResult> stage2;
    double stage2_flip = nan; // stage-1 clock
    double forward_fidelity = nan;
    double forward_lag = nan;
    double complex_overlap = nan;
    double chirp_stage1 = nan;
    double chirp_final = nan;
    double residual_chirp_ratio = nan;
    double end_to_end_efficiency = nan;
};

/// Runs the scenario, then feeds the whole output at z0 into an identical
/// second memory whose own flip falls at `stage2_flip` in the first clock.
/// With the cascade disabled only the first stage runs.
inline CascadeResult run_cascade(const Scenario& sc)
{
    CascadeResult out;
    out.stage1 = run_scenario(sc);
    const auto& h1 = out.stage1.history;
    if (!sc.protocol.cascade.enabled)
        return out;

    const double f1 = sc.protocol.first_flip();
    if (!std::isfinite(f1))
        throw invalid_parameter("cascade needs a flip in the first stage");
    const double c = detail::intensity_centroid(h1.times, h1.E_in);
    out.stage2_flip = sc.protocol.cascade.flip_time.value_or(3.0 * f1 - 2.0 * c);
    // stage-2 clock: its first flip happens at f1, like the first stage
    const double shift = out.stage2_flip - f1;

    Scenario s2 = sc;
    s2.name = sc.name + "/stage2";
    s2.protocol.cascade = {};
    if (sc.protocol.cascade.polarity == stage_polarity::opposite)
        s2.protocol.initial_sign = -sc.protocol.initial_sign;
    s2.pulse = PulseSpec{};
    s2.pulse.shape = pulse_shape::sampled;
    s2.pulse.t_pulse = sc.pulse.t_pulse;
    s2.pulse.t_center = 0.0;
    for (std::size_t k = 0; k < h1.times.size(); ++k) {
        s2.pulse.sample_times.push_back(h1.times[k] - shift);
        s2.pulse.sample_values.push_back(h1.E_out[k]);
    }
    out.stage2 = run_scenario(s2);
    const auto& h2 = out.stage2->history;

    // final echo on the stage-2 grid, input on the stage-1 grid; both grids
    // share index spacing, so index lags convert by `shift`
    std::vector<complex> echo(h2.times.size());
    std::vector<double> et;
    std::vector<complex> ev;
    for (std::size_t k = 0; k < h2.times.size(); ++k)
        if (h2.times[k] > f1) {
            echo[k] = h2.E_out[k];
            et.push_back(h2.times[k]);
            ev.push_back(h2.E_out[k]);
        }
    const auto fwd = envelope_fidelity(h1.times, echo, h1.E_in, envelope_match::forward);
    out.forward_fidelity = fwd.value;
    out.forward_lag = fwd.lag + shift;

    // complex overlap against the input delayed by the fitted lag
    complex dot{};
    double ne = 0.0, ni = 0.0;
    for (std::size_t k = 0; k < et.size(); ++k) {
        const complex ref = sc.pulse(et[k] + shift - out.forward_lag);
        dot += std::conj(ref) * ev[k];
        ne += std::norm(ev[k]);
        ni += std::norm(ref);
    }
    out.complex_overlap = std::abs(dot) / std::sqrt(ne * ni);

    try {
        std::vector<double> t1;
        std::vector<complex> v1;
        for (std::size_t k = 0; k < h1.times.size(); ++k)
            if (h1.times[k] > f1) {
                t1.push_back(h1.times[k]);
                v1.push_back(h1.E_out[k]);
            }
        out.chirp_stage1 = chirp_estimate(t1, v1).frequency;
        out.chirp_final = chirp_estimate(et, ev).frequency;
        out.residual_chirp_ratio = std::abs(out.chirp_final / out.chirp_stage1);
    } catch (const undefined_metric&) {
    }
    const double e_in = out.stage1.report.input_energy;
    out.end_to_end_efficiency = out.stage2->report.echo_energy / e_in;
    return out;
}

} // namespace gem
