#pragma once

#include <gem/scenario.hpp>

namespace gem {

/// Praseodymium-style demonstration in SI units (seconds, metres, rad/s).
/// Two Stark orientations share the flip; a 30 kHz lorentzian antihole
/// stays fixed under the flip; the applied broadening is 200 times wider.
struct ExperimentDefaults
{
    double beta = 0.006;
    double intrinsic_fwhm_hz = 30e3;
    double broadening_ratio = 200.0; // applied full width / intrinsic FWHM
    double z_half = 2e-3;
    double pulse_duration = 1e-6;   // fitted
    double pulse_center = -1.5e-6;  // fitted, flip at t = 0
    double flip_marker = 3.7e-6;    // trace time of the flip
    int n_classes = 41;
    double truncation = 10.0;
    int n_z = 400;
    double dt = 4e-9;
};

struct ExperimentOverrides
{
    std::optional<double> beta;
    std::optional<double> beta_factor;
    std::optional<bool> single_orientation;
    std::optional<double> intrinsic_fwhm_hz; // 0 selects a delta line
    std::optional<double> applied_fwhm_hz;
    std::optional<double> broadening_ratio;
    std::optional<double> pulse_duration;
    std::optional<double> pulse_center;
    std::optional<double> gamma;
};

struct ExperimentScenario
{
    Scenario scenario;
    double broadening_ratio = 0.0;
    double intrinsic_fwhm_hz = 0.0;
    double applied_fwhm_hz = 0.0;
    double trace_offset = 0.0; // added to simulation time for display
};

/// Fills the scenario from the defaults and the overrides. Intrinsic width,
/// applied width and their ratio are tied; fixing all three inconsistently
/// is an error.
inline ExperimentScenario build_experiment(const ExperimentOverrides& o = {}, const ExperimentDefaults& d = {})
{
    double intrinsic = o.intrinsic_fwhm_hz.value_or(d.intrinsic_fwhm_hz);
    double ratio = o.broadening_ratio.value_or(d.broadening_ratio);
    double applied = 0.0;
    if (o.applied_fwhm_hz && o.broadening_ratio && o.intrinsic_fwhm_hz) {
        if (std::abs(*o.applied_fwhm_hz - ratio * intrinsic) > 1e-9 * *o.applied_fwhm_hz)
            throw invalid_parameter("experiment: applied width, intrinsic width and broadening ratio disagree");
        applied = *o.applied_fwhm_hz;
    } else if (o.applied_fwhm_hz && o.broadening_ratio) {
        applied = *o.applied_fwhm_hz;
        intrinsic = applied / ratio;
    } else if (o.applied_fwhm_hz) {
        applied = *o.applied_fwhm_hz;
        ratio = intrinsic > 0.0 ? applied / intrinsic : std::numeric_limits<double>::infinity();
    } else if (intrinsic > 0.0) {
        applied = ratio * intrinsic;
    } else {
        if (o.broadening_ratio)
            throw invalid_parameter("experiment: a broadening ratio needs a nonzero intrinsic width");
        // delta line: keep the default geometry
        applied = d.broadening_ratio * d.intrinsic_fwhm_hz;
        ratio = std::numeric_limits<double>::infinity();
    }
    if (!(applied > 0.0) || intrinsic < 0.0)
        throw invalid_parameter("experiment: widths must be positive");
    if (o.beta && o.beta_factor)
        throw invalid_parameter("experiment: set either beta or beta_factor, not both");

    ExperimentScenario out;
    out.broadening_ratio = ratio;
    out.intrinsic_fwhm_hz = intrinsic;
    out.applied_fwhm_hz = applied;

    auto& sc = out.scenario;
    sc.name = "experiment";
    auto& m = sc.medium;
    m.z_half = d.z_half;
    m.eta = eta_from_broadening(applied, broadening_convention::full_width_cyclic, d.z_half);
    m.gamma = o.gamma.value_or(0.0);
    if (intrinsic > 0.0) {
        m.intrinsic.shape = line_shape::lorentzian;
        m.intrinsic.width = two_pi * intrinsic;
        m.intrinsic.n_classes = d.n_classes;
        m.intrinsic.truncation = d.truncation;
    }
    if (o.single_orientation.value_or(false))
        m.orientations = {{+1, 1.0}};
    else
        m.orientations = {{+1, 0.5}, {-1, 0.5}};
    m.set_beta(o.beta.value_or(d.beta) * o.beta_factor.value_or(1.0));

    auto& p = sc.pulse;
    p.t_pulse = o.pulse_duration.value_or(d.pulse_duration);
    p.t_center = o.pulse_center.value_or(d.pulse_center);

    sc.grid.n_z = d.n_z;
    sc.grid.dt = d.dt;
    sc.grid.t_start = p.t_center - 3.0 * p.t_pulse;
    sc.grid.t_end = -p.t_center + 4.0 * p.t_pulse;
    sc.grid.store_stride = 25;
    sc.protocol.flip_times = {0.0};
    out.trace_offset = d.flip_marker;

    m.validate();
    p.validate();
    sc.grid.validate();
    sc.protocol.validate(sc.grid);
    return out;
}

struct ExperimentTraces
{
    std::vector<double> time; // display time, flip at the marker
    std::vector<double> reference;
    std::vector<double> transmitted;
    std::vector<double> echo;
    RunReport report;
    RunReport reference_report;
};

/// Traces from an already computed full run and its g = 0 reference.
inline ExperimentTraces make_traces(const ScenarioResult& full, const ScenarioResult& ref, double flip_marker)
{
    ExperimentTraces out;
    out.report = full.report;
    out.reference_report = ref.report;
    double peak = 0.0;
    for (const auto& e : ref.history.E_out)
        peak = std::max(peak, std::norm(e));
    if (!(peak > 0.0))
        throw undefined_metric("reference trace is zero");
    const double flip = full.scenario.protocol.first_flip();
    const double offset = flip_marker - flip;
    for (std::size_t k = 0; k < full.history.times.size(); ++k) {
        const double t = full.history.times[k];
        const double i = std::norm(full.history.E_out[k]) / peak;
        out.time.push_back(t + offset);
        out.reference.push_back(std::norm(ref.history.E_out[k]) / peak);
        out.transmitted.push_back(t <= flip ? i : 0.0);
        out.echo.push_back(t > flip ? i : 0.0);
    }
    return out;
}

inline ScenarioResult run_reference(const Scenario& sc)
{
    Scenario bypass = sc;
    bypass.name = sc.name + "/reference";
    bypass.medium.g = 0.0;
    return run_scenario(bypass);
}

/// Detected |E(z0, t)|^2 for the bypassed medium (g = 0) and for the full run
/// split at the flip, all normalized to the reference peak.
inline ExperimentTraces run_experiment(const ExperimentScenario& ex)
{
    return make_traces(run_scenario(ex.scenario), run_reference(ex.scenario), ex.trace_offset);
}

} // namespace gem
