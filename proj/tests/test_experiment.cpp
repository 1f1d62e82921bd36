#include <gem/experiment.hpp>

#include <catch_amalgamated.hpp>

using namespace gem;
using Catch::Approx;

namespace {

// Shorter grid for the sweeps below; the physics is unchanged.
ExperimentScenario coarse(ExperimentOverrides o = {})
{
    auto ex = build_experiment(o);
    ex.scenario.grid.n_z = 200;
    ex.scenario.grid.dt = 8e-9;
    return ex;
}

} // namespace

TEST_CASE("experiment defaults")
{
    const auto ex = build_experiment();
    const auto& m = ex.scenario.medium;
    CHECK(m.beta() == Approx(0.006).epsilon(1e-14));
    CHECK(ex.broadening_ratio == 200.0);
    CHECK(ex.applied_fwhm_hz == Approx(6e6));
    CHECK(2.0 * m.half_bandwidth() / m.intrinsic.width == Approx(200.0).epsilon(1e-12));
    CHECK(m.intrinsic.shape == line_shape::lorentzian);
    CHECK(m.intrinsic.n_classes == 41);
    REQUIRE(m.orientations.size() == 2);
    CHECK(m.orientations[0].weight == 0.5);
    CHECK(m.orientations[1].sign == -1);
    CHECK(ex.scenario.pulse.t_pulse == 1e-6);
    CHECK(ex.scenario.protocol.flip_times == std::vector<double>{0.0});
    CHECK(ex.trace_offset == 3.7e-6);
}

TEST_CASE("tied widths: consistent triples pass, contradictions throw")
{
    ExperimentOverrides o;
    o.applied_fwhm_hz = 3e6;
    o.broadening_ratio = 100.0;
    const auto a = build_experiment(o);
    CHECK(a.intrinsic_fwhm_hz == Approx(3e4));

    o.intrinsic_fwhm_hz = 3e4;
    CHECK_NOTHROW(build_experiment(o));
    o.intrinsic_fwhm_hz = 5e4;
    CHECK_THROWS_AS(build_experiment(o), invalid_parameter);

    ExperimentOverrides b;
    b.beta = 0.01;
    b.beta_factor = 3.0;
    CHECK_THROWS_AS(build_experiment(b), invalid_parameter);

    ExperimentOverrides c;
    c.intrinsic_fwhm_hz = 0.0;
    c.broadening_ratio = 50.0;
    CHECK_THROWS_AS(build_experiment(c), invalid_parameter);
}

TEST_CASE("a zero intrinsic width selects a delta line with the default applied width")
{
    ExperimentOverrides o;
    o.intrinsic_fwhm_hz = 0.0;
    const auto ex = build_experiment(o);
    CHECK(ex.scenario.medium.intrinsic.shape == line_shape::delta);
    CHECK(std::isinf(ex.broadening_ratio));
    CHECK(ex.applied_fwhm_hz == Approx(6e6));
}

TEST_CASE("beta factor scales the default depth")
{
    ExperimentOverrides o;
    o.beta_factor = 3.0;
    o.single_orientation = true;
    const auto ex = build_experiment(o);
    CHECK(ex.scenario.medium.beta() == Approx(0.018).epsilon(1e-14));
    CHECK(ex.scenario.medium.orientations.size() == 1);
}

TEST_CASE("reference trace is the input pulse and the split traces cover the output")
{
    const auto ex = coarse();
    const auto tr = run_experiment(ex);
    const auto& sc = ex.scenario;
    double peak = 0.0;
    for (double v : tr.reference)
        peak = std::max(peak, v);
    CHECK(peak == Approx(1.0).epsilon(1e-3));
    for (std::size_t k = 0; k < tr.time.size(); k += 50) {
        const double t = tr.time[k] - ex.trace_offset;
        CHECK(tr.reference[k] == Approx(std::norm(sc.pulse(t))).margin(1e-12));
        CHECK(tr.transmitted[k] * tr.echo[k] == 0.0);
    }
    // without coupling the output is the input, split at the flip
    CHECK(tr.reference_report.transmission + tr.reference_report.efficiency == Approx(1.0).epsilon(1e-12));
    CHECK(tr.report.efficiency > 0.0);
    CHECK(tr.report.efficiency + tr.report.transmission <= 1.0 + 1e-6);
}

TEST_CASE("relabelling the orientations leaves the detected traces unchanged")
{
    auto a = coarse();
    auto b = a;
    std::swap(b.scenario.medium.orientations[0], b.scenario.medium.orientations[1]);
    const auto ra = run_scenario(a.scenario);
    const auto rb = run_scenario(b.scenario);
    double peak = 0.0, worst = 0.0;
    for (std::size_t k = 0; k < ra.history.times.size(); ++k) {
        peak = std::max(peak, std::norm(ra.history.E_out[k]));
        worst = std::max(worst, std::abs(std::norm(ra.history.E_out[k]) - std::norm(rb.history.E_out[k])));
    }
    CHECK(worst <= 1e-12 * peak);
}

TEST_CASE("delta line with a single orientation reduces to the ideal memory")
{
    ExperimentOverrides o;
    o.intrinsic_fwhm_hz = 0.0;
    o.single_orientation = true;
    o.beta = 1.0;
    const auto ex = coarse(o);
    const auto full = run_scenario(ex.scenario);

    Scenario ideal = ex.scenario;
    ideal.medium.intrinsic = {};
    ideal.medium.orientations = {{+1, 1.0}};
    const auto r = run_scenario(ideal);
    REQUIRE(full.history.E_out == r.history.E_out);
    CHECK(full.report.families == 1);
}

TEST_CASE("wider intrinsic lines lower the efficiency")
{
    double previous = 2.0;
    for (double w : {0.0, 30e3, 60e3}) {
        ExperimentOverrides o;
        o.intrinsic_fwhm_hz = w;
        if (w > 0.0)
            o.applied_fwhm_hz = 6e6;
        const auto r = run_scenario(coarse(o).scenario).report;
        INFO("intrinsic FWHM = " << w);
        CHECK(r.efficiency < previous);
        previous = r.efficiency;
    }
}

TEST_CASE("deeper media raise the efficiency")
{
    double previous = -1.0;
    for (double beta : {0.006, 0.018, 0.06}) {
        ExperimentOverrides o;
        o.beta = beta;
        const auto r = run_scenario(coarse(o).scenario).report;
        INFO("beta = " << beta);
        CHECK(r.efficiency > previous);
        previous = r.efficiency;
    }
}
