#include <gem/scenario.hpp>

#include <catch_amalgamated.hpp>

using namespace gem;
using Catch::Approx;

namespace {

std::vector<double> uniform(double lo, double hi, double dt)
{
    std::vector<double> t;
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / dt));
    for (std::size_t k = 0; k <= n; ++k)
        t.push_back(lo + dt * static_cast<double>(k));
    return t;
}

complex gauss(double t, double centre)
{
    return {std::exp(-2.0 * std::numbers::ln2 * (t - centre) * (t - centre)), 0.0};
}

Scenario ideal_scenario()
{
    Scenario sc;
    sc.name = "ideal";
    sc.medium.eta = eta_from_broadening(2.0, broadening_convention::half_width_cyclic, 1.0);
    sc.medium.set_beta(3.3);
    return sc;
}

} // namespace

TEST_CASE("envelope fidelity: a perfect mirror scores 1 at lag 2 t0")
{
    const auto t = uniform(-8.0, 8.0, 0.005);
    std::vector<complex> in, echo;
    for (double x : t) {
        in.push_back(gauss(x, -4.0));
        echo.push_back(gauss(-x, -4.0) * std::polar(1.0, 3.0 * std::log(std::abs(x) + 1.0)));
    }
    const auto f = envelope_fidelity(t, echo, in);
    CHECK(f.value == Approx(1.0).epsilon(1e-12));
    CHECK(f.lag == Approx(8.0).margin(1e-6));
    CHECK(f.mirror_time == Approx(0.0).margin(1e-6));
}

TEST_CASE("envelope fidelity in forward mode recovers a delay")
{
    const auto t = uniform(-8.0, 8.0, 0.01);
    std::vector<complex> in, out;
    for (double x : t) {
        in.push_back(gauss(x, -4.0));
        out.push_back(0.3 * gauss(x, 2.5));
    }
    const auto f = envelope_fidelity(t, out, in, envelope_match::forward);
    CHECK(f.value == Approx(1.0).epsilon(1e-12));
    CHECK(f.lag == Approx(6.5).margin(1e-6));
}

TEST_CASE("envelope fidelity is below one for a distorted echo and rejects zero series")
{
    const auto t = uniform(-8.0, 8.0, 0.01);
    std::vector<complex> in, echo, zero(t.size());
    for (double x : t) {
        in.push_back(gauss(x, -4.0));
        echo.push_back(gauss(x, 3.0) + 0.5 * gauss(x, 5.0));
    }
    const auto f = envelope_fidelity(t, echo, in);
    CHECK(f.value < 0.99);
    CHECK(f.value > 0.0);
    CHECK_THROWS_AS(envelope_fidelity(t, zero, in), undefined_metric);
    CHECK_THROWS_AS(envelope_fidelity(t, in, zero), undefined_metric);
}

TEST_CASE("chirp estimate recovers a known logarithmic phase law within 1%")
{
    const double beta = 3.3;
    for (double t0 : {4.0, 40.0}) {
        const auto t = uniform(t0 - 3.0, t0 + 3.0, 0.005);
        std::vector<complex> v;
        for (double x : t)
            v.push_back(gauss(x, t0) * std::polar(1.0, 2.0 * beta * std::log(std::abs(x))));
        const auto c = chirp_estimate(t, v);
        INFO("t0 = " << t0);
        CHECK(c.frequency == Approx(2.0 * beta / t0).epsilon(0.01));
        CHECK(c.peak_time == Approx(t0).margin(1e-9));
    }
}

TEST_CASE("chirp estimate unwraps fast linear phase")
{
    const auto t = uniform(-3.0, 3.0, 0.01);
    std::vector<complex> v;
    for (double x : t)
        v.push_back(gauss(x, 0.0) * std::polar(1.0, 25.0 * x + 1.0));
    CHECK(chirp_estimate(t, v).frequency == Approx(25.0).epsilon(1e-10));
}

TEST_CASE("chirp estimate refuses weak or short signals")
{
    const auto t = uniform(-1.0, 1.0, 0.1);
    std::vector<complex> weak(t.size(), complex(1e-12, 0.0));
    CHECK_THROWS_AS(chirp_estimate(t, weak), undefined_metric);
    std::vector<double> t3{0.0, 1.0, 2.0};
    std::vector<complex> v3{1.0, 2.0, 1.0};
    CHECK_THROWS_AS(chirp_estimate(t3, v3), undefined_metric);
    std::vector<complex> spike(t.size());
    spike[10] = 1.0;
    CHECK_THROWS_AS(chirp_estimate(t, spike), undefined_metric);
}

TEST_CASE("efficiency: split at the flip with interpolation; zero input is undefined")
{
    SpaceTimeField h;
    h.times = {0.0, 1.0, 2.0};
    h.E_in = {1.0, 1.0, 1.0};
    h.E_out = {1.0, 1.0, 1.0};
    const auto te = efficiency(h, 0.5);
    CHECK(te.transmission == Approx(0.25));
    CHECK(te.efficiency == Approx(0.75));
    h.E_in = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(efficiency(h, 0.5), undefined_metric);
}

TEST_CASE("report on the ideal scenario")
{
    const auto r = run_scenario(ideal_scenario());
    const auto& rep = r.report;
    CHECK(rep.status == "ok");
    CHECK(rep.efficiency > 0.95);
    CHECK(rep.efficiency + rep.transmission <= 1.0 + 1e-6);
    CHECK(rep.echo_peak_time == Approx(4.0).margin(0.1));
    CHECK(rep.envelope_fidelity > 0.99);
    CHECK(rep.envelope_fidelity <= 1.0);
    CHECK(rep.fidelity_lag == Approx(8.0).margin(0.1));
    CHECK(rep.energy_residual < 1e-3);
    CHECK(rep.chirp_predicted == Approx(-2.0 * 3.3 / rep.echo_peak_time).epsilon(0.01));
    CHECK(rep.steps == 3200);
    CHECK(rep.families == 1);
    CHECK(rep.tbp_fwhm == Approx(4.0 * std::numbers::ln2 / two_pi).epsilon(1e-3));
}

TEST_CASE("report on a run without input is undefined, not a crash")
{
    auto sc = ideal_scenario();
    sc.pulse.amplitude = 0.0;
    const auto r = run_scenario(sc);
    CHECK(std::isnan(r.report.efficiency));
    CHECK(r.report.status.find("zero input") != std::string::npos);
}

TEST_CASE("photon-flux balance vanishes without coupling")
{
    auto sc = ideal_scenario();
    sc.medium.g = 0.0;
    const auto r = run_scenario(sc);
    const auto b = energy_balance(r.history, sc.medium);
    CHECK(b.max_abs == 0.0);
}

TEST_CASE("physical units: rescaling time and length leaves dimensionless metrics unchanged")
{
    auto sc = ideal_scenario();
    const auto a = run_scenario(sc).report;
    const double T = 1e-6, L = 5e-3;
    sc.medium.z_half = L;
    sc.medium.eta /= T * L;
    sc.medium.g /= T;
    sc.medium.set_beta(3.3);
    sc.pulse.t_pulse = T;
    sc.pulse.t_center *= T;
    sc.grid.dt *= T;
    sc.grid.t_start *= T;
    sc.grid.t_end *= T;
    const auto b = run_scenario(sc).report;
    CHECK(b.efficiency == Approx(a.efficiency).epsilon(1e-10));
    CHECK(b.echo_peak_time == Approx(a.echo_peak_time * T).epsilon(1e-10));
    CHECK(b.chirp_estimate == Approx(a.chirp_estimate / T).epsilon(1e-8));
    CHECK(b.energy_residual == Approx(a.energy_residual).margin(1e-12));
}

TEST_CASE("sweep: empty, ordered, error rows, thread-independent")
{
    const std::vector<double> none;
    auto fn = [](double beta) {
        auto sc = ideal_scenario();
        sc.grid.n_z = 60;
        sc.grid.dt = 0.01;
        if (beta < 0.0)
            throw invalid_parameter("negative depth");
        sc.medium.set_beta(beta);
        return run_scenario(sc).report;
    };
    CHECK(sweep<double>(none, fn).empty());

    const std::vector<double> betas{0.5, -1.0, 1.0, 2.0};
    const auto one = sweep<double>(betas, fn, 1);
    const auto many = sweep<double>(betas, fn, 3);
    REQUIRE(one.size() == 4);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(one[k].value == betas[k]);
        CHECK(many[k].value == betas[k]);
        CHECK(one[k].error == many[k].error);
        if (one[k].report)
            CHECK(one[k].report->efficiency == many[k].report->efficiency);
    }
    CHECK_FALSE(one[1].report.has_value());
    CHECK(one[1].error == "negative depth");
    CHECK(one[2].report->efficiency > one[0].report->efficiency);
}

TEST_CASE("decoherence sweep lowers the efficiency monotonically")
{
    double previous = 2.0;
    for (double gamma : {0.0, 0.05, 0.2, 0.5}) {
        auto sc = ideal_scenario();
        sc.medium.gamma = gamma;
        const auto r = run_scenario(sc).report;
        INFO("gamma = " << gamma);
        CHECK(r.efficiency < previous);
        CHECK(r.efficiency + r.transmission <= 1.0 + 1e-6);
        previous = r.efficiency;
    }
}

TEST_CASE("validity warnings flag an under-resolved grid")
{
    auto sc = ideal_scenario();
    CHECK(validity_warnings(run_scenario(sc)).empty());
    sc.grid.n_z = 20;
    CHECK_FALSE(validity_warnings(run_scenario(sc)).empty());
}

TEST_CASE("closed-form comparisons on the ideal scenario")
{
    const auto r = run_scenario(ideal_scenario());
    const auto e = compare_echo(r);
    CHECK(e.fidelity > 0.99);
    CHECK(e.envelope_rms < 0.05);
    CHECK(e.complex_overlap > 0.99);
    CHECK(e.chirp_solver * e.chirp_oracle > 0.0);

    auto sc = ideal_scenario();
    sc.grid.n_z = 300;
    const auto t = compare_transfer(sc);
    CHECK(t.max_log_error < 0.05);
    CHECK_FALSE(t.omega.empty());
}

TEST_CASE("cascade with the second stage disabled equals a single run")
{
    const auto c = run_cascade(ideal_scenario());
    CHECK_FALSE(c.stage2.has_value());
    CHECK(c.stage1.history.E_out == run_scenario(ideal_scenario()).history.E_out);
}
