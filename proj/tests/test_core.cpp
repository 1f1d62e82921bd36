#include <gem/core.hpp>
#include <gem/spectral.hpp>

#include <catch_amalgamated.hpp>

using namespace gem;
using Catch::Approx;

TEST_CASE("delta intrinsic line is a single unshifted class")
{
    const auto c = discretize_line({});
    REQUIRE(c.offsets == std::vector<double>{0.0});
    REQUIRE(c.weights == std::vector<double>{1.0});

    IntrinsicLineModel one{line_shape::lorentzian, 2.0, 1, 10.0};
    REQUIRE(discretize_line(one).offsets.size() == 1);
}

TEST_CASE("lorentzian classes are symmetric, normalized and follow the line")
{
    const IntrinsicLineModel m{line_shape::lorentzian, 1.0, 41, 10.0};
    const auto c = discretize_line(m);
    REQUIRE(c.offsets.size() == 41);
    double total = 0.0;
    for (std::size_t k = 0; k < 41; ++k) {
        total += c.weights[k];
        CHECK(c.offsets[k] == -c.offsets[40 - k]);
        CHECK(c.weights[k] == c.weights[40 - k]);
    }
    CHECK(total == Approx(1.0).epsilon(1e-14));
    CHECK(c.offsets[20] == 0.0);
    CHECK(c.offsets.back() == Approx(10.0 - 10.0 / 41.0));
    // centre bin holds the mass of [-10/41, 10/41] of a unit-FWHM lorentzian
    const double truncated = 2.0 * std::atan(20.0) / pi;
    CHECK(c.weights[20] == Approx(2.0 * std::atan(2.0 * 10.0 / 41.0) / pi / truncated).epsilon(1e-12));
}

TEST_CASE("gaussian classes integrate the gaussian line")
{
    const IntrinsicLineModel m{line_shape::gaussian, 2.0, 5, 1.0};
    const auto c = discretize_line(m);
    double mean = 0.0;
    for (std::size_t k = 0; k < 5; ++k)
        mean += c.weights[k] * c.offsets[k];
    CHECK(mean == Approx(0.0).margin(1e-15));
    CHECK(c.weights[2] > c.weights[1]);
    CHECK(c.weights[1] > c.weights[0]);
}

TEST_CASE("intrinsic line validation")
{
    CHECK_THROWS_AS(discretize_line({line_shape::lorentzian, 0.0, 5, 10.0}), invalid_parameter);
    CHECK_THROWS_AS(discretize_line({line_shape::lorentzian, 1.0, 0, 10.0}), invalid_parameter);
    CHECK_THROWS_AS(discretize_line({line_shape::lorentzian, 1.0, 5, 0.0}), invalid_parameter);
    CHECK_THROWS_AS(discretize_line({line_shape::lorentzian, -1.0, 1, 10.0}), invalid_parameter);
}

TEST_CASE("broadening conventions map to the half-width eta*z0")
{
    CHECK(eta_from_broadening(2.0, broadening_convention::half_width_cyclic, 1.0) == Approx(4.0 * pi));
    CHECK(eta_from_broadening(2.0, broadening_convention::half_width_angular, 1.0) == Approx(2.0));
    CHECK(eta_from_broadening(2.0, broadening_convention::full_width_cyclic, 1.0) == Approx(2.0 * pi));
    CHECK(eta_from_broadening(2.0, broadening_convention::full_width_angular, 1.0) == Approx(1.0));
    CHECK(eta_from_broadening(2.0, broadening_convention::full_width_angular, 4.0) == Approx(0.25));
}

TEST_CASE("optical depth is gN/eta")
{
    MediumParams m;
    m.g = 2.0;
    m.eta = 3.0;
    m.set_beta(3.3);
    CHECK(m.N == Approx(3.3 * 3.0 / 2.0));
    CHECK(m.beta() == Approx(3.3));
    m.g = 0.0;
    CHECK_THROWS_AS(m.set_beta(1.0), invalid_parameter);
}

TEST_CASE("medium validation rejects unphysical parameters")
{
    auto bad = [](auto edit) {
        MediumParams m;
        edit(m);
        return m;
    };
    CHECK_NOTHROW(MediumParams{}.validate());
    CHECK_THROWS_AS(bad([](auto& m) { m.eta = 0.0; }).validate(), invalid_parameter);
    CHECK_THROWS_AS(bad([](auto& m) { m.z_half = -1.0; }).validate(), invalid_parameter);
    CHECK_THROWS_AS(bad([](auto& m) { m.gamma = -0.1; }).validate(), invalid_parameter);
    CHECK_THROWS_AS(bad([](auto& m) { m.N = -1.0; }).validate(), invalid_parameter);
    CHECK_THROWS_AS(bad([](auto& m) { m.orientations = {{+1, 0.5}, {-1, 0.4}}; }).validate(), invalid_parameter);
    CHECK_THROWS_AS(bad([](auto& m) { m.orientations = {{+2, 1.0}}; }).validate(), invalid_parameter);
    CHECK_THROWS_AS(bad([](auto& m) { m.orientations.clear(); }).validate(), invalid_parameter);
}

TEST_CASE("gaussian pulse: t_pulse is the intensity FWHM and energy is exact")
{
    PulseSpec p;
    p.t_pulse = 0.7;
    p.t_center = 0.3;
    p.amplitude = {0.0, 2.0};
    std::vector<double> t;
    for (int k = 0; k <= 8000; ++k)
        t.push_back(-4.0 + 8.0 * k / 8000.0);
    const auto v = sample_pulse(p, t);
    std::vector<double> inten;
    for (const auto& x : v)
        inten.push_back(std::norm(x));
    CHECK(fwhm(t, inten) == Approx(0.7).epsilon(1e-6));
    CHECK(trapezoid(t, inten) == Approx(p.energy()).epsilon(1e-10));
    CHECK(p(0.3) == complex(0.0, 2.0));
    CHECK(*p.spectral_fwhm() == Approx(4.0 * std::numbers::ln2 / 0.7));
}

TEST_CASE("carrier offset multiplies by a phase ramp")
{
    PulseSpec p;
    p.carrier_offset = 1.5;
    CHECK(std::abs(p(-3.0)) == Approx(std::abs(p.envelope(-3.0).real())));
    CHECK(std::arg(p(-3.5)) == Approx(std::remainder(-3.5 * 1.5, two_pi)));
}

TEST_CASE("square pulse")
{
    PulseSpec p;
    p.shape = pulse_shape::square;
    p.t_pulse = 2.0;
    p.t_center = 0.0;
    CHECK(p(0.99) == complex(1.0, 0.0));
    CHECK(p(1.01) == complex(0.0, 0.0));
    CHECK(p.energy() == 2.0);
    CHECK_FALSE(p.spectral_fwhm().has_value());
}

TEST_CASE("sampled pulse interpolates cubics exactly and vanishes outside")
{
    PulseSpec p;
    p.shape = pulse_shape::sampled;
    auto f = [](double t) { return complex(t * t * t - 2.0 * t, 0.5 * t * t); };
    for (int k = 0; k <= 10; ++k) {
        const double t = -1.0 + 0.2 * k + 0.01 * (k % 3);
        p.sample_times.push_back(t);
        p.sample_values.push_back(f(t));
    }
    for (double t : {-0.95, -0.33, 0.0, 0.41, 0.99}) {
        CHECK(p(t).real() == Approx(f(t).real()).margin(1e-12));
        CHECK(p(t).imag() == Approx(f(t).imag()).margin(1e-12));
    }
    CHECK(p(-1.5) == complex{});
    CHECK(p(2.0) == complex{});

    std::swap(p.sample_times[3], p.sample_times[4]);
    CHECK_THROWS_AS(p.validate(), invalid_parameter);
}

TEST_CASE("pulse validation")
{
    PulseSpec p;
    p.t_pulse = 0.0;
    CHECK_THROWS_AS(p.validate(), invalid_parameter);
    PulseSpec s;
    s.shape = pulse_shape::sampled;
    CHECK_THROWS_AS(s.validate(), invalid_parameter);
}

TEST_CASE("grid and protocol validation")
{
    GridSpec g;
    CHECK(g.n_steps() == 3200);
    g.n_z = 1;
    CHECK_THROWS_AS(g.validate(), invalid_parameter);
    g = {};
    g.dt = 0.0;
    CHECK_THROWS_AS(g.validate(), invalid_parameter);
    g = {};
    g.t_start = 1.0;
    CHECK_THROWS_AS(g.validate(), invalid_parameter);
    g = {};
    g.probe_cells = {200};
    CHECK_THROWS_AS(g.validate(), invalid_parameter);

    Protocol p;
    CHECK(p.first_flip() == 0.0);
    p.flip_times = {1.0, 0.5};
    CHECK_THROWS_AS(p.validate(GridSpec{}), invalid_parameter);
    p.flip_times = {9.0};
    CHECK_THROWS_AS(p.validate(GridSpec{}), invalid_parameter);
    p.flip_times = {};
    CHECK(std::isinf(p.first_flip()));
    p.initial_sign = 0;
    CHECK_THROWS_AS(p.validate(GridSpec{}), invalid_parameter);
}

TEST_CASE("nondimensionalization round-trips and keeps the optical depth")
{
    MediumParams m;
    m.g = 3.0;
    m.eta = eta_from_broadening(6e6, broadening_convention::full_width_cyclic, 2e-3);
    m.z_half = 2e-3;
    m.gamma = 1e4;
    m.intrinsic = {line_shape::lorentzian, two_pi * 3e4, 41, 10.0};
    m.set_beta(0.006);
    PulseSpec p;
    p.t_pulse = 1e-6;
    p.t_center = -1.5e-6;
    p.carrier_offset = 2e6;

    const auto sys = nondimensionalize(m, p);
    CHECK(sys.pulse.t_pulse == 1.0);
    CHECK(sys.medium.z_half == 1.0);
    CHECK(sys.medium.beta() == Approx(0.006).epsilon(1e-14));
    CHECK(sys.medium.half_bandwidth() == Approx(m.half_bandwidth() * 1e-6).epsilon(1e-14));
    CHECK(sys.medium.gamma == Approx(1e-2));
    CHECK(sys.pulse.carrier_offset == Approx(2.0));

    const auto [m2, p2] = redimensionalize(sys);
    CHECK(m2.g == Approx(m.g).epsilon(1e-14));
    CHECK(m2.N == Approx(m.N).epsilon(1e-14));
    CHECK(m2.eta == Approx(m.eta).epsilon(1e-14));
    CHECK(m2.intrinsic.width == Approx(m.intrinsic.width).epsilon(1e-14));
    CHECK(p2.t_center == Approx(p.t_center).epsilon(1e-14));

    p.t_pulse = 0.0;
    CHECK_THROWS_AS(nondimensionalize(m, p), invalid_parameter);
}
