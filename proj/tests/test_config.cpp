#include <gem/config.hpp>

#include <catch_amalgamated.hpp>

using namespace gem;
using Catch::Approx;

namespace {

const std::vector<std::string> presets{"fig1_ideal",       "fig2_short_storage", "fig2_long_storage",
                                       "fig4_experiment",  "fig4_improved",      "fig4_fitted_depth",
                                       "fig4_fitted_improved", "cascade_demo"};

std::string error_key(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const config_error& e) {
        return e.key();
    }
    return "<no error>";
}

} // namespace

TEST_CASE("parser: comments, blanks, whitespace and origins")
{
    const auto e = parse_config("# top\n\n  medium.g = 2   # trailing\nname=x\r\n", "file.cfg");
    REQUIRE(e.size() == 2);
    CHECK(e.at("medium.g").value == "2");
    CHECK(e.at("medium.g").origin == "file.cfg:3");
    CHECK(e.at("name").value == "x");
}

TEST_CASE("parser rejects malformed, unknown and duplicate keys")
{
    CHECK_THROWS_AS(parse_config("medium.g 2"), config_error);
    CHECK(error_key([] { parse_config("medium.bogus = 1"); }) == "medium.bogus");
    CHECK(error_key([] { parse_config("grid.dt = 1\ngrid.dt = 2"); }) == "grid.dt");
    CHECK_THROWS_AS(parse_config(" = 3"), config_error);
}

TEST_CASE("mutually exclusive keys conflict within one layer")
{
    CHECK(error_key([] { parse_config("medium.beta = 1\nmedium.N = 2"); }) == "medium.N");
    CHECK_THROWS_AS(parse_config("medium.eta = 1\nmedium.bandwidth = 2"), config_error);
    CHECK_THROWS_AS(parse_config("medium.intrinsic.fwhm = 1\nmedium.intrinsic.fwhm_hz = 2"), config_error);
}

TEST_CASE("later layers override and replace exclusive alternatives")
{
    const auto base = parse_config("medium.beta = 1\nmedium.bandwidth = 2\nmedium.bandwidth_convention = "
                                   "full_width_cyclic\ngrid.n_z = 50");
    const auto top = parse_config("medium.N = 4\nmedium.eta = 7\ngrid.n_z = 60");
    const auto m = merge_config(base, top);
    CHECK_FALSE(m.contains("medium.beta"));
    CHECK_FALSE(m.contains("medium.bandwidth"));
    CHECK_FALSE(m.contains("medium.bandwidth_convention"));
    CHECK(m.at("medium.N").value == "4");
    CHECK(m.at("grid.n_z").value == "60");
}

TEST_CASE("--set assignments")
{
    const auto e = parse_assignment("grid.dt=0.001");
    CHECK(e.at("grid.dt").value == "0.001");
    CHECK(e.at("grid.dt").origin == "--set:1");
    CHECK_THROWS_AS(parse_assignment("grid.dt"), config_error);
    CHECK(error_key([] { parse_assignment("grid.dtt=1"); }) == "grid.dtt");
    const auto v = parse_assignment("protocol.flips = 0, 2.5");
    CHECK(v.at("protocol.flips").value == "0, 2.5");
}

TEST_CASE("resolution errors name the offending key")
{
    auto with = [](const std::string& extra) {
        return [extra] { resolve_config(merge_config(load_preset("fig1_ideal"), parse_config(extra))); };
    };
    CHECK(error_key(with("grid.dt = -1")) == "grid.dt");
    CHECK(error_key(with("grid.n_z = many")) == "grid.n_z");
    CHECK(error_key(with("medium.gamma = -1")) == "medium.gamma");
    CHECK(error_key(with("pulse.duration = 0")) == "pulse.duration");
    CHECK(error_key(with("protocol.flips = 3, 1")) == "protocol.flips");
    CHECK(error_key(with("medium.intrinsic.shape = voigt")) == "medium.intrinsic.shape");
    CHECK(error_key(with("medium.beta = nan")) == "medium.beta");
    CHECK(error_key(with("sweep.key = medium.beta")) == "sweep.values");
    CHECK(error_key(with("sweep.key = sweep.values\nsweep.values = 1")) == "sweep.key");
    CHECK(error_key(with("medium.orientations = +1, -1\nmedium.orientation_weights = 1")) ==
          "medium.orientation_weights");
    CHECK(error_key(with("cascade.enabled = true\nprotocol.flips = none")) == "cascade.enabled");
}

TEST_CASE("unknown preset is a config error")
{
    CHECK(error_key([] { load_preset("no_such_preset"); }) == "scenario");
}

TEST_CASE("inheritance: a preset layered on another keeps the base values")
{
    const auto cfg = resolve_config(load_preset("fig2_short_storage"));
    CHECK(cfg.scenario.name == "fig2_short_storage");
    CHECK(cfg.scenario.grid.n_z == 300);
    CHECK(cfg.scenario.medium.beta() == Approx(3.3).epsilon(1e-14));
    CHECK(cfg.scenario.pulse.t_center == -4.0);
}

TEST_CASE("every preset survives write-resolved-then-reload unchanged")
{
    for (const auto& name : presets) {
        INFO(name);
        const auto cfg = resolve_config(load_preset(name));
        const auto text = write_resolved(cfg);
        const auto again = resolve_config(parse_config(text, "resolved"));
        CHECK(write_resolved(again) == text);
        CHECK(again.scenario.medium.N == cfg.scenario.medium.N);
        CHECK(again.scenario.medium.eta == cfg.scenario.medium.eta);
        CHECK(again.scenario.grid.dt == cfg.scenario.grid.dt);
        CHECK(again.scenario.protocol.flip_times == cfg.scenario.protocol.flip_times);
    }
}

TEST_CASE("the experiment preset matches the experiment builder defaults")
{
    const auto cfg = resolve_config(load_preset("fig4_experiment"));
    const auto ex = build_experiment();
    const auto& a = cfg.scenario.medium;
    const auto& b = ex.scenario.medium;
    CHECK(a.beta() == Approx(b.beta()).epsilon(1e-14));
    CHECK(a.eta == Approx(b.eta).epsilon(1e-14));
    CHECK(a.z_half == b.z_half);
    CHECK(a.intrinsic.width == Approx(b.intrinsic.width).epsilon(1e-14));
    CHECK(a.intrinsic.n_classes == b.intrinsic.n_classes);
    CHECK(a.intrinsic.truncation == b.intrinsic.truncation);
    REQUIRE(a.orientations.size() == b.orientations.size());
    CHECK(cfg.scenario.pulse.t_pulse == ex.scenario.pulse.t_pulse);
    CHECK(cfg.scenario.pulse.t_center == ex.scenario.pulse.t_center);
    CHECK(cfg.scenario.grid.n_z == ex.scenario.grid.n_z);
    CHECK(cfg.scenario.grid.dt == ex.scenario.grid.dt);
    CHECK(cfg.scenario.grid.t_start == Approx(ex.scenario.grid.t_start));
    CHECK(cfg.scenario.grid.t_end == Approx(ex.scenario.grid.t_end));
    REQUIRE(cfg.experiment.has_value());
    CHECK(cfg.experiment->flip_marker == ex.trace_offset);
    CHECK(*cfg.experiment->broadening_ratio == ex.broadening_ratio);
}

TEST_CASE("broadening ratio must agree with the widths it is derived from")
{
    auto e = load_preset("fig4_experiment");
    e = merge_config(e, parse_config("experiment.broadening_ratio = 150"));
    CHECK(error_key([&] { resolve_config(e); }) == "experiment.broadening_ratio");
}

TEST_CASE("sweep rows replace the axis key")
{
    auto e = merge_config(load_preset("fig1_ideal"), parse_config("sweep.key = medium.beta\nsweep.values = 1, 2.5"));
    const auto base = resolve_config(e);
    REQUIRE(base.sweep.has_value());
    CHECK(base.sweep->values == std::vector<std::string>{"1", "2.5"});
    const auto row = sweep_row_config(base, "2.5");
    CHECK(row.scenario.medium.beta() == Approx(2.5).epsilon(1e-14));
    CHECK_FALSE(row.sweep.has_value());
    CHECK(error_key([&] { sweep_row_config(base, "-1"); }) == "medium.beta");

    // a sweep over N replaces a preset that fixed beta
    auto n = merge_config(load_preset("fig1_ideal"), parse_config("sweep.key = medium.N\nsweep.values = 0.1"));
    CHECK(sweep_row_config(resolve_config(n), "0.1").scenario.medium.N == 0.1);

    auto empty = merge_config(load_preset("fig1_ideal"), parse_config("sweep.key = medium.beta\nsweep.values = none"));
    CHECK(resolve_config(empty).sweep->values.empty());
}

TEST_CASE("number formatting round-trips")
{
    for (double x : {0.1, 1.0 / 3.0, 6e6, -1.5e-6, 4e-9, 0.0})
        CHECK(std::stod(format_double(x)) == x);
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("csv writer quotes and checks the column count")
{
    CsvWriter w({"a", "b"});
    w.cell("x,y").cell(1.5).end_row();
    CHECK(w.str() == "a,b\n\"x,y\",1.5\n");
    w.cell(1);
    CHECK_THROWS(w.end_row());
}
