// Command-line front end: simulate, compare, sweep and cascade.

#include <gem/gem.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

namespace fs = std::filesystem;

namespace {

enum exit_code { ok = 0, config_failure = 1, numerical = 2, validity = 3 };

struct Options
{
    std::string scenario;
    std::string config;
    std::vector<std::string> sets;
    std::string out = "gem_out";
    std::string emit = "boundary,resolved";
    bool strict = false;
    int threads = 1;
};

struct Emit
{
    bool boundary = false;
    bool field = false;
    bool alpha = false;
    bool resolved = false;
    bool traces = false;
};

Emit parse_emit(const std::string& list)
{
    Emit e;
    for (const auto& item : gem::detail::split_list(list)) {
        if (item.empty() || item == "none" || item == "report")
            continue;
        if (item == "all") {
            e = {true, true, true, true, true};
        } else if (item == "boundary") {
            e.boundary = true;
        } else if (item == "field") {
            e.field = true;
        } else if (item == "alpha") {
            e.alpha = true;
        } else if (item == "resolved") {
            e.resolved = true;
        } else if (item == "traces") {
            e.traces = true;
        } else {
            throw gem::config_error("--emit", "unknown item '" + item +
                                                  "' (boundary, field, alpha, resolved, traces, all, none)");
        }
    }
    return e;
}

gem::RunConfig load(const Options& o)
{
    const auto presets = gem::scenario_dir();
    gem::ConfigEntries entries;
    if (!o.scenario.empty())
        entries = gem::load_preset(o.scenario, presets);
    if (!o.config.empty())
        entries = gem::merge_config(entries, gem::load_layer(gem::read_text(o.config), o.config, presets));
    for (const auto& s : o.sets)
        entries = gem::merge_config(entries, gem::parse_assignment(s));
    if (o.scenario.empty() && o.config.empty() && o.sets.empty())
        throw gem::config_error("", "nothing to run: give --scenario, --config or --set");
    return gem::resolve_config(entries);
}

class Session
{
public:
    explicit Session(const Options& o) : opt_(o), emit_(parse_emit(o.emit)), dir_(o.out)
    {
        fs::create_directories(dir_);
    }

    void save(const gem::CsvWriter& w, const std::string& file) const { w.save(dir_ / file); }

    void save_text(const std::string& text, const std::string& file) const
    {
        const auto tmp = (dir_ / (file + ".tmp")).string();
        {
            std::ofstream f(tmp, std::ios::binary);
            f << text;
        }
        fs::rename(tmp, dir_ / file);
    }

    void warn(const std::string& where, const std::vector<std::string>& warnings)
    {
        for (const auto& w : warnings)
            std::cerr << "warning: " << where << ": " << w << "\n";
        warned_ = warned_ || !warnings.empty();
    }

    int finish() const { return opt_.strict && warned_ ? validity : ok; }

    const Emit& emit() const { return emit_; }
    const Options& options() const { return opt_; }

private:
    Options opt_;
    Emit emit_;
    fs::path dir_;
    bool warned_ = false;
};

void status_line(const std::string& name, const gem::RunReport& r, double seconds)
{
    std::cout << name << ": efficiency " << gem::format_double(r.efficiency) << ", transmission "
              << gem::format_double(r.transmission) << ", echo peak " << gem::format_double(r.echo_peak_time)
              << " (" << seconds << " s)\n";
}

double since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_history(Session& s, const gem::ScenarioResult& r, const std::string& suffix = "")
{
    if (s.emit().boundary)
        s.save(gem::boundary_table(r.history), "boundary" + suffix + ".csv");
    if (s.emit().field)
        s.save(gem::field_table(r.history), "field_zt" + suffix + ".csv");
    if (s.emit().alpha)
        s.save(gem::polarization_table(r.history), "alpha_zt" + suffix + ".csv");
}

int cmd_simulate(const Options& o)
{
    const auto cfg = load(o);
    Session s(o);
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = gem::run_scenario(cfg.scenario);
    status_line(cfg.scenario.name, r.report, since(t0));
    s.warn(cfg.scenario.name, gem::validity_warnings(r));

    std::vector<std::pair<std::string, gem::RunReport>> rows{{cfg.scenario.name, r.report}};
    if (cfg.experiment && cfg.experiment->reference) {
        const auto ref = gem::run_reference(cfg.scenario);
        rows.emplace_back(ref.scenario.name, ref.report);
        if (s.emit().traces || s.emit().boundary)
            s.save(gem::trace_table(gem::make_traces(r, ref, cfg.experiment->flip_marker)), "traces.csv");
    }
    s.save(gem::report_table(rows), "report.csv");
    write_history(s, r);
    if (s.emit().resolved)
        s.save_text(gem::write_resolved(cfg), "resolved_config");
    return s.finish();
}

int cmd_compare(const Options& o)
{
    const auto cfg = load(o);
    Session s(o);
    const auto& sc = cfg.scenario;
    const auto r = gem::run_scenario(sc);
    s.warn(sc.name, gem::validity_warnings(r));
    std::vector<std::string> scope;
    if (sc.medium.orientations.size() > 1)
        scope.push_back("closed forms assume a single orientation");
    if (!sc.medium.intrinsic.is_delta())
        scope.push_back("closed forms assume no intrinsic line");
    if (sc.medium.gamma > 0.0)
        scope.push_back("closed forms assume no decoherence");
    s.warn(sc.name, scope);

    gem::SummaryTable summary;
    const double beta = sc.medium.beta();
    summary.add("beta", beta);

    if (beta == 0.0) {
        // both sides are passthrough; the solver output must equal the input
        double worst = 0.0, peak = 0.0;
        for (std::size_t k = 0; k < r.history.times.size(); ++k) {
            worst = std::max(worst, std::abs(r.history.E_out[k] - r.history.E_in[k]));
            peak = std::max(peak, std::abs(r.history.E_in[k]));
        }
        summary.add("passthrough_max_error", peak > 0.0 ? worst / peak : 0.0);
    } else {
        const bool flipped = std::isfinite(sc.protocol.first_flip());
        if (flipped) {
            const auto e = gem::compare_echo(r);
            gem::CsvWriter w({"t", "re_solver", "im_solver", "re_oracle", "im_oracle", "abs_solver", "abs_oracle"});
            for (std::size_t k = 0; k < e.times.size(); ++k) {
                w.cell(e.times[k] * r.natural.scales.time).cell(e.solver[k].real()).cell(e.solver[k].imag());
                w.cell(e.oracle[k].real()).cell(e.oracle[k].imag()).cell(std::abs(e.solver[k]));
                w.cell(std::abs(e.oracle[k]));
                w.end_row();
            }
            s.save(w, "echo_compare.csv");
            summary.add("echo_envelope_rms", e.envelope_rms)
                .add("echo_complex_overlap", e.complex_overlap)
                .add("echo_overlap_phase", e.overlap_phase)
                .add("echo_fidelity", e.fidelity)
                .add("chirp_solver", e.chirp_solver / r.natural.scales.time)
                .add("chirp_oracle", e.chirp_oracle / r.natural.scales.time);

            const auto k = gem::compare_kspace(r);
            gem::CsvWriter wk({"k", "abs_solver", "abs_oracle"});
            for (std::size_t i = 0; i < k.k.size(); ++i) {
                wk.cell(k.k[i] / r.natural.scales.length).cell(k.solver[i]).cell(k.oracle[i]);
                wk.end_row();
            }
            s.save(wk, "kspace_compare.csv");
            summary.add("kspace_correlation", k.correlation).add("broadening_ratio", k.ratio);
            if (k.ratio < cfg.validity_threshold)
                s.warn(sc.name, {k.warning + " (" + gem::format_double(k.ratio) + ")"});
        }
        const auto tr = gem::compare_transfer(sc);
        gem::CsvWriter wt({"omega", "log_abs_solver", "log_abs_oracle"});
        for (std::size_t i = 0; i < tr.omega.size(); ++i) {
            wt.cell(tr.omega[i] / r.natural.scales.time).cell(tr.solver_log[i]).cell(tr.oracle_log[i]);
            wt.end_row();
        }
        s.save(wt, "transfer_compare.csv");
        summary.add("transfer_max_log_error", tr.max_log_error);
    }
    s.save(summary.csv(), "compare_summary.csv");
    s.save(gem::report_table({{sc.name, r.report}}), "report.csv");
    if (s.emit().resolved)
        s.save_text(gem::write_resolved(cfg), "resolved_config");
    std::cout << sc.name << ": comparison written to " << o.out << "\n";
    return s.finish();
}

int cmd_sweep(const Options& o)
{
    const auto cfg = load(o);
    if (!cfg.sweep)
        throw gem::config_error("sweep.key", "sweep needs sweep.key and sweep.values");
    Session s(o);
    const auto& values = cfg.sweep->values;
    // resolve every row first so that config errors stop the run early
    std::vector<gem::RunConfig> rows;
    for (const auto& v : values)
        rows.push_back(gem::sweep_row_config(cfg, v));
    std::vector<std::size_t> index(rows.size());
    std::iota(index.begin(), index.end(), std::size_t{0});

    const auto t0 = std::chrono::steady_clock::now();
    const auto table = gem::sweep<std::size_t>(
        index, [&](std::size_t i) { return gem::run_scenario(rows[i].scenario).report; }, o.threads);

    auto header = gem::report_columns();
    header.insert(header.begin(), {cfg.sweep->key, "error"});
    gem::CsvWriter w(header);
    for (const auto& row : table) {
        w.cell(values[row.value]).cell(row.error);
        gem::report_cells(w, rows[row.value].scenario.name, row.report.value_or(gem::RunReport{}));
        w.end_row();
        if (!row.error.empty())
            std::cerr << "warning: " << cfg.sweep->key << " = " << values[row.value] << ": " << row.error << "\n";
    }
    s.save(w, "sweep.csv");
    if (s.emit().resolved)
        s.save_text(gem::write_resolved(cfg), "resolved_config");
    std::cout << cfg.scenario.name << ": " << table.size() << " sweep rows (" << since(t0) << " s)\n";
    return s.finish();
}

int cmd_cascade(const Options& o)
{
    const auto cfg = load(o);
    Session s(o);
    const auto t0 = std::chrono::steady_clock::now();
    const auto c = gem::run_cascade(cfg.scenario);
    s.warn(cfg.scenario.name, gem::validity_warnings(c.stage1));
    std::vector<std::pair<std::string, gem::RunReport>> rows{{c.stage1.scenario.name, c.stage1.report}};
    write_history(s, c.stage1, c.stage2 ? "_stage1" : "");
    if (c.stage2) {
        rows.emplace_back(c.stage2->scenario.name, c.stage2->report);
        write_history(s, *c.stage2, "_stage2");
        gem::SummaryTable summary;
        summary.add("stage2_flip", c.stage2_flip)
            .add("forward_fidelity", c.forward_fidelity)
            .add("forward_lag", c.forward_lag)
            .add("complex_overlap", c.complex_overlap)
            .add("chirp_stage1", c.chirp_stage1)
            .add("chirp_final", c.chirp_final)
            .add("residual_chirp_ratio", c.residual_chirp_ratio)
            .add("end_to_end_efficiency", c.end_to_end_efficiency);
        s.save(summary.csv(), "cascade.csv");
        std::cout << cfg.scenario.name << ": forward fidelity " << gem::format_double(c.forward_fidelity)
                  << ", residual chirp ratio " << gem::format_double(c.residual_chirp_ratio) << " ("
                  << since(t0) << " s)\n";
    } else {
        status_line(cfg.scenario.name, c.stage1.report, since(t0));
    }
    s.save(gem::report_table(rows), "report.csv");
    if (s.emit().resolved)
        s.save_text(gem::write_resolved(cfg), "resolved_config");
    return s.finish();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Gradient echo memory simulator"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", opt.scenario, "preset name from the scenarios directory");
        sub->add_option("--config", opt.config, "config file (key = value lines)");
        sub->add_option("--set", opt.sets, "override, key=value (repeatable)");
        sub->add_option("--out", opt.out, "output directory")->capture_default_str();
        sub->add_option("--emit", opt.emit,
                        "comma list of boundary, field, alpha, resolved, traces, all; none for report only")
            ->capture_default_str();
        sub->add_flag("--strict", opt.strict, "exit with code 3 on validity warnings");
        sub->add_option("--threads", opt.threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
    };

    std::vector<std::pair<CLI::App*, int (*)(const Options&)>> commands;
    commands.emplace_back(app.add_subcommand("simulate", "run one scenario"), cmd_simulate);
    commands.emplace_back(app.add_subcommand("compare", "solver against the closed-form solutions"), cmd_compare);
    commands.emplace_back(app.add_subcommand("sweep", "one run per value of sweep.key"), cmd_sweep);
    commands.emplace_back(app.add_subcommand("cascade", "two memories in series"), cmd_cascade);
    for (auto& [sub, fn] : commands)
        add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_failure;
    }

    try {
        for (auto& [sub, fn] : commands)
            if (sub->parsed())
                return fn(opt);
    } catch (const gem::numerical_failure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return numerical;
    } catch (const gem::invalid_parameter& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_failure;
    } catch (const gem::undefined_metric& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return numerical;
    }
    return ok;
}
