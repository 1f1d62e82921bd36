#pragma once

#include <gem/csv.hpp>
#include <gem/experiment.hpp>

namespace gem {

// Column orders below are part of the file formats; append, never reorder.

inline std::vector<std::string> report_columns()
{
    return {"name",           "beta",           "input_energy",      "transmitted_energy",
            "echo_energy",    "transmission",   "efficiency",        "echo_peak_time",
            "envelope_fidelity", "fidelity_lag", "chirp_estimate",    "chirp_predicted",
            "energy_residual", "tbp_fwhm",      "tbp_storage",       "n_z",
            "dt",             "t_start",        "t_end",             "steps",
            "families",       "status"};
}

inline void report_cells(CsvWriter& w, const std::string& name, const RunReport& r)
{
    w.cell(name).cell(r.beta).cell(r.input_energy).cell(r.transmitted_energy).cell(r.echo_energy);
    w.cell(r.transmission).cell(r.efficiency).cell(r.echo_peak_time).cell(r.envelope_fidelity);
    w.cell(r.fidelity_lag).cell(r.chirp_estimate).cell(r.chirp_predicted).cell(r.energy_residual);
    w.cell(r.tbp_fwhm).cell(r.tbp_storage).cell(r.n_z).cell(r.dt).cell(r.t_start).cell(r.t_end);
    w.cell(r.steps).cell(r.families).cell(r.status);
}

inline CsvWriter report_table(const std::vector<std::pair<std::string, RunReport>>& rows)
{
    CsvWriter w(report_columns());
    for (const auto& [name, r] : rows) {
        report_cells(w, name, r);
        w.end_row();
    }
    return w;
}

/// t, Re E_in, Im E_in, Re E_out, Im E_out, |E_out|^2
inline CsvWriter boundary_table(const SpaceTimeField& h)
{
    CsvWriter w({"t", "re_E_in", "im_E_in", "re_E_out", "im_E_out", "abs2_E_out"});
    for (std::size_t k = 0; k < h.times.size(); ++k) {
        w.cell(h.times[k]).cell(h.E_in[k].real()).cell(h.E_in[k].imag());
        w.cell(h.E_out[k].real()).cell(h.E_out[k].imag()).cell(std::norm(h.E_out[k]));
        w.end_row();
    }
    return w;
}

/// Decimated E(z, t) on the nodes, one row per (t, z).
inline CsvWriter field_table(const SpaceTimeField& h)
{
    CsvWriter w({"t", "z", "re_E", "im_E", "abs2_E"});
    for (const auto& s : h.snapshots)
        for (std::size_t j = 0; j < s.E.size(); ++j) {
            w.cell(s.t).cell(h.z_nodes[j]).cell(s.E[j].real()).cell(s.E[j].imag()).cell(std::norm(s.E[j]));
            w.end_row();
        }
    return w;
}

/// Decimated family-weighted polarization on the cell centres.
inline CsvWriter polarization_table(const SpaceTimeField& h)
{
    CsvWriter w({"t", "z", "re_alpha", "im_alpha", "abs2_alpha"});
    for (const auto& s : h.snapshots)
        for (std::size_t j = 0; j < s.P.size(); ++j) {
            w.cell(s.t).cell(h.z_cells[j]).cell(s.P[j].real()).cell(s.P[j].imag()).cell(std::norm(s.P[j]));
            w.end_row();
        }
    return w;
}

inline CsvWriter trace_table(const ExperimentTraces& tr)
{
    CsvWriter w({"t", "reference", "transmitted", "echo"});
    for (std::size_t k = 0; k < tr.time.size(); ++k) {
        w.cell(tr.time[k]).cell(tr.reference[k]).cell(tr.transmitted[k]).cell(tr.echo[k]);
        w.end_row();
    }
    return w;
}

/// Two-column metric table.
class SummaryTable
{
public:
    SummaryTable& add(const std::string& metric, double value)
    {
        w_.cell(metric).cell(value);
        w_.end_row();
        return *this;
    }
    const CsvWriter& csv() const { return w_; }

private:
    CsvWriter w_{{"metric", "value"}};
};

} // namespace gem
