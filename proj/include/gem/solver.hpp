#pragma once

#include <gem/core.hpp>

#include <functional>
#include <sstream>

namespace gem {

/// Polarization of every (cell, family) pair at time t. Families enumerate
/// (detuning class m, orientation o) with o fastest. `next_flip` indexes the
/// first protocol flip not yet applied.
struct SolverState
{
    double t = 0.0;
    int sign = +1;
    std::size_t next_flip = 0;
    std::vector<complex> alpha;
};

struct FieldSnapshot
{
    double t = 0.0;
    std::vector<complex> E; // at the n_z + 1 nodes
    std::vector<complex> P; // family-weighted polarization at the n_z cell centres
};

/// Full-resolution record at one cell: the local driving field and every
/// family's polarization.
struct ProbeSeries
{
    int cell = 0;
    double z = 0.0;
    std::vector<complex> drive;
    std::vector<std::vector<complex>> alpha;
};

/// Simulation history. Boundary series and stored energy are kept at every
/// time step, space-time snapshots every `store_stride` steps plus at each
/// flip instant.
struct SpaceTimeField
{
    double dt = 0.0;
    std::vector<double> z_nodes;
    std::vector<double> z_cells;
    std::vector<double> times;
    std::vector<complex> E_in;
    std::vector<complex> E_out;
    std::vector<double> stored_energy; // integral of sum_f w_f |alpha_f|^2 dz
    std::vector<FieldSnapshot> snapshots;
    std::vector<FieldSnapshot> flip_snapshots;
    std::vector<ProbeSeries> probes;
};

inline SolverState flip_sign(SolverState state, double at_time)
{
    state.sign = -state.sign;
    state.t = at_time;
    return state;
}

/// Method-of-lines integrator for the linearized Maxwell-Bloch system in the
/// light-speed frame,
///
///   d(alpha_f)/dt = -(gamma + i(s*sigma_o*eta*z + delta_m)) alpha_f + i g E
///   dE/dz         = i N sum_f w_f alpha_f,   E(-z0, t) = f_in(t),
///
/// with alpha on cell centres and E on nodes. The field is swept along z
/// with the cell-midpoint rule inside every RK4 stage; each cell is driven
/// by the average of its two node fields, which makes the semi-discrete
/// photon-flux balance exact.
class MaxwellBlochSolver
{
public:
    MaxwellBlochSolver(MediumParams medium, PulseSpec pulse, Protocol protocol, GridSpec grid)
      : medium_(std::move(medium)), pulse_(std::move(pulse)), protocol_(std::move(protocol)),
        grid_(std::move(grid))
    {
        medium_.validate();
        pulse_.validate();
        grid_.validate();
        protocol_.validate(grid_);

        const auto classes = discretize_line(medium_.intrinsic);
        cells_ = static_cast<std::size_t>(grid_.n_z);
        families_ = classes.offsets.size() * medium_.orientations.size();
        h_ = 2.0 * medium_.z_half / static_cast<double>(cells_);

        z_nodes_.resize(cells_ + 1);
        for (std::size_t j = 0; j <= cells_; ++j)
            z_nodes_[j] = -medium_.z_half + h_ * static_cast<double>(j);
        z_cells_.resize(cells_);
        for (std::size_t j = 0; j < cells_; ++j)
            z_cells_[j] = -medium_.z_half + h_ * (static_cast<double>(j) + 0.5);

        weights_.reserve(families_);
        std::vector<double> offsets;
        std::vector<int> signs;
        for (std::size_t m = 0; m < classes.offsets.size(); ++m)
            for (const auto& o : medium_.orientations) {
                weights_.push_back(classes.weights[m] * o.weight);
                offsets.push_back(classes.offsets[m]);
                signs.push_back(o.sign);
            }

        for (int k = 0; k < 2; ++k) {
            const double s = k == 0 ? 1.0 : -1.0;
            auto& r = rates_[k];
            r.resize(cells_ * families_);
            for (std::size_t j = 0; j < cells_; ++j)
                for (std::size_t f = 0; f < families_; ++f) {
                    const double detuning = s * signs[f] * medium_.eta * z_cells_[j] + offsets[f];
                    r[j * families_ + f] = {medium_.gamma, detuning};
                    max_rate_ = std::max(max_rate_, std::abs(r[j * families_ + f]));
                }
        }

        if (!grid_.allow_unstable && grid_.dt * max_rate_ > 0.5) {
            std::ostringstream os;
            os << "stability bound violated: dt*max|rate| = " << grid_.dt * max_rate_
               << " > 0.5 (reduce grid.dt or set grid.allow_unstable)";
            throw numerical_failure(os.str());
        }
    }

    const MediumParams& medium() const { return medium_; }
    const PulseSpec& pulse() const { return pulse_; }
    const Protocol& protocol() const { return protocol_; }
    const GridSpec& grid() const { return grid_; }
    std::size_t cells() const { return cells_; }
    std::size_t families() const { return families_; }
    double cell_width() const { return h_; }
    double max_rate() const { return max_rate_; }
    const std::vector<double>& z_nodes() const { return z_nodes_; }
    const std::vector<double>& z_cells() const { return z_cells_; }
    const std::vector<double>& family_weights() const { return weights_; }

    SolverState initial_state() const
    {
        SolverState s;
        s.t = grid_.t_start;
        s.sign = protocol_.initial_sign;
        s.alpha.assign(cells_ * families_, complex{});
        while (s.next_flip < protocol_.flip_times.size() &&
               protocol_.flip_times[s.next_flip] <= grid_.t_start)
            ++s.next_flip;
        return s;
    }

    /// E at the nodes for the given polarization, boundary value f_in(t).
    std::vector<complex> field(const SolverState& s) const
    {
        std::vector<complex> E(cells_ + 1);
        const complex c_full{0.0, medium_.N * h_};
        E[0] = pulse_(s.t);
        for (std::size_t j = 0; j < cells_; ++j)
            E[j + 1] = E[j] + c_full * source(s.alpha.data(), j);
        return E;
    }

    std::vector<complex> polarization(const SolverState& s) const
    {
        std::vector<complex> P(cells_);
        for (std::size_t j = 0; j < cells_; ++j)
            P[j] = source(s.alpha.data(), j);
        return P;
    }

    double stored_energy(const SolverState& s) const { return stored_energy(s.alpha.data()); }

    /// Advances by dt, applying every protocol flip in [t, t + dt) at its
    /// exact instant.
    SolverState step(SolverState s, double dt) const
    {
        Scratch w(s.alpha.size(), cells_);
        advance(s, s.t + dt, w, false, {});
        return s;
    }

    SpaceTimeField run() const
    {
        SpaceTimeField out;
        out.dt = grid_.dt;
        out.z_nodes = z_nodes_;
        out.z_cells = z_cells_;
        const std::size_t n = grid_.n_steps();
        out.times.reserve(n + 1);
        out.E_in.reserve(n + 1);
        out.E_out.reserve(n + 1);
        out.stored_energy.reserve(n + 1);
        for (int c : grid_.probe_cells) {
            ProbeSeries p;
            p.cell = c;
            p.z = z_cells_[static_cast<std::size_t>(c)];
            out.probes.push_back(std::move(p));
        }

        SolverState s = initial_state();
        Scratch w(s.alpha.size(), cells_);
        std::vector<complex> nodes(cells_ + 1);

        for (std::size_t i = 0; i <= n; ++i) {
            const double t = grid_.t_start + grid_.dt * static_cast<double>(i);
            s.t = t;
            // k1 of the coming step doubles as the record of this instant
            rhs(s.alpha.data(), t, s.sign, w.k1.data(), nodes.data(), w.drive.data());
            out.times.push_back(t);
            out.E_in.push_back(nodes.front());
            out.E_out.push_back(nodes.back());
            const double q = stored_energy(s.alpha.data());
            if (!std::isfinite(q))
                check_finite(s);
            out.stored_energy.push_back(q);
            for (auto& p : out.probes) {
                const auto c = static_cast<std::size_t>(p.cell);
                p.drive.push_back(w.drive[c]);
                p.alpha.emplace_back(s.alpha.begin() + static_cast<std::ptrdiff_t>(c * families_),
                                     s.alpha.begin() + static_cast<std::ptrdiff_t>((c + 1) * families_));
            }
            if (i % static_cast<std::size_t>(grid_.store_stride) == 0 || i == n)
                out.snapshots.push_back({t, nodes, polarization(s)});
            if (i == n)
                break;

            const double t_next = grid_.t_start + grid_.dt * static_cast<double>(i + 1);
            advance(s, t_next, w, true, [&](const SolverState& at) {
                out.flip_snapshots.push_back({at.t, field(at), polarization(at)});
            });
        }
        return out;
    }

private:
    struct Scratch
    {
        Scratch(std::size_t n, std::size_t cells)
          : k1(n), k2(n), k3(n), k4(n), tmp(n), drive(cells)
        {
        }
        std::vector<complex> k1, k2, k3, k4, tmp, drive;
    };

    complex source(const complex* a, std::size_t j) const
    {
        complex S{};
        const complex* row = a + j * families_;
        for (std::size_t f = 0; f < families_; ++f)
            S += weights_[f] * row[f];
        return S;
    }

    double stored_energy(const complex* a) const
    {
        double q = 0.0;
        for (std::size_t j = 0; j < cells_; ++j) {
            const complex* row = a + j * families_;
            for (std::size_t f = 0; f < families_; ++f)
                q += weights_[f] * std::norm(row[f]);
        }
        return q * h_;
    }

    void rhs(const complex* a, double t, int sign, complex* da, complex* nodes, complex* drive) const
    {
        const complex c_full{0.0, medium_.N * h_};
        const complex c_half = 0.5 * c_full;
        const complex ig{0.0, medium_.g};
        const complex* rate = rates_[sign > 0 ? 0 : 1].data();

        complex E = pulse_(t);
        if (nodes)
            nodes[0] = E;
        for (std::size_t j = 0; j < cells_; ++j) {
            const std::size_t base = j * families_;
            const complex S = source(a, j);
            const complex local = E + c_half * S;
            const complex drive_j = ig * local;
            E += c_full * S;
            for (std::size_t f = 0; f < families_; ++f)
                da[base + f] = drive_j - rate[base + f] * a[base + f];
            if (nodes)
                nodes[j + 1] = E;
            if (drive)
                drive[j] = local;
        }
    }

    void rk4(SolverState& s, double h, Scratch& w, bool k1_ready) const
    {
        const std::size_t n = s.alpha.size();
        auto& a = s.alpha;
        const double t = s.t;
        if (!k1_ready)
            rhs(a.data(), t, s.sign, w.k1.data(), nullptr, nullptr);
        for (std::size_t i = 0; i < n; ++i)
            w.tmp[i] = a[i] + 0.5 * h * w.k1[i];
        rhs(w.tmp.data(), t + 0.5 * h, s.sign, w.k2.data(), nullptr, nullptr);
        for (std::size_t i = 0; i < n; ++i)
            w.tmp[i] = a[i] + 0.5 * h * w.k2[i];
        rhs(w.tmp.data(), t + 0.5 * h, s.sign, w.k3.data(), nullptr, nullptr);
        for (std::size_t i = 0; i < n; ++i)
            w.tmp[i] = a[i] + h * w.k3[i];
        rhs(w.tmp.data(), t + h, s.sign, w.k4.data(), nullptr, nullptr);
        const double h6 = h / 6.0;
        for (std::size_t i = 0; i < n; ++i)
            a[i] += h6 * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
        s.t = t + h;
    }

    void advance(SolverState& s, double t_target, Scratch& w, bool k1_ready,
                 const std::function<void(const SolverState&)>& on_flip) const
    {
        const double eps = 1e-9 * grid_.dt;
        const auto& flips = protocol_.flip_times;
        while (s.next_flip < flips.size() && flips[s.next_flip] < t_target - eps) {
            const double tau = std::max(flips[s.next_flip], s.t);
            if (tau > s.t + eps) {
                rk4(s, tau - s.t, w, k1_ready);
                k1_ready = false;
            }
            s.t = tau;
            if (on_flip)
                on_flip(s);
            s = flip_sign(std::move(s), tau);
            ++s.next_flip;
            k1_ready = false;
        }
        if (t_target > s.t + eps)
            rk4(s, t_target - s.t, w, k1_ready);
        s.t = t_target;
        check_finite(s);
    }

    void check_finite(const SolverState& s) const
    {
        for (std::size_t i = 0; i < s.alpha.size(); ++i)
            if (!std::isfinite(s.alpha[i].real()) || !std::isfinite(s.alpha[i].imag())) {
                std::ostringstream os;
                os << "non-finite polarization at t = " << s.t << ", z index " << i / families_;
                throw numerical_failure(os.str());
            }
    }

    MediumParams medium_;
    PulseSpec pulse_;
    Protocol protocol_;
    GridSpec grid_;
    std::size_t cells_ = 0;
    std::size_t families_ = 0;
    double h_ = 0.0;
    double max_rate_ = 0.0;
    std::vector<double> z_nodes_;
    std::vector<double> z_cells_;
    std::vector<double> weights_;
    std::vector<complex> rates_[2];
};

inline SpaceTimeField run(const MediumParams& medium, const PulseSpec& pulse, const Protocol& protocol,
                          const GridSpec& grid)
{
    return MaxwellBlochSolver(medium, pulse, protocol, grid).run();
}

} // namespace gem
