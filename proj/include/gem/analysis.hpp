#pragma once

#include <gem/oracle.hpp>
#include <gem/solver.hpp>
#include <gem/spectral.hpp>

#include <atomic>
#include <thread>

namespace gem {

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

/// Metrics of one run. Energies are time integrals of |E|^2 at the sample
/// boundaries; undefined metrics are NaN and explained in `status`.
struct RunReport
{
    double beta = nan;
    double input_energy = nan;
    double transmitted_energy = nan;
    double echo_energy = nan;
    double transmission = nan;
    double efficiency = nan;
    double echo_peak_time = nan;
    double envelope_fidelity = nan;
    double fidelity_lag = nan;
    double chirp_estimate = nan;
    double chirp_predicted = nan;
    double energy_residual = nan;
    double tbp_fwhm = nan;
    double tbp_storage = nan;
    int n_z = 0;
    double dt = nan;
    double t_start = nan;
    double t_end = nan;
    std::size_t steps = 0;
    std::size_t families = 0;
    std::string status = "ok";
};

//
// Efficiency
//

struct EnergySplit
{
    double input = 0.0;
    double before = 0.0;
    double after = 0.0;
};

/// Time integrals of |E_in|^2 and of |E_out|^2 on either side of `split`.
inline EnergySplit boundary_energies(const SpaceTimeField& h, double split)
{
    EnergySplit e;
    for (std::size_t n = 1; n < h.times.size(); ++n) {
        const double t0 = h.times[n - 1], t1 = h.times[n];
        const double dt = t1 - t0;
        e.input += 0.5 * dt * (std::norm(h.E_in[n - 1]) + std::norm(h.E_in[n]));
        const double a = std::norm(h.E_out[n - 1]), b = std::norm(h.E_out[n]);
        if (t1 <= split) {
            e.before += 0.5 * dt * (a + b);
        } else if (t0 >= split) {
            e.after += 0.5 * dt * (a + b);
        } else {
            const double frac = (split - t0) / dt;
            const double mid = a + frac * (b - a);
            e.before += 0.5 * (split - t0) * (a + mid);
            e.after += 0.5 * (t1 - split) * (mid + b);
        }
    }
    return e;
}

struct TransmissionEfficiency
{
    double transmission = 0.0;
    double efficiency = 0.0;
};

inline TransmissionEfficiency efficiency(const SpaceTimeField& history, double flip_time)
{
    const auto e = boundary_energies(history, flip_time);
    if (!(e.input > 0.0))
        throw undefined_metric("zero input energy: efficiency undefined");
    return {e.before / e.input, e.after / e.input};
}

//
// Envelope fidelity
//

enum class envelope_match { mirrored, forward };

struct FidelityResult
{
    double value = 0.0;
    /// Delay between the input and its (mirrored or forward) copy in the echo.
    double lag = 0.0;
    /// For mirrored matches: T with |echo(t)| ~ |f_in(T - t)|.
    double mirror_time = 0.0;
};

namespace detail {

struct trimmed
{
    std::size_t offset = 0;
    std::vector<double> mag;
};

inline trimmed trim_support(std::span<const complex> x, double rel = 1e-8)
{
    double peak = 0.0;
    for (const auto& v : x)
        peak = std::max(peak, std::abs(v));
    trimmed out;
    if (!(peak > 0.0))
        return out;
    std::size_t lo = 0, hi = x.size();
    while (lo < hi && std::abs(x[lo]) <= rel * peak)
        ++lo;
    while (hi > lo && std::abs(x[hi - 1]) <= rel * peak)
        --hi;
    out.offset = lo;
    for (std::size_t k = lo; k < hi; ++k)
        out.mag.push_back(std::abs(x[k]));
    return out;
}

inline double intensity_centroid(std::span<const double> t, std::span<const complex> x)
{
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        num += t[k] * std::norm(x[k]);
        den += std::norm(x[k]);
    }
    return num / den;
}

} // namespace detail

/// Peak normalized cross-correlation between |echo| and |input|, the input
/// either time-mirrored or as is, scanning all shifts of a common uniform
/// grid `times`.
inline FidelityResult envelope_fidelity(std::span<const double> times, std::span<const complex> echo,
                                        std::span<const complex> input,
                                        envelope_match mode = envelope_match::mirrored)
{
    const auto a = detail::trim_support(echo);
    const auto b = detail::trim_support(input);
    if (a.mag.empty() || b.mag.empty())
        throw undefined_metric("envelope fidelity of a zero series");
    const double dt = times[1] - times[0];
    double na = 0.0, nb = 0.0;
    for (double v : a.mag)
        na += v * v;
    for (double v : b.mag)
        nb += v * v;
    const double norm = std::sqrt(na * nb);

    // mirrored: C(s) = sum_i a_i b_{s-i};  forward: C(d) = sum_i a_i b_{i-d}
    const auto la = static_cast<std::ptrdiff_t>(a.mag.size());
    const auto lb = static_cast<std::ptrdiff_t>(b.mag.size());
    std::vector<double> corr;
    std::ptrdiff_t first = 0;
    if (mode == envelope_match::mirrored) {
        first = 0;
        corr.assign(static_cast<std::size_t>(la + lb - 1), 0.0);
        for (std::ptrdiff_t i = 0; i < la; ++i)
            for (std::ptrdiff_t j = 0; j < lb; ++j)
                corr[static_cast<std::size_t>(i + j)] += a.mag[static_cast<std::size_t>(i)] *
                                                         b.mag[static_cast<std::size_t>(j)];
    } else {
        first = -(lb - 1);
        corr.assign(static_cast<std::size_t>(la + lb - 1), 0.0);
        for (std::ptrdiff_t i = 0; i < la; ++i)
            for (std::ptrdiff_t j = 0; j < lb; ++j)
                corr[static_cast<std::size_t>(i - j - first)] += a.mag[static_cast<std::size_t>(i)] *
                                                                 b.mag[static_cast<std::size_t>(j)];
    }
    for (double& c : corr)
        c /= norm;

    const auto best = static_cast<std::size_t>(std::max_element(corr.begin(), corr.end()) - corr.begin());
    double shift = static_cast<double>(best);
    if (best > 0 && best + 1 < corr.size()) {
        const double d = corr[best - 1] - 2.0 * corr[best] + corr[best + 1];
        if (d != 0.0)
            shift += 0.5 * (corr[best - 1] - corr[best + 1]) / d;
    }
    shift += static_cast<double>(first);

    FidelityResult out;
    out.value = std::min(1.0, corr[best]);
    const double ta = times[a.offset];
    const double tb = times[b.offset];
    const double c_in = detail::intensity_centroid(times, input);
    if (mode == envelope_match::mirrored) {
        out.mirror_time = ta + tb + shift * dt;
        out.lag = out.mirror_time - 2.0 * c_in;
    } else {
        out.lag = ta - tb + shift * dt;
        out.mirror_time = nan;
    }
    return out;
}

//
// Chirp
//

struct ChirpResult
{
    double frequency = 0.0; // d(arg E)/dt at the intensity peak
    double peak_time = 0.0;
    double window_start = 0.0;
    double window_end = 0.0;
    double curvature = 0.0; // d2(arg E)/dt2 of the fit
};

/// Unwraps arg E over the intensity-FWHM window around the peak and fits a
/// quadratic; returns its slope at the peak.
inline ChirpResult chirp_estimate(std::span<const double> times, std::span<const complex> values,
                                  double min_amplitude = 1e-9, double jump = pi)
{
    if (times.size() != values.size() || times.size() < 5)
        throw undefined_metric("chirp estimate needs at least five samples");
    std::vector<double> intensity(values.size());
    for (std::size_t k = 0; k < values.size(); ++k)
        intensity[k] = std::norm(values[k]);
    const auto peak = static_cast<std::size_t>(std::max_element(intensity.begin(), intensity.end()) -
                                               intensity.begin());
    if (!(std::sqrt(intensity[peak]) > min_amplitude))
        throw undefined_metric("echo amplitude below chirp threshold");
    const double half = 0.5 * intensity[peak];
    std::size_t lo = peak, hi = peak;
    while (lo > 0 && intensity[lo - 1] >= half)
        --lo;
    while (hi + 1 < intensity.size() && intensity[hi + 1] >= half)
        ++hi;
    if (hi - lo + 1 < 5)
        throw undefined_metric("chirp window narrower than five samples");

    const double t_peak = refined_peak(times, intensity);
    std::vector<double> phase;
    phase.reserve(hi - lo + 1);
    double prev = std::arg(values[lo]);
    double offset = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) {
        const double p = std::arg(values[k]);
        double d = p - prev;
        if (d > jump)
            offset -= two_pi * std::ceil((d - jump) / two_pi);
        else if (d < -jump)
            offset += two_pi * std::ceil((-jump - d) / two_pi);
        phase.push_back(p + offset);
        prev = p;
    }

    // least squares phi = c0 + c1 x + c2 x^2 with x = t - t_peak
    double S[5] = {0, 0, 0, 0, 0};
    double R[3] = {0, 0, 0};
    for (std::size_t k = lo; k <= hi; ++k) {
        const double x = times[k] - t_peak;
        double p = 1.0;
        for (double& s : S) {
            s += p;
            p *= x;
        }
        const double y = phase[k - lo];
        R[0] += y;
        R[1] += y * x;
        R[2] += y * x * x;
    }
    double A[3][4] = {{S[0], S[1], S[2], R[0]}, {S[1], S[2], S[3], R[1]}, {S[2], S[3], S[4], R[2]}};
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r)
            if (std::abs(A[r][c]) > std::abs(A[piv][c]))
                piv = r;
        for (int k = 0; k < 4; ++k)
            std::swap(A[c][k], A[piv][k]);
        for (int r = 0; r < 3; ++r) {
            if (r == c)
                continue;
            const double f = A[r][c] / A[c][c];
            for (int k = c; k < 4; ++k)
                A[r][k] -= f * A[c][k];
        }
    }
    ChirpResult out;
    out.frequency = A[1][3] / A[1][1];
    out.curvature = 2.0 * A[2][3] / A[2][2];
    out.peak_time = t_peak;
    out.window_start = times[lo];
    out.window_end = times[hi];
    return out;
}

//
// Photon-flux balance
//

struct EnergyBalance
{
    std::vector<double> times;
    std::vector<double> residual;
    double max_abs = 0.0;
    double peak_flux = 0.0;
    double normalized_max = 0.0; // max_abs / peak input flux
};

namespace detail {

/// d/dx at 0 of the interpolating polynomial through integer nodes.
inline std::vector<double> derivative_weights(std::span<const int> nodes)
{
    std::vector<double> w(nodes.size(), 0.0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        double denom = 1.0;
        for (std::size_t j = 0; j < nodes.size(); ++j)
            if (j != i)
                denom *= nodes[i] - nodes[j];
        double sum = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (k == i)
                continue;
            double prod = 1.0;
            for (std::size_t j = 0; j < nodes.size(); ++j)
                if (j != i && j != k)
                    prod *= -nodes[j];
            sum += prod;
        }
        w[i] = sum / denom;
    }
    return w;
}

} // namespace detail

/// Residual of d/dt int sum_f w_f |alpha_f|^2 dz + (g/N)(|E(z0)|^2 - |E(-z0)|^2) + 2 gamma int ... = 0
/// at every recorded step, with five-point derivatives that never straddle
/// a flip.
inline EnergyBalance energy_balance(const SpaceTimeField& h, const MediumParams& medium)
{
    EnergyBalance out;
    const std::size_t n = h.times.size();
    out.times = h.times;
    out.residual.assign(n, 0.0);
    if (n < 5 || !(medium.N > 0.0))
        return out;
    const double ratio = medium.g / medium.N;
    for (const auto& e : h.E_in)
        out.peak_flux = std::max(out.peak_flux, ratio * std::norm(e));

    std::vector<double> flips;
    for (const auto& f : h.flip_snapshots)
        flips.push_back(f.t);

    static constexpr int stencils[5][5] = {
        {-2, -1, 0, 1, 2}, {-1, 0, 1, 2, 3}, {-3, -2, -1, 0, 1}, {0, 1, 2, 3, 4}, {-4, -3, -2, -1, 0}};
    std::vector<std::vector<double>> weights;
    for (const auto& s : stencils)
        weights.push_back(detail::derivative_weights(s));

    const double dt = h.times[1] - h.times[0];
    for (std::size_t i = 0; i < n; ++i) {
        int chosen = -1;
        for (int s = 0; s < 5 && chosen < 0; ++s) {
            const auto lo = static_cast<std::ptrdiff_t>(i) + stencils[s][0];
            const auto hi = static_cast<std::ptrdiff_t>(i) + stencils[s][4];
            if (lo < 0 || hi >= static_cast<std::ptrdiff_t>(n))
                continue;
            const double tl = h.times[static_cast<std::size_t>(lo)];
            const double th = h.times[static_cast<std::size_t>(hi)];
            const double eps = 1e-9 * dt;
            const bool straddles = std::any_of(flips.begin(), flips.end(),
                                               [&](double f) { return f > tl + eps && f < th - eps; });
            if (!straddles)
                chosen = s;
        }
        if (chosen < 0)
            continue;
        double dq = 0.0;
        for (int k = 0; k < 5; ++k)
            dq += weights[static_cast<std::size_t>(chosen)][static_cast<std::size_t>(k)] *
                  h.stored_energy[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + stencils[chosen][k])];
        dq /= dt;
        const double flux = ratio * (std::norm(h.E_out[i]) - std::norm(h.E_in[i]));
        out.residual[i] = dq + flux + 2.0 * medium.gamma * h.stored_energy[i];
        out.max_abs = std::max(out.max_abs, std::abs(out.residual[i]));
    }
    out.normalized_max = out.peak_flux > 0.0 ? out.max_abs / out.peak_flux : 0.0;
    return out;
}

//
// Report
//

namespace detail {

inline double spectral_fwhm_hz(std::span<const double> t, std::span<const complex> x, double t_fwhm)
{
    if (!(t_fwhm > 0.0))
        return nan;
    const double c = intensity_centroid(t, x);
    const double span_w = 24.0 / t_fwhm;
    std::vector<double> w(481);
    for (std::size_t k = 0; k < w.size(); ++k)
        w[k] = -span_w + 2.0 * span_w * static_cast<double>(k) / static_cast<double>(w.size() - 1);
    // centre the time origin to keep the transform well conditioned
    std::vector<double> tc(t.begin(), t.end());
    for (double& v : tc)
        v -= c;
    const auto F = temporal_spectrum(tc, x, w);
    std::vector<double> p(F.size());
    for (std::size_t k = 0; k < F.size(); ++k)
        p[k] = std::norm(F[k]);
    return fwhm(w, p) / two_pi;
}

} // namespace detail

/// Fills every metric that is defined for the run.
inline RunReport make_report(const SpaceTimeField& h, const MediumParams& medium, const Protocol& protocol,
                             const GridSpec& grid, std::size_t families)
{
    RunReport r;
    r.beta = medium.beta();
    r.n_z = grid.n_z;
    r.dt = grid.dt;
    r.t_start = h.times.front();
    r.t_end = h.times.back();
    r.steps = h.times.size() - 1;
    r.families = families;

    const double flip = protocol.first_flip();
    const auto e = boundary_energies(h, flip);
    r.input_energy = e.input;
    r.transmitted_energy = e.before;
    r.echo_energy = e.after;
    if (!(e.input > 0.0)) {
        r.status = "undefined: zero input energy";
        return r;
    }
    r.transmission = e.before / e.input;
    r.efficiency = e.after / e.input;
    r.energy_residual = energy_balance(h, medium).normalized_max;

    std::vector<double> in_int(h.times.size());
    for (std::size_t k = 0; k < in_int.size(); ++k)
        in_int[k] = std::norm(h.E_in[k]);
    const double t_fwhm = fwhm(h.times, in_int);
    const double bw = detail::spectral_fwhm_hz(h.times, h.E_in, t_fwhm);
    r.tbp_fwhm = t_fwhm * bw;

    if (!std::isfinite(flip))
        return r;

    std::vector<double> et;
    std::vector<complex> ev;
    for (std::size_t k = 0; k < h.times.size(); ++k)
        if (h.times[k] > flip) {
            et.push_back(h.times[k]);
            ev.push_back(h.E_out[k]);
        }
    std::vector<complex> echo(h.E_out.size());
    for (std::size_t k = 0; k < echo.size(); ++k)
        echo[k] = h.times[k] > flip ? h.E_out[k] : complex{};

    std::vector<double> ei(ev.size());
    for (std::size_t k = 0; k < ev.size(); ++k)
        ei[k] = std::norm(ev[k]);
    if (ev.size() >= 3 && *std::max_element(ei.begin(), ei.end()) > 0.0) {
        r.echo_peak_time = refined_peak(et, ei);
        r.tbp_storage = (r.echo_peak_time - detail::intensity_centroid(h.times, h.E_in)) * bw;
    }
    try {
        const auto f = envelope_fidelity(h.times, echo, h.E_in);
        r.envelope_fidelity = f.value;
        r.fidelity_lag = f.lag;
    } catch (const undefined_metric& ex) {
        r.status = ex.what();
    }
    try {
        const auto c = chirp_estimate(et, ev);
        r.chirp_estimate = c.frequency;
        const int direction = protocol.initial_sign * medium.orientations.front().sign;
        if (r.beta > 0.0)
            r.chirp_predicted = oracle::echo_frequency(r.beta, c.peak_time - flip, direction);
    } catch (const undefined_metric& ex) {
        if (r.status == "ok")
            r.status = ex.what();
    }
    return r;
}

//
// Sweeps
//

template <class Value>
struct SweepRow
{
    Value value{};
    std::optional<RunReport> report;
    std::string error;
};

/// Evaluates `fn(value)` for every value, optionally on `threads` workers.
/// Row order follows `values`; a throwing row records its message and the
/// sweep continues.
template <class Value, class Fn>
std::vector<SweepRow<Value>> sweep(std::span<const Value> values, Fn&& fn, int threads = 1)
{
    std::vector<SweepRow<Value>> rows(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            rows[i].value = values[i];
            try {
                rows[i].report = fn(values[i]);
            } catch (const std::exception& ex) {
                rows[i].error = ex.what();
            }
        }
    };
    const auto n = static_cast<std::size_t>(std::max(1, threads));
    if (n == 1 || values.size() < 2) {
        worker();
        return rows;
    }
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < std::min(n, values.size()); ++k)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    return rows;
}

} // namespace gem
