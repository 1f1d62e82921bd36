#pragma once

#include <gem/gamma.hpp>
#include <gem/spectral.hpp>

#include <functional>

namespace gem {

/// Closed-form large-optical-depth solution of the gradient echo, used as an
/// independent check on the integrator. Conventions:
///   * temporal spectra are F(w) = integral f(t) e^{-iwt} dt;
///   * spatial spectra are E(k) = integral E(z) e^{+ikz} dz;
///   * the default flip takes the controlled detuning from +eta*z to -eta*z
///     (the -i eta z alpha term becomes +i eta z alpha).
namespace oracle {

using signal = std::function<complex(double)>;

inline signal as_signal(const PulseSpec& pulse)
{
    return [pulse](double t) { return pulse(t); };
}

//
// Polarization kernel
//

/// Parameters of the atom whose polarization is reconstructed.
struct KernelAtom
{
    double g = 1.0;
    double gamma = 0.0;
    double detuning = 0.0;           // controlled part at sign +1 (sigma*eta*z)
    double static_offset = 0.0;      // intrinsic class offset, never flipped
    std::vector<double> flip_times;  // sign reversals of `detuning`
    int initial_sign = +1;
};

/// alpha(z, t) = i g integral_{-inf}^{t} exp(-gamma(t-t') - i Phi(t, t')) E(z, t') dt'
/// where Phi is the detuning phase accumulated between t' and t. The lower
/// limit is the first history sample; trapezoid quadrature.
inline complex polarization_kernel(std::span<const double> times, std::span<const complex> E_local,
                                   double t, const KernelAtom& atom)
{
    if (times.size() != E_local.size() || times.empty())
        throw invalid_parameter("kernel history must be a non-empty (time, field) series");
    if (t > times.back() + 1e-12 * std::max(1.0, std::abs(t)))
        throw invalid_parameter("kernel history shorter than requested time");
    if (t < times.front())
        return {};

    // accumulated detuning phase from times.front() to x
    auto phase = [&](double x) {
        double acc = atom.static_offset * (x - times.front());
        double from = times.front();
        int sign = atom.initial_sign;
        for (double f : atom.flip_times) {
            if (f <= times.front()) {
                sign = -sign;
                continue;
            }
            if (f >= x)
                break;
            acc += sign * atom.detuning * (f - from);
            from = f;
            sign = -sign;
        }
        return acc + sign * atom.detuning * (x - from);
    };
    const double phi_t = phase(t);

    auto integrand = [&](double tp, complex e) {
        return std::exp(complex{-atom.gamma * (t - tp), -(phi_t - phase(tp))}) * e;
    };

    complex acc{};
    std::size_t n = 1;
    for (; n < times.size() && times[n] <= t; ++n)
        acc += 0.5 * (times[n] - times[n - 1]) *
               (integrand(times[n - 1], E_local[n - 1]) + integrand(times[n], E_local[n]));
    if (n < times.size() && times[n - 1] < t) {
        const double frac = (t - times[n - 1]) / (times[n] - times[n - 1]);
        const complex e_t = E_local[n - 1] + frac * (E_local[n] - E_local[n - 1]);
        acc += 0.5 * (t - times[n - 1]) * (integrand(times[n - 1], E_local[n - 1]) + integrand(t, e_t));
    }
    return complex{0.0, atom.g} * acc;
}

//
// Spectral transfer
//

struct TransferEvaluation
{
    std::vector<double> omega;
    std::vector<complex> transfer;
    std::vector<complex> field;
    std::vector<double> attenuation; // |T|
    std::vector<double> phase;       // arg T
};

/// E(z, w) = F_in(w) exp[-pi beta (H(w + eta z) - H(w - eta z0)) + i beta ln|(w + eta z)/(w - eta z0)|].
inline TransferEvaluation spectral_transfer(std::span<const double> omegas, std::span<const complex> F_in,
                                            double z, const MediumParams& medium)
{
    if (F_in.size() != omegas.size())
        throw invalid_parameter("spectrum and frequency grid sizes differ");
    const double beta = medium.beta();
    const double lo = -medium.eta * z;
    const double hi = medium.eta * medium.z_half;
    TransferEvaluation out;
    out.omega.assign(omegas.begin(), omegas.end());
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        const double w = omegas[k];
        if (beta != 0.0 && (w == lo || w == hi))
            throw invalid_parameter("frequency grid hits a transfer singularity; use a half-offset grid");
        const double heaviside = (w + medium.eta * z > 0.0 ? 1.0 : 0.0) - (w - hi > 0.0 ? 1.0 : 0.0);
        const double log_term = beta == 0.0 ? 0.0 : std::log(std::abs((w + medium.eta * z) / (w - hi)));
        const complex T = std::exp(complex{-pi * beta * heaviside, beta * log_term});
        out.transfer.push_back(T);
        out.field.push_back(F_in[k] * T);
        out.attenuation.push_back(std::abs(T));
        out.phase.push_back(std::arg(T));
    }
    return out;
}

//
// Stored field at the flip
//

/// Applied broadening half-width in cycles times the pulse duration.
inline double broadening_ratio(const MediumParams& medium, double t_pulse)
{
    return medium.half_bandwidth() * t_pulse / two_pi;
}

struct FlipFieldResult
{
    std::vector<double> k;
    std::vector<complex> value;
    double ratio = 0.0;
    bool valid = true;
    std::string warning;
};

/// E(k, t=0) = -f_in(-k/eta) sgn(k) beta |k/eta|^{-2-i beta} Gamma(i beta)
///             (|k/eta| cosh(pi beta/2) + (k/eta) sinh(pi beta/2)).
/// k = 0 is singular and returns 0.
inline FlipFieldResult flip_time_field(const signal& f_in, const MediumParams& medium, std::span<const double> ks,
                                       double t_pulse, double validity_threshold = 2.0)
{
    FlipFieldResult out;
    out.k.assign(ks.begin(), ks.end());
    out.ratio = broadening_ratio(medium, t_pulse);
    if (out.ratio < validity_threshold) {
        out.valid = false;
        out.warning = "broadening-to-bandwidth ratio below validity threshold";
    }
    const double beta = medium.beta();
    const complex gamma_ib = beta > 0.0 ? complex_gamma({0.0, beta}) : complex{};
    const double ch = std::cosh(0.5 * pi * beta);
    const double sh = std::sinh(0.5 * pi * beta);
    for (double k : ks) {
        const double x = k / medium.eta;
        if (x == 0.0 || beta == 0.0) {
            out.value.emplace_back();
            continue;
        }
        const double ax = std::abs(x);
        const complex power = std::exp(complex{-2.0, -beta} * std::log(ax));
        const double sgn = x > 0.0 ? 1.0 : -1.0;
        out.value.push_back(-f_in(-x) * sgn * beta * power * gamma_ib * (ax * ch + x * sh));
    }
    return out;
}

//
// Input-output map
//

struct OutputMap
{
    std::vector<double> times;
    std::vector<complex> values;
    std::vector<std::size_t> skipped; // indices of log-singular samples (value set to 0)
};

/// Unit-modulus factor multiplying f_in(-t). `direction` is the sign of the
/// controlled detuning before the flip.
inline complex echo_factor(double beta, double t, int direction = +1)
{
    const complex f = std::exp(complex{0.0, -2.0 * beta * std::log(std::abs(t))}) / gamma_phase_ratio(beta);
    return direction > 0 ? f : std::conj(f);
}

/// Instantaneous frequency of the echo factor: d/dt arg = -2 beta / t for
/// the default flip direction.
inline double echo_frequency(double beta, double t, int direction = +1)
{
    return -direction * 2.0 * beta / t;
}

/// f_out(t) = f_in(-t) |t|^{-2i beta} Gamma(-i beta)/Gamma(i beta) (flip at t = 0).
inline OutputMap output_map(const signal& f_in, const MediumParams& medium, std::span<const double> times,
                            int direction = +1)
{
    const double beta = medium.beta();
    if (!(beta > 0.0))
        throw invalid_parameter("output map needs a positive optical depth");
    OutputMap out;
    out.times.assign(times.begin(), times.end());
    out.values.reserve(times.size());
    for (std::size_t n = 0; n < times.size(); ++n) {
        const double t = times[n];
        if (t == 0.0) {
            out.skipped.push_back(n);
            out.values.emplace_back();
            continue;
        }
        out.values.push_back(f_in(-t) * echo_factor(beta, t, direction));
    }
    return out;
}

/// Two memories in series: the second flips at `stage2_flip` (first-memory
/// clock, first flip at 0) and is fed the first memory's output.
inline OutputMap cascade_map(const signal& f_in, const MediumParams& first, const MediumParams& second,
                             std::span<const double> times, double stage2_flip, int direction1 = +1,
                             stage_polarity polarity = stage_polarity::same)
{
    const double b1 = first.beta();
    const double b2 = second.beta();
    if (!(b1 > 0.0 && b2 > 0.0))
        throw invalid_parameter("cascade map needs positive optical depths");
    const int direction2 = polarity == stage_polarity::same ? direction1 : -direction1;
    OutputMap out;
    out.times.assign(times.begin(), times.end());
    out.values.reserve(times.size());
    for (std::size_t n = 0; n < times.size(); ++n) {
        const double tau = times[n] - stage2_flip; // stage-2 clock
        const double s = stage2_flip - tau;        // stage-1 time feeding this sample
        if (tau == 0.0 || s == 0.0) {
            out.skipped.push_back(n);
            out.values.emplace_back();
            continue;
        }
        // f_out2(t) = f_out1(2 T - t) * factor2(t - T)
        out.values.push_back(f_in(-s) * echo_factor(b1, s, direction1) * echo_factor(b2, tau, direction2));
    }
    return out;
}

} // namespace oracle
} // namespace gem
