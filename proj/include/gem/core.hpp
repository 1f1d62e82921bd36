#pragma once

#include <gem/error.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gem {

using complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

//
// Intrinsic (non-reversible) line
//

enum class line_shape { delta, lorentzian, gaussian };

/// Static inhomogeneous line that the gradient flip cannot undo, e.g. the
/// width of a prepared antihole. Sampled as `n_classes` frozen detuning
/// classes over +-truncation*width.
struct IntrinsicLineModel
{
    line_shape shape = line_shape::delta;
    double width = 0.0; // FWHM, angular units
    int n_classes = 1;
    double truncation = 10.0;

    void validate() const
    {
        if (n_classes < 1)
            throw invalid_parameter("intrinsic.n_classes must be >= 1");
        if (n_classes > 1 && shape != line_shape::delta && !(width > 0.0))
            throw invalid_parameter("intrinsic.width must be > 0 when n_classes > 1");
        if (n_classes > 1 && !(truncation > 0.0))
            throw invalid_parameter("intrinsic.truncation must be > 0");
        if (!std::isfinite(width) || width < 0.0)
            throw invalid_parameter("intrinsic.width must be finite and >= 0");
    }

    /// n_classes == 1 collapses any shape to a single unshifted class.
    bool is_delta() const { return shape == line_shape::delta || n_classes == 1; }
};

struct DetuningClasses
{
    std::vector<double> offsets;
    std::vector<double> weights;
};

namespace detail {

inline double line_cdf(line_shape shape, double fwhm, double x)
{
    if (shape == line_shape::lorentzian)
        return 0.5 + std::atan(2.0 * x / fwhm) / pi;
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
    return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2));
}

} // namespace detail

/// Bins the intrinsic line into `n_classes` equal-width cells over the
/// truncated support. Offsets are cell centres, weights the exact line mass
/// per cell, renormalized to 1 and symmetrized.
inline DetuningClasses discretize_line(const IntrinsicLineModel& model)
{
    if (model.n_classes < 1)
        throw invalid_parameter("intrinsic.n_classes must be >= 1");
    if (model.n_classes > 1 && !(model.width > 0.0))
        throw invalid_parameter("intrinsic.width must be > 0 when n_classes > 1");
    model.validate();

    if (model.is_delta())
        return {{0.0}, {1.0}};

    const auto m = static_cast<std::size_t>(model.n_classes);
    const double half = model.truncation * model.width;
    const double cell = 2.0 * half / static_cast<double>(m);

    DetuningClasses out;
    out.offsets.resize(m);
    out.weights.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        out.offsets[k] = (static_cast<double>(k) - 0.5 * static_cast<double>(m - 1)) * cell;
        const double lo = out.offsets[k] - 0.5 * cell;
        const double hi = out.offsets[k] + 0.5 * cell;
        out.weights[k] = detail::line_cdf(model.shape, model.width, hi) -
                         detail::line_cdf(model.shape, model.width, lo);
    }
    for (std::size_t k = 0; k < m / 2; ++k) {
        const double w = 0.5 * (out.weights[k] + out.weights[m - 1 - k]);
        out.weights[k] = out.weights[m - 1 - k] = w;
        out.offsets[m - 1 - k] = -out.offsets[k];
    }
    if (m % 2 == 1)
        out.offsets[m / 2] = 0.0;

    double total = 0.0;
    for (double w : out.weights)
        total += w;
    for (double& w : out.weights)
        w /= total;
    return out;
}

//
// Medium
//

/// One Stark-orientation family: the controlled detuning is sign*eta*z.
struct Orientation
{
    int sign = +1;
    double weight = 1.0;
};

/// How a quoted applied-broadening figure maps to eta*z0.
enum class broadening_convention {
    half_width_cyclic,
    half_width_angular,
    full_width_cyclic,
    full_width_angular
};

/// eta such that the quoted broadening spans the sample [-z_half, z_half].
inline double eta_from_broadening(double value, broadening_convention conv, double z_half)
{
    double half_width_angular = value;
    switch (conv) {
    case broadening_convention::half_width_cyclic: half_width_angular = two_pi * value; break;
    case broadening_convention::half_width_angular: break;
    case broadening_convention::full_width_cyclic: half_width_angular = pi * value; break;
    case broadening_convention::full_width_angular: half_width_angular = 0.5 * value; break;
    }
    return half_width_angular / z_half;
}

struct MediumParams
{
    double g = 1.0;      // coupling
    double N = 0.0;      // line density
    double gamma = 0.0;  // coherence decay rate
    double eta = 1.0;    // detuning gradient
    double z_half = 1.0; // sample spans [-z_half, z_half]
    IntrinsicLineModel intrinsic{};
    std::vector<Orientation> orientations{Orientation{}};

    double beta() const { return g * N / eta; }

    /// Half-width of the applied broadening, eta*z0 (angular).
    double half_bandwidth() const { return eta * z_half; }

    /// Sets N so that g*N/eta equals `beta`.
    void set_beta(double beta)
    {
        if (!(g > 0.0))
            throw invalid_parameter("medium.g must be > 0 to set the optical depth");
        N = beta * eta / g;
    }

    void validate() const
    {
        if (!(eta > 0.0) || !std::isfinite(eta))
            throw invalid_parameter("medium.eta must be > 0");
        if (!(z_half > 0.0) || !std::isfinite(z_half))
            throw invalid_parameter("medium.z_half must be > 0");
        if (!(g >= 0.0) || !std::isfinite(g))
            throw invalid_parameter("medium.g must be >= 0");
        if (!(N >= 0.0) || !std::isfinite(N))
            throw invalid_parameter("medium.N must be >= 0");
        if (!(gamma >= 0.0) || !std::isfinite(gamma))
            throw invalid_parameter("medium.gamma must be >= 0");
        if (!std::isfinite(beta()))
            throw invalid_parameter("medium optical depth is not finite");
        intrinsic.validate();
        if (orientations.empty() || orientations.size() > 2)
            throw invalid_parameter("medium.orientations must list one or two families");
        double total = 0.0;
        for (const auto& o : orientations) {
            if (o.sign != 1 && o.sign != -1)
                throw invalid_parameter("orientation sign must be +1 or -1");
            if (!(o.weight >= 0.0))
                throw invalid_parameter("orientation weights must be >= 0");
            total += o.weight;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw invalid_parameter("orientation weights must sum to 1");
    }
};

//
// Input pulse
//

enum class pulse_shape { gaussian, square, sampled };

/// Input envelope f_in(t) entering at z = -z0:
///   f_in(t) = amplitude * envelope(t - t_center) * exp(i * carrier_offset * t).
/// For gaussian pulses t_pulse is the FWHM of |f_in|^2; for square pulses
/// it is the full duration. Sampled pulses carry absolute times and are
/// interpolated with local cubics (zero outside the sampled range); their
/// t_pulse is only a time scale.
struct PulseSpec
{
    pulse_shape shape = pulse_shape::gaussian;
    double t_pulse = 1.0;
    complex amplitude{1.0, 0.0};
    double t_center = -4.0;
    double carrier_offset = 0.0;
    std::vector<double> sample_times;
    std::vector<complex> sample_values;

    void validate() const
    {
        if (!(t_pulse > 0.0) || !std::isfinite(t_pulse))
            throw invalid_parameter("pulse.duration must be > 0");
        if (!std::isfinite(t_center) || !std::isfinite(carrier_offset))
            throw invalid_parameter("pulse timing must be finite");
        if (shape == pulse_shape::sampled) {
            if (sample_times.size() < 2 || sample_times.size() != sample_values.size())
                throw invalid_parameter("sampled pulse needs >= 2 (time, value) pairs");
            for (std::size_t k = 1; k < sample_times.size(); ++k)
                if (!(sample_times[k] > sample_times[k - 1]))
                    throw invalid_parameter("sampled pulse time base must be strictly increasing");
        }
    }

    complex envelope(double t) const
    {
        switch (shape) {
        case pulse_shape::gaussian: {
            const double x = (t - t_center) / t_pulse;
            return {std::exp(-2.0 * std::numbers::ln2 * x * x), 0.0};
        }
        case pulse_shape::square:
            return std::abs(t - t_center) <= 0.5 * t_pulse ? complex{1.0, 0.0} : complex{};
        case pulse_shape::sampled:
            return interpolate(t);
        }
        return {};
    }

    complex operator()(double t) const
    {
        complex v = amplitude * envelope(t);
        if (carrier_offset != 0.0)
            v *= std::polar(1.0, carrier_offset * t);
        return v;
    }

    /// Closed-form (gaussian/square) or trapezoid (sampled) energy of |f_in|^2.
    double energy() const
    {
        const double a2 = std::norm(amplitude);
        switch (shape) {
        case pulse_shape::gaussian:
            return a2 * t_pulse * std::sqrt(pi / (4.0 * std::numbers::ln2));
        case pulse_shape::square:
            return a2 * t_pulse;
        case pulse_shape::sampled: {
            double e = 0.0;
            for (std::size_t k = 1; k < sample_times.size(); ++k)
                e += 0.5 * (std::norm(sample_values[k]) + std::norm(sample_values[k - 1])) *
                     (sample_times[k] - sample_times[k - 1]);
            return a2 * e;
        }
        }
        return 0.0;
    }

    /// Angular FWHM of the power spectrum; analytic for gaussians only.
    std::optional<double> spectral_fwhm() const
    {
        if (shape == pulse_shape::gaussian)
            return 4.0 * std::numbers::ln2 / t_pulse;
        return std::nullopt;
    }

private:
    complex interpolate(double t) const
    {
        const auto& x = sample_times;
        if (t < x.front() || t > x.back())
            return {};
        const std::size_t n = x.size();
        std::size_t hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), t) - x.begin());
        if (hi >= n)
            return sample_values.back();
        if (hi == 0)
            return sample_values.front();
        // four-point Lagrange stencil around [hi-1, hi]
        std::size_t lo = hi >= 2 ? hi - 2 : 0;
        if (lo + 4 > n)
            lo = n >= 4 ? n - 4 : 0;
        const std::size_t cnt = std::min<std::size_t>(4, n);
        complex v{};
        for (std::size_t i = lo; i < lo + cnt; ++i) {
            double w = 1.0;
            for (std::size_t j = lo; j < lo + cnt; ++j)
                if (j != i)
                    w *= (t - x[j]) / (x[i] - x[j]);
            v += w * sample_values[i];
        }
        return v;
    }
};

inline std::vector<complex> sample_pulse(const PulseSpec& pulse, std::span<const double> times)
{
    pulse.validate();
    std::vector<complex> out;
    out.reserve(times.size());
    for (double t : times)
        out.push_back(pulse(t));
    return out;
}

//
// Grid and protocol
//

struct GridSpec
{
    int n_z = 200;
    double dt = 0.005;
    double t_start = -8.0;
    double t_end = 8.0;
    int store_stride = 20;
    bool allow_unstable = false;
    std::vector<int> probe_cells;

    void validate() const
    {
        if (n_z < 2)
            throw invalid_parameter("grid.n_z must be >= 2");
        if (!(dt > 0.0) || !std::isfinite(dt))
            throw invalid_parameter("grid.dt must be > 0");
        if (!(t_start < 0.0 && 0.0 < t_end))
            throw invalid_parameter("grid window must satisfy t_start < 0 < t_end");
        if (store_stride < 1)
            throw invalid_parameter("grid.store_stride must be >= 1");
        for (int c : probe_cells)
            if (c < 0 || c >= n_z)
                throw invalid_parameter("grid.probe_cells index out of range");
    }

    std::size_t n_steps() const
    {
        return static_cast<std::size_t>(std::llround((t_end - t_start) / dt));
    }
};

enum class stage_polarity { same, opposite };

/// Second memory fed with the first memory's output.
struct CascadeSpec
{
    bool enabled = false;
    stage_polarity polarity = stage_polarity::same;
    /// Stage-2 flip instant in the stage-1 clock; unset means the symmetric
    /// choice that stores the first echo as long as the first memory did.
    std::optional<double> flip_time;
};

struct Protocol
{
    std::vector<double> flip_times{0.0};
    int initial_sign = +1;
    CascadeSpec cascade{};

    void validate(const GridSpec& grid) const
    {
        if (initial_sign != 1 && initial_sign != -1)
            throw invalid_parameter("protocol.initial_sign must be +1 or -1");
        for (std::size_t k = 0; k < flip_times.size(); ++k) {
            if (!(flip_times[k] > grid.t_start && flip_times[k] < grid.t_end))
                throw invalid_parameter("protocol.flips must lie inside (t_start, t_end)");
            if (k > 0 && !(flip_times[k] > flip_times[k - 1]))
                throw invalid_parameter("protocol.flips must be strictly increasing");
        }
    }

    double first_flip() const
    {
        return flip_times.empty() ? std::numeric_limits<double>::infinity() : flip_times.front();
    }
};

//
// Natural units
//

/// Time is measured in t_pulse and length in z0, so t_pulse = z0 = 1.
struct Scales
{
    double time = 1.0;
    double length = 1.0;

    MediumParams to_natural(MediumParams m) const
    {
        m.g *= time;
        m.N *= length;
        m.gamma *= time;
        m.eta *= time * length;
        m.z_half /= length;
        m.intrinsic.width *= time;
        return m;
    }
    MediumParams to_physical(MediumParams m) const
    {
        m.g /= time;
        m.N /= length;
        m.gamma /= time;
        m.eta /= time * length;
        m.z_half *= length;
        m.intrinsic.width /= time;
        return m;
    }
    PulseSpec to_natural(PulseSpec p) const
    {
        p.t_pulse /= time;
        p.t_center /= time;
        p.carrier_offset *= time;
        for (double& t : p.sample_times)
            t /= time;
        return p;
    }
    PulseSpec to_physical(PulseSpec p) const
    {
        p.t_pulse *= time;
        p.t_center *= time;
        p.carrier_offset /= time;
        for (double& t : p.sample_times)
            t *= time;
        return p;
    }
    GridSpec to_natural(GridSpec g) const
    {
        g.dt /= time;
        g.t_start /= time;
        g.t_end /= time;
        return g;
    }
    Protocol to_natural(Protocol p) const
    {
        for (double& t : p.flip_times)
            t /= time;
        if (p.cascade.flip_time)
            *p.cascade.flip_time /= time;
        return p;
    }
};

struct ScaledSystem
{
    MediumParams medium;
    PulseSpec pulse;
    Scales scales;
};

inline ScaledSystem nondimensionalize(const MediumParams& medium, const PulseSpec& pulse)
{
    if (!(pulse.t_pulse > 0.0))
        throw invalid_parameter("pulse.duration must be > 0");
    if (!(medium.z_half > 0.0))
        throw invalid_parameter("medium.z_half must be > 0");
    medium.validate();
    pulse.validate();
    const Scales s{pulse.t_pulse, medium.z_half};
    return {s.to_natural(medium), s.to_natural(pulse), s};
}

inline std::pair<MediumParams, PulseSpec> redimensionalize(const ScaledSystem& sys)
{
    return {sys.scales.to_physical(sys.medium), sys.scales.to_physical(sys.pulse)};
}

} // namespace gem
