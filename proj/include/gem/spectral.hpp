#pragma once

#include <gem/core.hpp>

#include <numeric>

namespace gem {

/// lo + (k + 1/2) * (hi - lo) / n: keeps nodes off the interval edges.
inline std::vector<double> half_offset_grid(double lo, double hi, std::size_t n)
{
    std::vector<double> out(n);
    const double step = (hi - lo) / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = lo + (static_cast<double>(k) + 0.5) * step;
    return out;
}

inline double trapezoid(std::span<const double> x, std::span<const double> y)
{
    double s = 0.0;
    for (std::size_t k = 1; k < x.size(); ++k)
        s += 0.5 * (y[k] + y[k - 1]) * (x[k] - x[k - 1]);
    return s;
}

/// F(w) = integral f(t) exp(-i w t) dt by the trapezoid rule, so that
/// f(t) = (1/2pi) integral F(w) exp(+i w t) dw.
inline std::vector<complex> temporal_spectrum(std::span<const double> t, std::span<const complex> f,
                                              std::span<const double> omegas)
{
    std::vector<complex> out(omegas.size());
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        complex acc{};
        for (std::size_t n = 0; n < t.size(); ++n) {
            double w = 0.0;
            if (n > 0)
                w += 0.5 * (t[n] - t[n - 1]);
            if (n + 1 < t.size())
                w += 0.5 * (t[n + 1] - t[n]);
            acc += w * f[n] * std::polar(1.0, -omegas[k] * t[n]);
        }
        out[k] = acc;
    }
    return out;
}

/// E(k) = integral E(z) exp(+i k z) dz by the trapezoid rule.
inline std::vector<complex> spatial_spectrum(std::span<const double> z, std::span<const complex> E,
                                             std::span<const double> ks)
{
    std::vector<double> neg(ks.size());
    for (std::size_t k = 0; k < ks.size(); ++k)
        neg[k] = -ks[k];
    return temporal_spectrum(z, E, neg);
}

inline double pearson(std::span<const double> a, std::span<const double> b)
{
    const auto n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

/// Full width at half maximum of a single-peaked, sampled, nonnegative
/// profile, with linear interpolation of the two half-max crossings.
inline double fwhm(std::span<const double> x, std::span<const double> y)
{
    if (x.size() < 3)
        return std::numeric_limits<double>::quiet_NaN();
    const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    const double half = 0.5 * y[peak];
    if (!(half > 0.0))
        return std::numeric_limits<double>::quiet_NaN();
    std::size_t lo = peak;
    while (lo > 0 && y[lo - 1] >= half)
        --lo;
    std::size_t hi = peak;
    while (hi + 1 < y.size() && y[hi + 1] >= half)
        ++hi;
    if (lo == 0 || hi + 1 == y.size())
        return std::numeric_limits<double>::quiet_NaN();
    const double xl = x[lo - 1] + (half - y[lo - 1]) / (y[lo] - y[lo - 1]) * (x[lo] - x[lo - 1]);
    const double xr = x[hi] + (y[hi] - half) / (y[hi] - y[hi + 1]) * (x[hi + 1] - x[hi]);
    return xr - xl;
}

/// Location of the maximum of y refined by a parabola through its neighbours.
inline double refined_peak(std::span<const double> x, std::span<const double> y)
{
    const auto i = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    if (i == 0 || i + 1 >= y.size())
        return x[i];
    const double d = y[i - 1] - 2.0 * y[i] + y[i + 1];
    if (d == 0.0)
        return x[i];
    const double off = 0.5 * (y[i - 1] - y[i + 1]) / d;
    return x[i] + off * 0.5 * (x[i + 1] - x[i - 1]);
}

} // namespace gem
