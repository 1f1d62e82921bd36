#pragma once

#include <gem/core.hpp>

#include <array>

namespace gem {

namespace detail {

// Lanczos approximation, g = 7, n = 9.
inline constexpr double lanczos_g = 7.0;
inline constexpr std::array<double, 9> lanczos_coef{
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

inline complex log_gamma_right(complex s)
{
    // valid for Re(s) >= 0.5
    s -= 1.0;
    complex x = lanczos_coef[0];
    for (std::size_t k = 1; k < lanczos_coef.size(); ++k)
        x += lanczos_coef[k] / (s + static_cast<double>(k));
    const complex t = s + lanczos_g + 0.5;
    return 0.5 * std::log(two_pi) + (s + 0.5) * std::log(t) - t + std::log(x);
}

} // namespace detail

/// Gamma function on the complex plane; reflection handles Re(s) < 1/2.
inline complex complex_gamma(complex s)
{
    if (s.imag() == 0.0 && s.real() <= 0.0 && s.real() == std::floor(s.real()))
        throw pole_error("gamma function pole at nonpositive integer");
    if (s.real() < 0.5) {
        // Gamma(s) = pi / (sin(pi s) Gamma(1 - s))
        const complex sin_term = std::sin(pi * s);
        return pi / (sin_term * std::exp(detail::log_gamma_right(1.0 - s)));
    }
    return std::exp(detail::log_gamma_right(s));
}

/// Gamma(i beta) / Gamma(-i beta); unit modulus for real beta.
inline complex gamma_phase_ratio(double beta)
{
    const complex g = complex_gamma({0.0, beta});
    // conjugate symmetry: Gamma(conj s) = conj Gamma(s)
    return g / std::conj(g);
}

} // namespace gem
