#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

// Overlapping Allan deviation of a fractional-frequency series.

namespace spinclock {

struct AllanSeries {
    std::vector<double> tau;            // averaging times, strictly increasing
    std::vector<double> adev;           // overlapping Allan deviation
    std::vector<double> ci_half_width;  // 1-sigma half widths, chi^2/edf approximation
};

// octave-spaced averaging factors m = 1, 2, 4, ... with at least a few
// second differences available at the largest m
inline std::vector<int> allan_octaves(std::size_t n_samples, int min_terms = 4) {
    std::vector<int> m_list;
    for (int m = 1; 2 * static_cast<std::size_t>(m) + static_cast<std::size_t>(min_terms) <= n_samples;
         m *= 2)
        m_list.push_back(m);
    return m_list;
}

// Overlapping estimator on y (fractional frequency, spacing tau0):
//   sigma_y^2(m tau0) = sum_j (x[j+2m] - 2x[j+m] + x[j])^2 / (2 m^2 tau0^2 (M - 2m + 1))
// with x the integrated phase (time error). Confidence via chi-squared with
// the white-FM equivalent-degrees-of-freedom approximation
//   edf = (3(Np-1)/(2m) - 2(Np-2)/Np) * 4m^2/(4m^2+5),  Np = number of phase points.
inline AllanSeries allan_deviation(const std::vector<double>& y, double tau0,
                                   const std::vector<int>& m_list) {
    if (tau0 <= 0.0) throw std::invalid_argument("allan_deviation: tau0 must be > 0");
    const std::size_t big_m = y.size();
    if (big_m < 2) throw std::invalid_argument("allan_deviation: need at least 2 samples");

    std::vector<double> x(big_m + 1, 0.0);
    for (std::size_t k = 0; k < big_m; ++k) x[k + 1] = x[k] + y[k] * tau0;

    AllanSeries out;
    for (int m : m_list) {
        if (m < 1 || 2 * static_cast<std::size_t>(m) > big_m)
            throw std::invalid_argument("allan_deviation: insufficient data for requested tau");
        const std::size_t terms = big_m - 2 * static_cast<std::size_t>(m) + 1;
        double acc = 0.0;
        for (std::size_t j = 0; j < terms; ++j) {
            const double d = x[j + 2 * m] - 2.0 * x[j + m] + x[j];
            acc += d * d;
        }
        const double tau = m * tau0;
        const double avar = acc / (2.0 * tau * tau * terms);
        const double adev = std::sqrt(avar);
        const double np = static_cast<double>(big_m + 1);
        double edf = (3.0 * (np - 1.0) / (2.0 * m) - 2.0 * (np - 2.0) / np) * 4.0 * m * m /
                     (4.0 * m * m + 5.0);
        if (edf < 1.0) edf = 1.0;
        out.tau.push_back(tau);
        out.adev.push_back(adev);
        out.ci_half_width.push_back(adev / std::sqrt(2.0 * edf));
    }
    return out;
}

inline AllanSeries allan_deviation(const std::vector<double>& y, double tau0) {
    return allan_deviation(y, tau0, allan_octaves(y.size()));
}

}  // namespace spinclock
