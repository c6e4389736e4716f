#pragma once

#include "spinclock/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

// Local-oscillator and atomic decoherence parameters, plus time-domain
// synthesis of power-law fractional-frequency noise.

namespace spinclock {

struct NoiseModel {
    // LO dephasing rate (s^-1). Convenience parameterization: the clock maps it
    // to an extra white-FM level pinned at the configured Ramsey time so that
    // std(phi_LO(tau_R)) = tau_R * Gamma_LO exactly.
    double gamma_lo = 0.0;
    // one-sided fractional-frequency PSD S_y(f) = h0 + h_minus1/f + h_minus2/f^2
    double h0 = 0.0;
    double h_minus1 = 0.0;
    double h_minus2 = 0.0;
    // atomic rates (s^-1)
    double gamma_nat = 0.0;
    double gamma_deph = 0.0;
    double gamma_loss = 0.0;

    bool any_lo_noise() const { return gamma_lo > 0.0 || h0 > 0.0 || h_minus1 > 0.0 || h_minus2 > 0.0; }
    double gamma_atomic() const { return gamma_nat + gamma_deph; }

    void validate() const {
        if (gamma_lo < 0.0 || h0 < 0.0 || h_minus1 < 0.0 || h_minus2 < 0.0 || gamma_nat < 0.0 ||
            gamma_deph < 0.0 || gamma_loss < 0.0)
            throw std::invalid_argument("NoiseModel: negative coefficients");
    }
};

// Flicker FM is approximated by a sum of first-order (AR(1)/Ornstein-Uhlenbeck)
// processes with log-spaced corner times, half a decade apart, spanning at
// least four decades around the synthesis band. Equal per-pole variance
// V = h_minus1 * ln(r) makes the summed Lorentzians approximate S_y = h_minus1/f
// inside the band.
struct FlickerBank {
    std::vector<double> a;        // AR(1) coefficients exp(-dt/tau_j)
    std::vector<double> innov;    // innovation std per pole
    std::vector<double> x;        // state
    double pole_variance = 0.0;

    FlickerBank(double h_minus1, double duration, double dt, Rng& rng) {
        if (h_minus1 <= 0.0) return;
        const double ratio = std::sqrt(10.0);
        const double tau_min = 2.0 * dt;
        const double tau_max = std::max(2.0 * duration, tau_min * 1e4);  // >= 4 decades
        pole_variance = h_minus1 * std::log(ratio);
        for (double tau = tau_min; tau <= tau_max * 1.0001; tau *= ratio) {
            const double ak = std::exp(-dt / tau);
            a.push_back(ak);
            innov.push_back(std::sqrt(pole_variance * (1.0 - ak * ak)));
            x.push_back(rng.gaussian(0.0, std::sqrt(pole_variance)));  // stationary start
        }
    }

    double step(Rng& rng) {
        double sum = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] = a[j] * x[j] + rng.gaussian(0.0, innov[j]);
            sum += x[j];
        }
        return sum;
    }
};

// Sum of white-FM, random-walk-FM and flicker-FM (filtered-process
// approximation); deterministic per seed. Returns round(duration/dt) samples
// of fractional frequency at spacing dt. gamma_lo is NOT applied here (the
// clock folds it into h0 at its Ramsey time).
inline std::vector<double> synthesize_lo(const NoiseModel& noise, double duration, double dt,
                                         std::uint64_t seed) {
    noise.validate();
    if (dt <= 0.0) throw std::invalid_argument("synthesize_lo: dt must be > 0");
    if (duration < dt) throw std::invalid_argument("synthesize_lo: duration must be >= dt");
    const std::size_t n = static_cast<std::size_t>(std::llround(duration / dt));
    std::vector<double> y(n, 0.0);
    if (noise.h0 == 0.0 && noise.h_minus1 == 0.0 && noise.h_minus2 == 0.0) return y;

    Rng rng(seed, "lo_noise", 0);
    const double white_sigma = noise.h0 > 0.0 ? std::sqrt(noise.h0 / (2.0 * dt)) : 0.0;
    // random-walk FM: S_y = h_minus2/f^2  <=>  increment variance 2 pi^2 h_minus2 dt
    const double rw_sigma = noise.h_minus2 > 0.0 ? std::sqrt(2.0 * kPi * kPi * noise.h_minus2 * dt) : 0.0;
    FlickerBank flicker(noise.h_minus1, duration, dt, rng);

    double rw = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double v = 0.0;
        if (white_sigma > 0.0) v += rng.gaussian(0.0, white_sigma);
        if (rw_sigma > 0.0) {
            rw += rng.gaussian(0.0, rw_sigma);
            v += rw;
        }
        if (!flicker.x.empty()) v += flicker.step(rng);
        y[k] = v;
    }
    return y;
}

// one-sided model PSD of the synthesized flicker bank, continuum Lorentzians
inline double flicker_bank_psd(const NoiseModel& noise, double duration, double dt, double f) {
    if (noise.h_minus1 <= 0.0) return 0.0;
    const double ratio = std::sqrt(10.0);
    const double tau_min = 2.0 * dt;
    const double tau_max = std::max(2.0 * duration, tau_min * 1e4);
    const double v = noise.h_minus1 * std::log(ratio);
    double s = 0.0;
    for (double tau = tau_min; tau <= tau_max * 1.0001; tau *= ratio) {
        const double w = 2.0 * kPi * f * tau;
        s += 4.0 * v * tau / (1.0 + w * w);
    }
    return s;
}

}  // namespace spinclock
