#pragma once

#include "spinclock/dicke.hpp"
#include "spinclock/metrics.hpp"
#include "spinclock/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

// State-preparation protocols: unitary one-axis-twisting squeezing with
// optimal-shear search, and measurement-based (QND) conditional squeezing
// at the Gaussian-moment level with feedback rotation beta.

namespace spinclock {

struct OatOptimum {
    double best_shear = 0.0;  // chi*t minimizing xi_R^2
    SqueezingReport report;
};

namespace detail {

inline double wineland_xi_r_sq(int n_atoms, double shear) {
    const DickeState psi = oat_evolve(css(n_atoms, 0.5 * kPi, 0.0), shear);
    try {
        const SqueezingReport rep = squeezing_report(psi);
        return 1.0 / rep.wineland_inv_sq;
    } catch (const std::domain_error&) {
        return std::numeric_limits<double>::infinity();  // contrast collapsed
    }
}

}  // namespace detail

// Scans chi*t to minimize the Wineland parameter of an equatorial CSS evolved
// under OAT: coarse grid, then golden-section refinement to rel. tol 1e-4.
inline OatOptimum oat_squeeze_optimal(int n_atoms) {
    if (n_atoms < 2) throw std::invalid_argument("oat_squeeze_optimal: need N >= 2");

    // coarse scan: log-spaced through the squeezing regime, linear beyond
    std::vector<double> grid;
    for (int i = 0; i < 160; ++i) grid.push_back(1e-5 * std::pow(0.1 / 1e-5, i / 159.0));
    for (int i = 1; i <= 240; ++i) grid.push_back(0.1 + (kPi - 0.1) * i / 240.0);

    std::size_t best = 0;
    double fbest = std::numeric_limits<double>::infinity();
    std::vector<double> fvals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        fvals[i] = detail::wineland_xi_r_sq(n_atoms, grid[i]);
        if (fvals[i] < fbest) {
            fbest = fvals[i];
            best = i;
        }
    }

    double a = grid[best > 0 ? best - 1 : 0];
    double b = grid[best + 1 < grid.size() ? best + 1 : grid.size() - 1];
    const double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = detail::wineland_xi_r_sq(n_atoms, x1);
    double f2 = detail::wineland_xi_r_sq(n_atoms, x2);
    while ((b - a) > 1e-4 * std::max(1e-12, 0.5 * (a + b))) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = detail::wineland_xi_r_sq(n_atoms, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = detail::wineland_xi_r_sq(n_atoms, x2);
        }
    }
    OatOptimum opt;
    opt.best_shear = 0.5 * (a + b);
    opt.report = squeezing_report(oat_evolve(css(n_atoms, 0.5 * kPi, 0.0), opt.best_shear));
    return opt;
}

// --- measurement-based (QND) squeezing, Gaussian-moment level -----------------

// Light-field information model. I is the *usable* normalized quantum Fisher
// information of the light (I = 1 resolves the SQL uncertainty); detection
// efficiency q scales the raw interaction information: I = (2/S) 4 slope^2 q.
struct MeasurementModel {
    double light_qfi_normalized = 0.0;  // I >= 0 (usable, efficiency included)
    double detection_efficiency = 1.0;  // q in (0, 1]
    double slope = 0.0;                 // |d alpha / d Sz|

    double raw_info() const { return light_qfi_normalized / detection_efficiency; }
};

inline MeasurementModel measurement_model(int n_atoms, double light_qfi, double efficiency = 1.0) {
    if (light_qfi < 0.0) throw std::invalid_argument("measurement_model: negative light QFI");
    if (efficiency <= 0.0 || efficiency > 1.0)
        throw std::invalid_argument("measurement_model: efficiency must be in (0, 1]");
    MeasurementModel m;
    m.light_qfi_normalized = light_qfi;
    m.detection_efficiency = efficiency;
    const double S = 0.5 * n_atoms;
    m.slope = std::sqrt(light_qfi * S / (8.0 * efficiency));
    return m;
}

struct GaussianPrior {
    double mean_sz = 0.0;
    double var_sz = 0.0;
};

struct ConditionalState {
    int n_atoms = 0;
    double posterior_mean_sz = 0.0;
    double posterior_var_sz = 0.0;
    double feedback_angle_beta = 0.0;  // rotation that recenters the mean to Sz = 0
    double var_antisqueezed = 0.0;     // back-action quadrature, set by the raw information
    double contrast = 1.0;             // QND modeled lossless
    bool feedback_warning = false;

    double xi_minus_sq() const { return posterior_var_sz / (0.25 * n_atoms); }
    double xi_plus_sq() const { return var_antisqueezed / (0.25 * n_atoms); }
};

// Gaussian readout noise variance equivalent to usable information I: (S/2)/I
inline double measurement_noise_var(int n_atoms, const MeasurementModel& model) {
    if (model.light_qfi_normalized < 0.0)
        throw std::invalid_argument("measurement_squeeze: negative light QFI");
    if (model.light_qfi_normalized == 0.0) return std::numeric_limits<double>::infinity();
    return (0.25 * n_atoms) / model.light_qfi_normalized;
}

// Deterministic Bayesian update for a given photon-record outcome y = Sz + noise.
inline ConditionalState conditional_update(int n_atoms, const GaussianPrior& prior,
                                           const MeasurementModel& model, double outcome_y) {
    const double S = 0.5 * n_atoms;
    const double noise_var = measurement_noise_var(n_atoms, model);
    ConditionalState out;
    out.n_atoms = n_atoms;
    if (std::isinf(noise_var)) {
        out.posterior_mean_sz = prior.mean_sz;
        out.posterior_var_sz = prior.var_sz;
    } else {
        const double k = prior.var_sz / (prior.var_sz + noise_var);  // Kalman gain
        out.posterior_mean_sz = prior.mean_sz + k * (outcome_y - prior.mean_sz);
        out.posterior_var_sz = (1.0 - k) * prior.var_sz;
    }
    out.var_antisqueezed = (0.5 * S) * (1.0 + model.raw_info());
    out.feedback_angle_beta = -out.posterior_mean_sz / S;
    return out;
}

// QND measurement of an equatorial CSS: samples the photon-record outcome from
// its marginal N(0, S/2 + noise_var), then conditions. xi^2 = 1/(1 + I) exactly.
inline ConditionalState measurement_squeeze(int n_atoms, const MeasurementModel& model,
                                            std::uint64_t sampled_outcome_seed) {
    if (n_atoms < 1) throw std::invalid_argument("measurement_squeeze: n_atoms must be >= 1");
    const double prior_var = 0.25 * n_atoms;  // CSS projection variance S/2
    const double noise_var = measurement_noise_var(n_atoms, model);
    Rng rng(sampled_outcome_seed, "measurement_squeeze", 0);
    double outcome = 0.0;
    if (!std::isinf(noise_var)) outcome = rng.gaussian(0.0, std::sqrt(prior_var + noise_var));
    return conditional_update(n_atoms, GaussianPrior{0.0, prior_var}, model, outcome);
}

// Rotates the posterior mean by beta about the squeezing-compatible axis
// (linearized: mean shift beta*S); variances unchanged. Flags the result when
// beta exceeds the small-angle validity window |beta| <= 5 sqrt(var)/S.
inline ConditionalState apply_feedback(const ConditionalState& state, double beta) {
    if (!(std::abs(beta) < kPi)) throw std::invalid_argument("apply_feedback: |beta| must be < pi");
    const double S = 0.5 * state.n_atoms;
    ConditionalState out = state;
    out.posterior_mean_sz += beta * S;
    out.feedback_angle_beta = -out.posterior_mean_sz / S;
    if (std::abs(beta) > 5.0 * std::sqrt(state.posterior_var_sz) / S) out.feedback_warning = true;
    return out;
}

}  // namespace spinclock
