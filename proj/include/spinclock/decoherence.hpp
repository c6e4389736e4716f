#pragma once

#include "spinclock/dicke.hpp"
#include "spinclock/noise.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

// Decoherence channels and decoherence-limited gain ceilings: exact collective
// dephasing on density matrices (small-N validation), moment-level individual
// decoherence, and the fixed-bandwidth maximal-gain curve.

namespace spinclock {

// guard-rail violations that the CLI maps to exit code 3
struct numerical_guard_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kDensityMatrixMaxAtoms = 64;

struct DickeDensityMatrix {
    int n_atoms = 0;
    Eigen::MatrixXcd rho;

    double spin() const { return 0.5 * n_atoms; }
    double m_at(int i) const { return static_cast<double>(i) - spin(); }
};

inline DickeDensityMatrix density_from_pure(const DickeState& psi) {
    if (psi.n_atoms > kDensityMatrixMaxAtoms)
        throw numerical_guard_error("density matrix channel limited to N <= 64");
    Eigen::Map<const Eigen::VectorXcd> v(psi.amps.data(), psi.dim());
    DickeDensityMatrix rho;
    rho.n_atoms = psi.n_atoms;
    rho.rho = v * v.adjoint();
    return rho;
}

// rho_{m,m'} *= exp(-Gamma t (m - m')^2 / 2); diagonal untouched
inline DickeDensityMatrix collective_dephase(const DickeDensityMatrix& rho, double rate, double t) {
    if (rate < 0.0 || t < 0.0) throw std::invalid_argument("collective_dephase: negative rate or time");
    DickeDensityMatrix out = rho;
    const int d = rho.n_atoms + 1;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double dm = rho.m_at(i) - rho.m_at(j);
            out.rho(i, j) *= std::exp(-0.5 * rate * t * dm * dm);
        }
    }
    return out;
}

inline Eigen::Vector3d mean_spin(const DickeDensityMatrix& rho) {
    const auto sx = sx_op(rho.n_atoms).matrix;
    const auto sy = sy_op(rho.n_atoms).matrix;
    const auto sz = sz_op(rho.n_atoms).matrix;
    return {(rho.rho * sx).trace().real(), (rho.rho * sy).trace().real(),
            (rho.rho * sz).trace().real()};
}

// --- moment-level individual decoherence ---------------------------------------

// Gaussian summary of a collective state used by the moment-level clock paths.
struct GaussianMoments {
    double n_atoms = 0.0;    // expected surviving atom number (fractional after loss)
    double contrast = 1.0;   // C = |<S>|/S
    double var_minus = 0.0;  // squeezed transverse variance, absolute Sz^2 units
    double var_plus = 0.0;   // anti-squeezed transverse variance

    double spin() const { return 0.5 * n_atoms; }
    double xi_minus_sq() const { return var_minus / (0.5 * spin()); }
    double xi_plus_sq() const { return var_plus / (0.5 * spin()); }
    double wineland_inv_sq() const { return contrast * contrast / xi_minus_sq(); }
};

// Mean spin decays at Gamma_nat + Gamma_deph; atoms are lost at Gamma_loss;
// transverse variances relax toward the CSS value of the surviving ensemble:
//   Var -> Var e^(-2 Gamma tau) + (S'/2)(1 - e^(-2 Gamma tau))
inline GaussianMoments moment_decoherence(const GaussianMoments& in, double gamma_nat,
                                          double gamma_deph, double gamma_loss, double tau) {
    if (gamma_nat < 0.0 || gamma_deph < 0.0 || gamma_loss < 0.0 || tau < 0.0)
        throw std::invalid_argument("moment_decoherence: negative rate or time");
    const double gamma = gamma_nat + gamma_deph;
    const double decay = std::exp(-gamma * tau);
    GaussianMoments out = in;
    out.n_atoms = in.n_atoms * std::exp(-gamma_loss * tau);
    out.contrast = in.contrast * decay;
    const double css_var = 0.5 * out.spin();
    const double mix = decay * decay;
    out.var_minus = in.var_minus * mix + css_var * (1.0 - mix);
    out.var_plus = in.var_plus * mix + css_var * (1.0 - mix);
    return out;
}

// --- fixed-bandwidth gain ceiling ----------------------------------------------

struct GainCeiling {
    int n_atoms = 0;
    double tau = 0.0;
    double gamma_total = 0.0;  // Gamma_nat + Gamma_deph + Gamma_loss
    double eta = 1.0;          // e^(-gamma_total tau)
    double g_max = 0.0;        // linear gain units
};

// g_max = min(N, eta^2/(1 - eta^2)): the Heisenberg cap and the
// uncorrelated-dephasing plateau.
inline GainCeiling gain_ceiling(int n_atoms, double tau, double gamma_nat, double gamma_deph,
                                double gamma_loss) {
    if (n_atoms < 1) throw std::invalid_argument("gain_ceiling: n_atoms must be >= 1");
    if (tau <= 0.0) throw std::invalid_argument("gain_ceiling: tau must be > 0");
    if (gamma_nat < 0.0 || gamma_deph < 0.0 || gamma_loss < 0.0)
        throw std::invalid_argument("gain_ceiling: negative rates");
    GainCeiling out;
    out.n_atoms = n_atoms;
    out.tau = tau;
    out.gamma_total = gamma_nat + gamma_deph + gamma_loss;
    out.eta = std::exp(-out.gamma_total * tau);
    const double eta_sq = out.eta * out.eta;
    const double plateau =
        eta_sq < 1.0 ? eta_sq / (1.0 - eta_sq) : std::numeric_limits<double>::infinity();
    out.g_max = std::min(static_cast<double>(n_atoms), plateau);
    return out;
}

inline const char* ceiling_csv_header() { return "N,tau,g_max_db"; }

inline std::string ceiling_csv_row(const GainCeiling& c) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g", c.n_atoms, c.tau,
                  10.0 * std::log10(c.g_max));
    return buf;
}

}  // namespace spinclock
