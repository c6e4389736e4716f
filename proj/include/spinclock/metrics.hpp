#pragma once

#include "spinclock/dicke.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

// Metrological resource quantification: quantum Fisher information,
// squeezing parameters, Wineland parameter, gain and scaling fits.

namespace spinclock {

inline double db_from_linear(double g) { return 10.0 * std::log10(g); }
inline double linear_from_db(double db) { return std::pow(10.0, db / 10.0); }

// F_Q = 4 Var(G) for a pure state; Cramer-Rao phase bound is 1/sqrt(F_Q)
inline double qfi_pure(const DickeState& psi, const CollectiveOperator& generator) {
    const auto& g = generator.matrix;
    if (g.rows() != psi.dim() || g.cols() != psi.dim())
        throw std::invalid_argument("qfi_pure: generator dimension mismatch");
    if (!g.isApprox(g.adjoint(), 1e-10))
        throw std::invalid_argument("qfi_pure: generator must be Hermitian");
    Eigen::Map<const Eigen::VectorXcd> v(psi.amps.data(), psi.dim());
    Eigen::VectorXcd w = g * v;
    const double mean = std::real(v.dot(w));  // Eigen dot conjugates the left side
    return 4.0 * (w.squaredNorm() - mean * mean);
}

// best QFI over linear generators n . S: 4x largest eigenvalue of the spin covariance
inline double qfi_optimal_linear(const DickeState& psi) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(spin_covariance(psi));
    return 4.0 * es.eigenvalues().maxCoeff();
}

// Mixed-state QFI by eigendecomposition; eigenvalue pairs with p_i + p_j below
// threshold are skipped.
inline double qfi_mixed(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& generator,
                        double threshold = 1e-12) {
    if (!generator.isApprox(generator.adjoint(), 1e-10))
        throw std::invalid_argument("qfi_mixed: generator must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    const auto& p = es.eigenvalues();
    const Eigen::MatrixXcd g = es.eigenvectors().adjoint() * generator * es.eigenvectors();
    const int d = static_cast<int>(p.size());
    double f = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double denom = p(i) + p(j);
            if (denom < threshold) continue;
            const double num = p(i) - p(j);
            f += 2.0 * num * num / denom * std::norm(g(i, j));
        }
    }
    return f;
}

struct SqueezingReport {
    int n_atoms = 0;
    double xi_minus_sq = 1.0;     // squeezed variance, normalized to the SQL
    double xi_plus_sq = 1.0;      // anti-squeezed variance
    double contrast = 1.0;        // C = |<S>|/S
    double wineland_inv_sq = 1.0; // xi_R^-2 = C^2/xi_-^2 = G
    double qfi = 0.0;             // optimal linear-generator QFI
    double gain_db = 0.0;         // 10 log10 G
};

// xi-+^2 = (2/S)(Delta S_min/max)^2, C = |<S>|/S, xi_R^-2 = C^2/xi_-^2
inline SqueezingReport squeezing_report(const DickeState& psi) {
    const SpinMoments mom = moments(psi);
    const double S = psi.spin();
    SqueezingReport rep;
    rep.n_atoms = psi.n_atoms;
    rep.xi_minus_sq = (2.0 / S) * mom.var_min;
    rep.xi_plus_sq = (2.0 / S) * mom.var_max;
    rep.contrast = mom.mean.norm() / S;
    rep.wineland_inv_sq = rep.contrast * rep.contrast / rep.xi_minus_sq;
    rep.qfi = qfi_optimal_linear(psi);
    rep.gain_db = db_from_linear(rep.wineland_inv_sq);
    return rep;
}

// true iff G <= F_Q/N within tolerance (Cramer-Rao saturation bound)
inline bool gain_bound_check(const SqueezingReport& rep, double tol = 1e-9) {
    return rep.wineland_inv_sq <= rep.qfi / rep.n_atoms + tol;
}

inline const char* metrics_csv_header() {
    return "N,xi_minus_sq,xi_plus_sq,contrast,wineland_inv_sq,qfi,gain_db";
}

inline std::string metrics_csv_row(const SqueezingReport& rep) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", rep.n_atoms,
                  rep.xi_minus_sq, rep.xi_plus_sq, rep.contrast, rep.wineland_inv_sq, rep.qfi,
                  rep.gain_db);
    return buf;
}

struct ScalingFit {
    double exponent = 0.0;   // slope of log10 G vs log10 N
    double offset_db = 0.0;  // mean distance from the Heisenberg limit, dB
    double residual = 0.0;   // RMS fit residual in dB
};

// least-squares fit of gain vs N on log-log axes;
// offset_db = mean of (10 log10 N - gain_db)
inline ScalingFit heisenberg_scaling_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("heisenberg_scaling_fit: need >= 3 points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, off = 0.0;
    const double n = static_cast<double>(points.size());
    for (const auto& [n_atoms, gain_db] : points) {
        if (n_atoms <= 0.0) throw std::invalid_argument("heisenberg_scaling_fit: N must be positive");
        const double x = std::log10(n_atoms);
        const double y = gain_db / 10.0;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        off += 10.0 * x - gain_db;
    }
    const double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-12 * n * sxx)
        throw std::invalid_argument("heisenberg_scaling_fit: degenerate N values");
    ScalingFit fit;
    fit.exponent = (n * sxy - sx * sy) / det;
    const double intercept = (sy * sxx - sx * sxy) / det;
    fit.offset_db = off / n;
    double ss = 0.0;
    for (const auto& [n_atoms, gain_db] : points) {
        const double pred = 10.0 * (fit.exponent * std::log10(n_atoms) + intercept);
        ss += (gain_db - pred) * (gain_db - pred);
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

}  // namespace spinclock
