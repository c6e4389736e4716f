#pragma once

#include "spinclock/dicke.hpp"
#include "spinclock/metrics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

// Time-reversal (Loschmidt-echo / SATIN) interferometry. The ensemble is
// twisted about the y axis (transverse to both the mean spin and the phase
// axis, the pulse-sandwiched equivalent of the cavity Sz^2 interaction), the
// phase is imprinted as a z rotation, the twist is reversed, and the readout
// measures the quadrature along the echoed displacement. At zero shear this
// is exactly plain Ramsey; at finite shear the displacement is amplified
// while the readout variance stays at the CSS (SQL) level, so detection only
// needs SQL-scale resolution.

namespace spinclock {

struct SatinResult {
    int n_atoms = 0;
    double shear = 0.0;                  // chi*t of the forward twist
    double phase = 0.0;                  // imprinted phase (radians)
    double readout_mean = 0.0;           // mean of the measured quadrature
    double readout_var = 0.0;
    double slope = 0.0;                  // |d<readout>/dphi| at phi -> 0
    double amplification = 0.0;          // slope normalized to the CSS Ramsey slope N/2
    double readout_angle = 0.0;          // measured axis: sin(a) y + cos(a) z
    double detection_noise_sigma = 0.0;  // additive readout noise std, Sz units
    double gain_db = 0.0;                // vs SQL phase variance 1/N
};

// Caches the twist-frame change per N so shear scans do not re-diagonalize.
class SatinEngine {
  public:
    // mismatch scales the backward shear: reversal applies -(1 - mismatch) * shear
    explicit SatinEngine(int n_atoms, double reversal_mismatch = 0.0)
        : n_atoms_(n_atoms),
          mismatch_(reversal_mismatch),
          w_(rotation_matrix(n_atoms, Eigen::Vector3d::UnitX(), -0.5 * kPi)),
          wd_(w_.adjoint()),
          base_twist_(apply_matrix(css(n_atoms, 0.5 * kPi, 0.0), wd_)) {
        if (n_atoms < 2) throw std::invalid_argument("satin: need N >= 2");
    }

    int n_atoms() const { return n_atoms_; }
    const Eigen::MatrixXcd& frame() const { return w_; }

    // pre-imprint state exp(-i shear Sy^2) |CSS_x>
    DickeState twisted_state(double shear) const {
        return apply_matrix(oat_evolve(base_twist_, shear), w_);
    }

    // state after forward twist, phase imprint and reversed twist
    DickeState echoed_state(double shear, double phase) const {
        DickeState psi = oat_evolve(base_twist_, shear);
        psi = apply_matrix(psi, w_);
        for (int i = 0; i < psi.dim(); ++i)
            psi.amps[i] *= std::polar(1.0, -phase * psi.m_at(i));
        psi = apply_matrix(psi, wd_);
        psi = oat_evolve(psi, -(1.0 - mismatch_) * shear);
        return apply_matrix(psi, w_);
    }

    // d<Sy>/dphi and d<Sz>/dphi of the echoed state at phi -> 0,
    // centered finite difference with step 1e-5
    std::pair<double, double> displacement_slopes(double shear) const {
        const double h = 1e-5;
        const DickeState p = echoed_state(shear, h);
        const DickeState m = echoed_state(shear, -h);
        const double ay = (expect_axis(p, Eigen::Vector3d::UnitY()) -
                           expect_axis(m, Eigen::Vector3d::UnitY())) /
                          (2.0 * h);
        const double az = (expect_axis(p, Eigen::Vector3d::UnitZ()) -
                           expect_axis(m, Eigen::Vector3d::UnitZ())) /
                          (2.0 * h);
        return {ay, az};
    }

    SatinResult run(double shear, double phase, double detection_noise_sigma) const {
        if (shear < 0.0) throw std::invalid_argument("satin_run: shear must be >= 0");
        SatinResult res;
        res.n_atoms = n_atoms_;
        res.shear = shear;
        res.phase = phase;
        res.detection_noise_sigma = detection_noise_sigma;

        const auto [ay, az] = displacement_slopes(shear);
        res.slope = std::hypot(ay, az);
        res.readout_angle = std::atan2(ay, az);
        res.amplification = res.slope / (0.5 * n_atoms_);
        const Eigen::Vector3d maxis(0.0, std::sin(res.readout_angle), std::cos(res.readout_angle));

        const DickeState at_phase = echoed_state(shear, phase);
        res.readout_mean = expect_axis(at_phase, maxis);
        res.readout_var = var_axis(at_phase, maxis);

        const double var0 = var_axis(echoed_state(shear, 0.0), maxis);
        const double total_var = var0 + detection_noise_sigma * detection_noise_sigma;
        const double phase_var = total_var / (res.slope * res.slope);
        res.gain_db = db_from_linear(1.0 / (n_atoms_ * phase_var));
        return res;
    }

  private:
    int n_atoms_;
    double mismatch_;
    Eigen::MatrixXcd w_, wd_;
    DickeState base_twist_;
};

inline SatinResult satin_run(int n_atoms, double shear, double phase,
                             double detection_noise_sigma = 0.0) {
    return SatinEngine(n_atoms).run(shear, phase, detection_noise_sigma);
}

// best shear (and its gain) at the given detection noise; the optimum sits
// near the over-squeezing scale chi*t ~ 1/sqrt(N)
inline SatinResult satin_optimal(const SatinEngine& engine, double detection_noise_sigma) {
    const double hint = 1.0 / std::sqrt(static_cast<double>(engine.n_atoms()));
    std::vector<double> grid;
    for (int i = 0; i < 80; ++i) grid.push_back(0.05 * hint * std::pow(40.0, i / 79.0));

    double best_shear = grid.front();
    double best_gain = -std::numeric_limits<double>::infinity();
    for (double s : grid) {
        const SatinResult r = engine.run(s, 1e-3, detection_noise_sigma);
        if (r.gain_db > best_gain) {
            best_gain = r.gain_db;
            best_shear = s;
        }
    }
    double a = best_shear / 1.1, b = best_shear * 1.1;
    const double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = engine.run(x1, 1e-3, detection_noise_sigma).gain_db;
    double f2 = engine.run(x2, 1e-3, detection_noise_sigma).gain_db;
    for (int it = 0; it < 40 && (b - a) > 1e-4 * b; ++it) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = engine.run(x1, 1e-3, detection_noise_sigma).gain_db;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = engine.run(x2, 1e-3, detection_noise_sigma).gain_db;
        }
    }
    return engine.run(0.5 * (a + b), 1e-3, detection_noise_sigma);
}

// per-N optimal-shear SATIN gain; feeds heisenberg_scaling_fit
inline std::vector<std::pair<double, double>> satin_gain_curve(const std::vector<int>& n_list,
                                                               double detection_noise_sigma) {
    std::vector<std::pair<double, double>> out;
    out.reserve(n_list.size());
    for (int n : n_list) {
        if (n < 2) throw std::invalid_argument("satin_gain_curve: need N >= 2");
        SatinEngine engine(n);
        const SatinResult r = satin_optimal(engine, detection_noise_sigma);
        out.emplace_back(static_cast<double>(n), r.gain_db);
    }
    return out;
}

// |<CSS| U(-chi t) Rz(perturbation) U(+chi t) |CSS>|^2
inline double echo_fidelity(int n_atoms, double shear, double perturbation) {
    SatinEngine engine(n_atoms);
    const DickeState echoed = engine.echoed_state(shear, perturbation);
    return fidelity(css(n_atoms, 0.5 * kPi, 0.0), echoed);
}

inline const char* satin_csv_header() {
    return "N,shear,phase,slope,readout_var,detection_sigma,gain_db";
}

inline std::string satin_csv_row(const SatinResult& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.n_atoms, r.shear,
                  r.phase, r.slope, r.readout_var, r.detection_noise_sigma, r.gain_db);
    return buf;
}

}  // namespace spinclock
