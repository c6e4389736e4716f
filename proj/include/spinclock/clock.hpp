#pragma once

#include "spinclock/allan.hpp"
#include "spinclock/decoherence.hpp"
#include "spinclock/dicke.hpp"
#include "spinclock/noise.hpp"
#include "spinclock/rng.hpp"
#include "spinclock/satin.hpp"
#include "spinclock/squeezing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

// Monte Carlo Ramsey clock: LO noise synthesis, phase accumulation,
// projection-noise sampling, integrator servo, dead-time (Dick) effects,
// QND-assisted unwrap, differential two-ensemble mode, Allan estimation.

namespace spinclock {

enum class InputStateKind { css, oat, measurement, satin };

inline const char* to_string(InputStateKind k) {
    switch (k) {
        case InputStateKind::css: return "css";
        case InputStateKind::oat: return "oat";
        case InputStateKind::measurement: return "measurement";
        case InputStateKind::satin: return "satin";
    }
    return "css";
}

struct ClockConfig {
    double f_a = 5.1862e14;  // atomic frequency, Hz (Yb-171 clock transition scale)
    int n_atoms = 100;
    double ramsey_time = 0.1;  // s
    double dead_time = 0.0;    // s
    double servo_gain = 0.5;   // pure integrator gain
    long n_cycles = 2000;
    std::uint64_t seed = 1;
    InputStateKind input_state = InputStateKind::css;
    double shear = 0.0;       // chi*t for oat/satin inputs
    double light_qfi = 0.0;   // raw light information I for measurement input
    double efficiency = 1.0;  // detection efficiency q
    bool qnd_unwrap = false;
    double weak_resolution = 3.0;  // weak-measurement noise in CSS Delta-Sz (SQL) units

    double cycle_time() const { return ramsey_time + dead_time; }
    double duty_cycle() const { return ramsey_time / cycle_time(); }

    void validate() const {
        if (f_a <= 0.0) throw std::invalid_argument("ClockConfig: f_a must be > 0");
        if (n_atoms < 1) throw std::invalid_argument("ClockConfig: n_atoms must be >= 1");
        if (ramsey_time <= 0.0) throw std::invalid_argument("ClockConfig: ramsey_time must be > 0");
        if (dead_time < 0.0) throw std::invalid_argument("ClockConfig: dead_time must be >= 0");
        if (servo_gain < 0.0 || servo_gain >= 2.0)
            throw std::invalid_argument("ClockConfig: servo_gain must be in [0, 2)");
        if (n_cycles < 2) throw std::invalid_argument("ClockConfig: n_cycles must be >= 2");
        if (input_state == InputStateKind::oat || input_state == InputStateKind::satin) {
            if (shear < 0.0) throw std::invalid_argument("ClockConfig: shear must be >= 0");
        }
        if (light_qfi < 0.0) throw std::invalid_argument("ClockConfig: light_qfi must be >= 0");
        if (efficiency <= 0.0 || efficiency > 1.0)
            throw std::invalid_argument("ClockConfig: efficiency must be in (0, 1]");
        if (qnd_unwrap && weak_resolution < 1.0)
            throw std::invalid_argument("ClockConfig: weak_resolution must be >= 1 SQL unit");
        if (qnd_unwrap && input_state == InputStateKind::satin)
            throw std::invalid_argument("ClockConfig: qnd_unwrap is not defined for satin input");
    }
};

struct RunRecord {
    std::vector<double> true_phase;   // per-cycle accumulated LO phase (radians)
    std::vector<double> est_phase;    // estimator output phi-hat
    std::vector<double> sz_outcome;   // projective Sz outcome
    std::vector<double> steering;     // fractional-frequency correction applied next cycle
    std::vector<std::uint8_t> wrap;   // |phi| > pi/2 or estimator clipped
    bool aborted = false;             // servo divergence guard tripped

    std::size_t cycles() const { return true_phase.size(); }
    double wrap_fraction() const {
        if (wrap.empty()) return 0.0;
        double s = 0.0;
        for (auto w : wrap) s += w;
        return s / static_cast<double>(wrap.size());
    }
};

struct ClockRun {
    RunRecord record;
    AllanSeries allan;
};

struct CycleOutcome {
    double sz = 0.0;
    double phi_hat = 0.0;
    bool wrap = false;
};

// Eq.-8-style QPN prediction for the steered clock:
// sigma_y(tau_avg) = 1/(2 pi f_a) sqrt(1/(tau D tau_avg N G))
inline double qpn_adev(const ClockConfig& cfg, double gain_linear, double tau_avg) {
    return 1.0 / (2.0 * kPi * cfg.f_a) *
           std::sqrt(1.0 / (cfg.ramsey_time * cfg.duty_cycle() * tau_avg * cfg.n_atoms * gain_linear));
}

// ---------------------------------------------------------------------------
// Per-cycle measurement engine. Three sampling paths:
//   - css: exact per-atom binomial sampling (decoherence = contrast decay +
//     binomial atom loss, both exact for uncorrelated channels);
//   - oat/satin with zero atomic rates: exact Dicke amplitude distribution;
//   - measurement input, or oat/satin with decoherence: Gaussian moments on
//     the sphere (azimuth/elevation sampling), where antisqueezing leaks into
//     the readout at finite phase and shortens the effective contrast.
// ---------------------------------------------------------------------------
class ClockEngine {
  public:
    ClockEngine(const ClockConfig& cfg, const NoiseModel& noise) : cfg_(cfg) {
        cfg.validate();
        noise.validate();
        contrast_decay_ = std::exp(-noise.gamma_atomic() * cfg.ramsey_time);
        surv_p_ = std::exp(-noise.gamma_loss * cfg.ramsey_time);
        const bool atomic_noise = noise.gamma_atomic() > 0.0 || noise.gamma_loss > 0.0;
        const double S = 0.5 * cfg.n_atoms;

        switch (cfg.input_state) {
            case InputStateKind::css: {
                path_ = Path::binomial;
                c_eff_ = contrast_decay_;
                nominal_gain_ = contrast_decay_ * contrast_decay_;
                break;
            }
            case InputStateKind::oat: {
                DickeState psi = oat_evolve(css(cfg.n_atoms, 0.5 * kPi, 0.0), cfg.shear);
                const SpinMoments mom = moments(psi);
                // align the squeezed quadrature with the measured one (e1 = y)
                psi = rotate(psi, Eigen::Vector3d::UnitX(), -mom.angle_min);
                const SpinMoments aligned = moments(psi);
                if (atomic_noise) {
                    GaussianMoments gm{static_cast<double>(cfg.n_atoms), aligned.mean.norm() / S,
                                       aligned.var_min, aligned.var_max};
                    init_moment_path(moment_decoherence(gm, noise.gamma_nat, noise.gamma_deph,
                                                        noise.gamma_loss, cfg.ramsey_time));
                } else {
                    init_dicke_path(std::move(psi), aligned.mean.norm() / S);
                }
                break;
            }
            case InputStateKind::satin: {
                SatinEngine eng(cfg.n_atoms);
                const SatinResult r0 = eng.run(cfg.shear, 0.0, 0.0);
                satin_slope_ = r0.slope;
                if (atomic_noise) {
                    // echoed state is near-coherent at phi = 0; decohere its
                    // end-to-end readout moments and model the response as
                    // sz = C * slope * sin(phi) + Gaussian readout noise
                    path_ = Path::moment_satin;
                    GaussianMoments gm{static_cast<double>(cfg.n_atoms), 1.0, r0.readout_var,
                                       r0.readout_var};
                    gm_ = moment_decoherence(gm, noise.gamma_nat, noise.gamma_deph,
                                             noise.gamma_loss, cfg.ramsey_time);
                    c_eff_ = gm_.contrast;
                    const double sig = c_eff_ * satin_slope_;
                    nominal_gain_ = sig * sig / (cfg.n_atoms * gm_.var_minus);
                } else {
                    path_ = Path::dicke_satin;
                    psi_prep_ = eng.twisted_state(cfg.shear);
                    // single per-cycle matrix: readout pulse * reversed twist
                    Eigen::VectorXcd untwist(cfg.n_atoms + 1);
                    for (int i = 0; i <= cfg.n_atoms; ++i) {
                        const double m = i - 0.5 * cfg.n_atoms;
                        untwist(i) = std::polar(1.0, cfg.shear * m * m);
                    }
                    readout_ =
                        rotation_matrix(cfg.n_atoms, Eigen::Vector3d::UnitX(), r0.readout_angle) *
                        eng.frame() * untwist.asDiagonal() * eng.frame().adjoint();
                    c_eff_ = 1.0;
                    nominal_gain_ = linear_from_db(r0.gain_db);
                }
                break;
            }
            case InputStateKind::measurement: {
                const MeasurementModel model =
                    measurement_model(cfg.n_atoms, cfg.light_qfi * cfg.efficiency, cfg.efficiency);
                const double usable = model.light_qfi_normalized;
                GaussianMoments gm{static_cast<double>(cfg.n_atoms), 1.0,
                                   (0.5 * S) / (1.0 + usable), (0.5 * S) * (1.0 + cfg.light_qfi)};
                if (atomic_noise)
                    gm = moment_decoherence(gm, noise.gamma_nat, noise.gamma_deph, noise.gamma_loss,
                                            cfg.ramsey_time);
                init_moment_path(gm);
                break;
            }
        }
    }

    double effective_contrast() const { return c_eff_; }
    double nominal_gain() const { return nominal_gain_; }

    CycleOutcome cycle(double phase, Rng& rng) {
        if (!cfg_.qnd_unwrap) return measure(phase, rng);
        // lossless weak pre-measurement; its estimate is undone by an exact
        // z-rotation before the strong readout and added back afterwards
        const double sql_sigma = 0.5 * std::sqrt(static_cast<double>(cfg_.n_atoms));
        const double sigma_w = cfg_.weak_resolution * sql_sigma;
        const double scale = c_eff_ * 0.5 * n_eff_mean();
        const double y_w = scale * std::sin(phase) + rng.gaussian(0.0, sigma_w);
        const double phi_w = std::asin(std::clamp(y_w / scale, -1.0, 1.0));
        CycleOutcome out = measure(phase - phi_w, rng);
        out.phi_hat += phi_w;
        out.wrap = out.wrap || std::abs(phase) > 0.5 * kPi;
        return out;
    }

  private:
    enum class Path { binomial, dicke, dicke_satin, moment, moment_satin };

    void init_dicke_path(DickeState psi, double contrast) {
        path_ = Path::dicke;
        psi_prep_ = std::move(psi);
        readout_ = rotation_matrix(cfg_.n_atoms, Eigen::Vector3d::UnitX(), 0.5 * kPi);
        c_eff_ = contrast;
        const SpinMoments mom = moments(psi_prep_);
        const double S = 0.5 * cfg_.n_atoms;
        nominal_gain_ = c_eff_ * c_eff_ / (mom.var_min / (0.5 * S));
    }

    void init_moment_path(const GaussianMoments& gm) {
        path_ = Path::moment;
        gm_ = gm;
        const double cs = gm.contrast * gm.spin();
        c_eff_ = gm.contrast * std::exp(-(gm.var_minus + gm.var_plus) / (2.0 * cs * cs));
        nominal_gain_ = gm.wineland_inv_sq();
    }

    double n_eff_mean() const {
        if (path_ == Path::binomial) return cfg_.n_atoms * surv_p_;
        if (path_ == Path::moment || path_ == Path::moment_satin) return gm_.n_atoms;
        return static_cast<double>(cfg_.n_atoms);
    }

    CycleOutcome measure(double phase, Rng& rng) {
        CycleOutcome out;
        bool clipped = false;
        switch (path_) {
            case Path::binomial: {
                const long n_surv =
                    surv_p_ < 1.0 ? rng.binomial(cfg_.n_atoms, surv_p_) : cfg_.n_atoms;
                const double p = 0.5 * (1.0 + contrast_decay_ * std::sin(phase));
                const long k = rng.binomial(n_surv, std::clamp(p, 0.0, 1.0));
                out.sz = k - 0.5 * n_surv;
                const double arg = n_surv > 0 ? 2.0 * out.sz / (n_surv * contrast_decay_) : 0.0;
                clipped = std::abs(arg) > 1.0;
                out.phi_hat = std::asin(std::clamp(arg, -1.0, 1.0));
                break;
            }
            case Path::dicke:
            case Path::dicke_satin: {
                DickeState psi = psi_prep_;
                for (int i = 0; i < psi.dim(); ++i) {
                    const double m = psi.m_at(i);
                    psi.amps[i] *= std::polar(1.0, -phase * m);
                }
                const DickeState fin = apply_matrix(psi, readout_);
                out.sz = sample_sz(fin, rng);
                if (path_ == Path::dicke_satin) {
                    const double lim = 0.5 * kPi * std::abs(satin_slope_);
                    clipped = std::abs(out.sz) > lim;
                    out.phi_hat = std::clamp(out.sz / satin_slope_, -0.5 * kPi, 0.5 * kPi);
                } else {
                    const double arg = 2.0 * out.sz / (cfg_.n_atoms * c_eff_);
                    clipped = std::abs(arg) > 1.0;
                    out.phi_hat = std::asin(std::clamp(arg, -1.0, 1.0));
                }
                break;
            }
            case Path::moment: {
                const double cs = gm_.contrast * gm_.spin();
                const double azimuth = phase + rng.gaussian(0.0, std::sqrt(gm_.var_minus)) / cs;
                const double elevation = rng.gaussian(0.0, std::sqrt(gm_.var_plus)) / cs;
                out.sz = cs * std::sin(azimuth) * std::cos(elevation);
                const double arg = out.sz / (c_eff_ * gm_.spin());
                clipped = std::abs(arg) > 1.0;
                out.phi_hat = std::asin(std::clamp(arg, -1.0, 1.0));
                break;
            }
            case Path::moment_satin: {
                const double sig = gm_.contrast * satin_slope_;
                out.sz = sig * std::sin(phase) + rng.gaussian(0.0, std::sqrt(gm_.var_minus));
                const double lim = 0.5 * kPi * sig;
                clipped = std::abs(out.sz) > lim;
                out.phi_hat = std::clamp(out.sz / sig, -0.5 * kPi, 0.5 * kPi);
                break;
            }
        }
        out.wrap = clipped || std::abs(phase) > 0.5 * kPi;
        return out;
    }

    static double sample_sz(const DickeState& fin, Rng& rng) {
        const double u = rng.uniform();
        double acc = 0.0;
        for (int i = 0; i < fin.dim(); ++i) {
            acc += std::norm(fin.amps[i]);
            if (u < acc) return fin.m_at(i);
        }
        return fin.m_at(fin.dim() - 1);
    }

    ClockConfig cfg_;
    Path path_ = Path::binomial;
    DickeState psi_prep_;
    Eigen::MatrixXcd readout_;
    GaussianMoments gm_;
    double contrast_decay_ = 1.0;
    double surv_p_ = 1.0;
    double c_eff_ = 1.0;
    double nominal_gain_ = 1.0;
    double satin_slope_ = 1.0;
};

// Single-shot Ramsey cycle (unit-test surface); run_clock uses ClockEngine
// internally with cached matrices.
inline CycleOutcome ramsey_cycle(const ClockConfig& cfg, const NoiseModel& noise, double phase,
                                 std::uint64_t seed) {
    ClockEngine engine(cfg, noise);
    Rng rng(seed, "ramsey_cycle", 0);
    return engine.cycle(phase, rng);
}

namespace detail {

inline constexpr int kRamseySubsamples = 16;

struct LoSeries {
    std::vector<double> y;
    int n_ramsey = 0;
    int n_dead = 0;
    bool active = false;
};

inline LoSeries make_lo_series(const ClockConfig& cfg, const NoiseModel& noise) {
    LoSeries lo;
    if (!noise.any_lo_noise()) return lo;
    NoiseModel eff = noise;
    if (noise.gamma_lo > 0.0) {
        // pin std(phi_LO(tau_R)) = tau_R * Gamma_LO exactly via an extra white-FM term
        const double w = 2.0 * kPi * cfg.f_a;
        eff.h0 += 2.0 * cfg.ramsey_time * noise.gamma_lo * noise.gamma_lo / (w * w);
    }
    lo.active = true;
    lo.n_ramsey = kRamseySubsamples;
    const double dt = cfg.ramsey_time / lo.n_ramsey;
    lo.n_dead = static_cast<int>(std::llround(cfg.dead_time / dt));
    const double duration = cfg.n_cycles * static_cast<double>(lo.n_ramsey + lo.n_dead) * dt;
    lo.y = synthesize_lo(eff, duration, dt, cfg.seed);
    return lo;
}

}  // namespace detail

// Closed-loop run: integrator servo steering the LO by servo_gain * phi_hat
// per cycle, anti-windup clip at +-pi phase per cycle, Allan deviation of the
// steered clock's per-cycle fractional frequency. Dick degradation arises from
// dead-time sampling of the synthesized LO noise.
inline ClockRun run_clock(const ClockConfig& cfg, const NoiseModel& noise) {
    cfg.validate();
    noise.validate();
    ClockEngine engine(cfg, noise);
    Rng meas_rng(cfg.seed, "clock_measurement", 0);

    const detail::LoSeries lo = detail::make_lo_series(cfg, noise);
    const int per_cycle = lo.active ? lo.n_ramsey + lo.n_dead : 0;

    const double tau = cfg.ramsey_time;
    const double w = 2.0 * kPi * cfg.f_a;
    const double steer_clip = 1.0 / (2.0 * cfg.f_a * tau);  // |phase step| <= pi
    const int abort_consecutive_wraps = 50;                 // fringe lock lost

    ClockRun run;
    auto& rec = run.record;
    rec.true_phase.reserve(cfg.n_cycles);
    std::vector<double> clock_y;
    clock_y.reserve(cfg.n_cycles);

    double corr = 0.0;  // fractional-frequency correction currently applied
    int consecutive_wraps = 0;
    for (long k = 0; k < cfg.n_cycles; ++k) {
        double ramsey_mean = 0.0, cycle_mean = 0.0;
        if (lo.active) {
            const std::size_t base = static_cast<std::size_t>(k) * per_cycle;
            double s = 0.0;
            for (int i = 0; i < lo.n_ramsey; ++i) s += lo.y[base + i];
            ramsey_mean = s / lo.n_ramsey;
            for (int i = lo.n_ramsey; i < per_cycle; ++i) s += lo.y[base + i];
            cycle_mean = s / per_cycle;
        }
        const double phase = w * tau * (ramsey_mean + corr);
        const CycleOutcome oc = engine.cycle(phase, meas_rng);

        double delta = -cfg.servo_gain * oc.phi_hat / (w * tau);
        delta = std::clamp(delta, -steer_clip, steer_clip);

        rec.true_phase.push_back(phase);
        rec.est_phase.push_back(oc.phi_hat);
        rec.sz_outcome.push_back(oc.sz);
        rec.steering.push_back(delta);
        rec.wrap.push_back(oc.wrap ? 1 : 0);
        clock_y.push_back(cycle_mean + corr);

        corr += delta;
        consecutive_wraps = oc.wrap ? consecutive_wraps + 1 : 0;
        if (consecutive_wraps >= abort_consecutive_wraps) {
            rec.aborted = true;  // servo lost the fringe, steering diverged from the phase
            break;
        }
    }

    if (clock_y.size() >= 8) run.allan = allan_deviation(clock_y, cfg.cycle_time());
    return run;
}

// --- LO-noise limit scan ----------------------------------------------------

struct LoScanPoint {
    double gamma_lo = 0.0;
    double tau_gamma = 0.0;          // tau * Gamma_LO
    double wrap_fraction = 0.0;
    double instability_ratio = 0.0;  // measured / QPN prediction at the reference tau_avg
};

// For each Gamma_LO: closed-loop run, wrap-flag fraction and instability
// normalized to the input state's QPN prediction at tau_avg = ref_octave
// cycle times.
inline std::vector<LoScanPoint> lo_limit_scan(const ClockConfig& cfg, const NoiseModel& base_noise,
                                              const std::vector<double>& gamma_lo_list,
                                              int ref_octave = 8) {
    if (gamma_lo_list.empty()) throw std::invalid_argument("lo_limit_scan: empty gamma list");
    std::vector<LoScanPoint> out;
    out.reserve(gamma_lo_list.size());
    for (double g : gamma_lo_list) {
        NoiseModel noise = base_noise;
        noise.gamma_lo = g;
        ClockEngine probe(cfg, noise);
        const ClockRun run = run_clock(cfg, noise);
        LoScanPoint pt;
        pt.gamma_lo = g;
        pt.tau_gamma = cfg.ramsey_time * g;
        pt.wrap_fraction = run.record.wrap_fraction();
        pt.instability_ratio = 0.0;
        for (std::size_t i = 0; i < run.allan.tau.size(); ++i) {
            if (std::abs(run.allan.tau[i] - ref_octave * cfg.cycle_time()) <
                1e-9 * run.allan.tau[i]) {
                pt.instability_ratio =
                    run.allan.adev[i] / qpn_adev(cfg, probe.nominal_gain(), run.allan.tau[i]);
                break;
            }
        }
        out.push_back(pt);
    }
    return out;
}

// --- differential (two-ensemble) mode ----------------------------------------

struct DifferentialRun {
    RunRecord record_a;
    RunRecord record_b;
    std::vector<double> diff_phase;  // phi_hat_a - phi_hat_b per cycle
    AllanSeries allan;               // of the differential fractional frequency
};

// Both ensembles share the identical synthesized LO series (common mode);
// the servo is driven by ensemble A and applied to the common LO.
inline DifferentialRun run_differential(const ClockConfig& cfg_a, const ClockConfig& cfg_b,
                                        const NoiseModel& noise) {
    cfg_a.validate();
    cfg_b.validate();
    if (cfg_a.n_cycles != cfg_b.n_cycles ||
        std::abs(cfg_a.ramsey_time - cfg_b.ramsey_time) > 1e-12 ||
        std::abs(cfg_a.dead_time - cfg_b.dead_time) > 1e-12 ||
        std::abs(cfg_a.f_a - cfg_b.f_a) > 1e-3)
        throw std::invalid_argument("run_differential: mismatched cycle timing");

    ClockEngine engine_a(cfg_a, noise);
    ClockEngine engine_b(cfg_b, noise);
    Rng rng_a(cfg_a.seed, "clock_measurement_a", 0);
    Rng rng_b(cfg_a.seed, "clock_measurement_b", 1);

    const detail::LoSeries lo = detail::make_lo_series(cfg_a, noise);
    const int per_cycle = lo.active ? lo.n_ramsey + lo.n_dead : 0;
    const double tau = cfg_a.ramsey_time;
    const double w = 2.0 * kPi * cfg_a.f_a;
    const double steer_clip = 1.0 / (2.0 * cfg_a.f_a * tau);

    DifferentialRun run;
    std::vector<double> diff_y;
    double corr = 0.0;
    for (long k = 0; k < cfg_a.n_cycles; ++k) {
        double ramsey_mean = 0.0;
        if (lo.active) {
            const std::size_t base = static_cast<std::size_t>(k) * per_cycle;
            double s = 0.0;
            for (int i = 0; i < lo.n_ramsey; ++i) s += lo.y[base + i];
            ramsey_mean = s / lo.n_ramsey;
        }
        const double phase = w * tau * (ramsey_mean + corr);
        const CycleOutcome a = engine_a.cycle(phase, rng_a);
        const CycleOutcome b = engine_b.cycle(phase, rng_b);

        double delta = std::clamp(-cfg_a.servo_gain * a.phi_hat / (w * tau), -steer_clip, steer_clip);

        run.record_a.true_phase.push_back(phase);
        run.record_a.est_phase.push_back(a.phi_hat);
        run.record_a.sz_outcome.push_back(a.sz);
        run.record_a.steering.push_back(delta);
        run.record_a.wrap.push_back(a.wrap ? 1 : 0);

        run.record_b.true_phase.push_back(phase);
        run.record_b.est_phase.push_back(b.phi_hat);
        run.record_b.sz_outcome.push_back(b.sz);
        run.record_b.steering.push_back(0.0);
        run.record_b.wrap.push_back(b.wrap ? 1 : 0);

        run.diff_phase.push_back(a.phi_hat - b.phi_hat);
        diff_y.push_back((a.phi_hat - b.phi_hat) / (w * tau));
        corr += delta;
    }
    if (diff_y.size() >= 8) run.allan = allan_deviation(diff_y, cfg_a.cycle_time());
    return run;
}

}  // namespace spinclock
