#include "doctest.h"

#include "spinclock/metrics.hpp"
#include "spinclock/squeezing.hpp"

#include "oracle.hpp"

#include <cmath>

using namespace spinclock;

TEST_SUITE_BEGIN("squeezing");

TEST_CASE("two-atom optimal shear matches a dense 3x3 brute-force grid") {
    const OatOptimum opt = oat_squeeze_optimal(2);

    double best = 1e300;
    for (double shear = 1e-4; shear < kPi; shear += 1e-4) {
        const Eigen::VectorXcd v = oracle::oat_dense(2, oracle::css_dense(2, 0.5 * kPi, 0.0), shear);
        const auto mom = oracle::transverse_moments(2, v);
        const double s = 1.0;  // S = N/2
        const double xi_minus_sq = (2.0 / s) * mom.var_min;
        const double contrast = mom.mean.norm() / s;
        const double xi_r_sq = xi_minus_sq / (contrast * contrast);
        best = std::min(best, xi_r_sq);
    }
    // The N=2 optimum is the degenerate chi*t -> pi/2 edge where both the
    // contrast and the squeezed variance vanish; the ratio approaches the
    // analytic limit xi_R^2 = 1/(1 + sin chi*t) -> 1/2, and its numerical
    // evaluation is cancellation-limited to ~1e-4 relative in doubles.
    CHECK(std::abs(1.0 / opt.report.wineland_inv_sq - best) < 2e-4);
    CHECK(1.0 / opt.report.wineland_inv_sq == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(best == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("optimal squeezing at N=100 matches the dense reference evolution") {
    const int n = 100;
    const OatOptimum opt = oat_squeeze_optimal(n);
    const Eigen::VectorXcd v =
        oracle::oat_dense(n, oracle::css_dense(n, 0.5 * kPi, 0.0), opt.best_shear);
    CHECK(std::abs(opt.report.xi_minus_sq - oracle::xi_minus_sq_dense(n, v)) < 1e-6);
    // nearby shears do not beat the reported optimum
    for (double f : {0.97, 0.99, 1.01, 1.03}) {
        const DickeState probe = oat_evolve(css(n, 0.5 * kPi, 0.0), opt.best_shear * f);
        CHECK(squeezing_report(probe).wineland_inv_sq <= opt.report.wineland_inv_sq * (1.0 + 1e-3));
    }
}

TEST_CASE("optimal squeezed variance follows the -2/3 power law") {
    std::vector<double> log_n, log_xi;
    for (int n : {32, 64, 128, 256, 512}) {
        const OatOptimum opt = oat_squeeze_optimal(n);
        log_n.push_back(std::log10(static_cast<double>(n)));
        log_xi.push_back(std::log10(opt.report.xi_minus_sq));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(log_n.size());
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        sx += log_n[i];
        sy += log_xi[i];
        sxx += log_n[i] * log_n[i];
        sxy += log_n[i] * log_xi[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-2.0 / 3.0).epsilon(0.075));
}

TEST_CASE("unitary OAT squeezing stays near minimum uncertainty at small shear") {
    const int n = 200;
    const double shear = 0.8 / n;  // chi t N <= 1
    const SqueezingReport rep = squeezing_report(oat_evolve(css(n, 0.5 * kPi, 0.0), shear));
    const double c4 = std::pow(rep.contrast, 4);
    const double product = rep.xi_minus_sq * rep.xi_plus_sq;
    CHECK(product >= c4 * (1.0 - 1e-9));
    CHECK(product <= c4 * 1.05);
}

TEST_CASE("measurement with zero information leaves the CSS variance") {
    const ConditionalState cs = measurement_squeeze(50, measurement_model(50, 0.0), 7);
    CHECK(cs.xi_minus_sq() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cs.posterior_mean_sz == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("information I = 1 halves the conditional variance") {
    const ConditionalState cs = measurement_squeeze(50, measurement_model(50, 1.0), 7);
    CHECK(cs.xi_minus_sq() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("negative information is rejected") {
    CHECK_THROWS_AS(measurement_model(50, -0.5), std::invalid_argument);
}

TEST_CASE("monte carlo conditional variance matches 1/(1+I) at I = 3") {
    // Bayesian-update oracle: simulate (z, y) jointly, condition with the
    // library update, accumulate the true residual variance.
    const int n = 64;
    const double S = 0.5 * n;
    const MeasurementModel model = measurement_model(n, 3.0);
    const double noise_sd = std::sqrt(measurement_noise_var(n, model));
    Rng rng(1234, "mc_oracle", 0);
    double acc = 0.0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        const double z = rng.gaussian(0.0, std::sqrt(0.5 * S));
        const double y = z + rng.gaussian(0.0, noise_sd);
        const ConditionalState cs = conditional_update(n, GaussianPrior{0.0, 0.5 * S}, model, y);
        const double r = z - cs.posterior_mean_sz;
        acc += r * r;
    }
    const double empirical = acc / trials / (0.5 * S);
    CHECK(empirical == doctest::Approx(0.25).epsilon(0.04));
    CHECK(std::abs(empirical - 0.25) < 0.01);
}

TEST_CASE("conditional variance is exact and monotone in I") {
    double prev = 2.0;
    for (double info : {0.0, 0.5, 1.0, 3.0, 10.0, 100.0}) {
        const ConditionalState cs = measurement_squeeze(80, measurement_model(80, info), 3);
        CHECK(cs.xi_minus_sq() * (1.0 + info) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(cs.xi_minus_sq() <= prev);
        prev = cs.xi_minus_sq();
    }
}

TEST_CASE("efficiency q with raw information I0 equals unit efficiency with q*I0") {
    const int n = 100;
    const double q = 0.3, raw = 5.0;
    const ConditionalState a = measurement_squeeze(n, measurement_model(n, q * raw, q), 11);
    const ConditionalState b = measurement_squeeze(n, measurement_model(n, q * raw, 1.0), 11);
    CHECK(a.posterior_var_sz == doctest::Approx(b.posterior_var_sz).epsilon(1e-15));
    CHECK(a.posterior_mean_sz == doctest::Approx(b.posterior_mean_sz).epsilon(1e-12));
    // but the back-action antisqueezing tracks the raw information
    CHECK(a.var_antisqueezed > b.var_antisqueezed);
}

TEST_CASE("feedback with beta = 0 changes nothing") {
    const ConditionalState cs = measurement_squeeze(60, measurement_model(60, 2.0), 5);
    const ConditionalState fb = apply_feedback(cs, 0.0);
    CHECK(fb.posterior_mean_sz == cs.posterior_mean_sz);
    CHECK(fb.posterior_var_sz == cs.posterior_var_sz);
    CHECK_FALSE(fb.feedback_warning);
}

TEST_CASE("feedback beta = -2 m0 / N recenters the posterior mean") {
    const int n = 60;
    ConditionalState cs = measurement_squeeze(n, measurement_model(n, 2.0), 9);
    const double beta = -2.0 * cs.posterior_mean_sz / n;
    CHECK(beta == doctest::Approx(cs.feedback_angle_beta).epsilon(1e-12));
    const ConditionalState fb = apply_feedback(cs, beta);
    CHECK(std::abs(fb.posterior_mean_sz) < 1e-9);
    CHECK(fb.posterior_var_sz == cs.posterior_var_sz);
}

TEST_CASE("feedback outside the small-angle window raises the warning flag") {
    const ConditionalState cs = measurement_squeeze(400, measurement_model(400, 3.0), 2);
    const double big = 10.0 * std::sqrt(cs.posterior_var_sz) / (0.5 * 400);
    CHECK(apply_feedback(cs, big).feedback_warning);
    CHECK_THROWS_AS(apply_feedback(cs, 3.2), std::invalid_argument);
}

TEST_CASE("repeated measure plus feedback accumulates information: xi^2 = 1/3") {
    // sequential Bayesian oracle with the physical rotation applied to the
    // true Sz between the two measurements
    const int n = 64;
    const double S = 0.5 * n;
    const MeasurementModel model = measurement_model(n, 1.0);
    const double noise_sd = std::sqrt(measurement_noise_var(n, model));
    Rng rng(77, "mc_oracle_seq", 0);
    double acc = 0.0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        double z = rng.gaussian(0.0, std::sqrt(0.5 * S));
        const double y1 = z + rng.gaussian(0.0, noise_sd);
        ConditionalState cs = conditional_update(n, GaussianPrior{0.0, 0.5 * S}, model, y1);
        // feedback rotation shifts the true spin along with the posterior
        const double beta = cs.feedback_angle_beta;
        z += beta * S;
        cs = apply_feedback(cs, beta);
        const double y2 = z + rng.gaussian(0.0, noise_sd);
        cs = conditional_update(n, GaussianPrior{cs.posterior_mean_sz, cs.posterior_var_sz}, model,
                                y2);
        CHECK(cs.posterior_var_sz / (0.25 * n) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        const double r = z - cs.posterior_mean_sz;
        acc += r * r;
    }
    const double empirical = acc / trials / (0.5 * S);
    CHECK(empirical == doctest::Approx(1.0 / 3.0).epsilon(0.03));
}

TEST_SUITE_END();
