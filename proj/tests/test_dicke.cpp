#include "doctest.h"

#include "spinclock/dicke.hpp"
#include "spinclock/rng.hpp"

#include "oracle.hpp"
#include "test_util.hpp"

#include <cmath>
#include <sstream>

using namespace spinclock;
using testutil::from_eigen;
using testutil::to_eigen;

TEST_SUITE_BEGIN("dicke");

TEST_CASE("css two-atom equatorial amplitudes are binomial square roots") {
    const DickeState psi = css(2, 0.5 * kPi, 0.0);
    REQUIRE(psi.dim() == 3);
    CHECK(std::abs(psi.amps[0] - complexd(0.5, 0.0)) < 1e-12);
    CHECK(std::abs(psi.amps[1] - complexd(1.0 / std::sqrt(2.0), 0.0)) < 1e-12);
    CHECK(std::abs(psi.amps[2] - complexd(0.5, 0.0)) < 1e-12);
    CHECK(expect_axis(psi, Eigen::Vector3d::UnitZ()) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(var_axis(psi, Eigen::Vector3d::UnitZ()) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("css at the pole is fully polarized") {
    const DickeState psi = css(8, 0.0, 0.0);
    CHECK(std::abs(psi.amps.back() - complexd(1.0, 0.0)) < 1e-12);
    CHECK(var_axis(psi, Eigen::Vector3d::UnitZ()) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("css projection noise is N/4") {
    const DickeState psi = css(10, 0.5 * kPi, 0.0);
    CHECK(var_axis(psi, Eigen::Vector3d::UnitZ()) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("css rejects zero atoms") { CHECK_THROWS_AS(css(0, 0.0, 0.0), std::invalid_argument); }

TEST_CASE("css matches the rotated-pole dense construction") {
    for (int n : {1, 2, 5, 16}) {
        const double theta = 0.7, phi = 1.3;
        const DickeState psi = css(n, theta, phi);
        const Eigen::VectorXcd ref = oracle::css_dense(n, theta, phi);
        CHECK(std::abs(std::abs(to_eigen(psi).dot(ref)) - 1.0) < 1e-10);
    }
}

TEST_CASE("rotate moves the pole state onto the equator") {
    const DickeState psi = rotate(css(4, 0.0, 0.0), Eigen::Vector3d::UnitY(), 0.5 * kPi);
    CHECK(expect_axis(psi, Eigen::Vector3d::UnitX()) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(std::abs(expect_axis(psi, Eigen::Vector3d::UnitZ())) < 1e-10);
}

TEST_CASE("rotate by zero angle is the identity") {
    Rng rng(7, "test", 0);
    const DickeState psi = testutil::random_state(rng, 9);
    const DickeState rot = rotate(psi, Eigen::Vector3d::UnitX(), 0.0);
    CHECK(fidelity(psi, rot) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("z rotation moves the mean spin rigidly") {
    const DickeState psi = rotate(css(6, 0.5 * kPi, 0.0), Eigen::Vector3d::UnitZ(), 0.2);
    CHECK(expect_axis(psi, Eigen::Vector3d::UnitY()) ==
          doctest::Approx(3.0 * std::sin(0.2)).epsilon(1e-12));
}

TEST_CASE("rotate rejects a non-unit axis") {
    const DickeState psi = css(4, 0.5 * kPi, 0.0);
    CHECK_THROWS_AS(rotate(psi, Eigen::Vector3d(0.0, 0.0, 2.0), 0.1), std::invalid_argument);
}

TEST_CASE("rotate agrees with the dense matrix exponential for N <= 32") {
    Rng rng(11, "test", 1);
    for (int n : {1, 3, 8, 17, 32}) {
        const DickeState psi = testutil::random_state(rng, n);
        const Eigen::Vector3d axis = testutil::random_unit_axis(rng);
        const double angle = 4.0 * kPi * (rng.uniform() - 0.5);
        const DickeState rot = rotate(psi, axis, angle);
        const Eigen::MatrixXcd gen =
            axis.x() * oracle::sx(n) + axis.y() * oracle::sy(n) + axis.z() * oracle::sz(n);
        const Eigen::VectorXcd ref = oracle::expm_unitary(gen, angle) * to_eigen(psi);
        CHECK((to_eigen(rot) - ref).norm() < 1e-10);
    }
}

TEST_CASE("oat with zero shear is the identity") {
    Rng rng(3, "test", 0);
    const DickeState psi = testutil::random_state(rng, 12);
    CHECK(fidelity(psi, oat_evolve(psi, 0.0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("oat quadrature split matches the dense reference evolution") {
    const int n = 4;
    const double shear = 0.1;
    const DickeState psi = oat_evolve(css(n, 0.5 * kPi, 0.0), shear);
    const Eigen::VectorXcd ref = oracle::oat_dense(n, oracle::css_dense(n, 0.5 * kPi, 0.0), shear);
    const auto ref_mom = oracle::transverse_moments(n, ref);
    const SpinMoments mom = moments(psi);
    CHECK(mom.var_min == doctest::Approx(ref_mom.var_min).epsilon(1e-9));
    CHECK(mom.var_max == doctest::Approx(ref_mom.var_max).epsilon(1e-9));
    CHECK(mom.var_min < mom.var_max);  // the shear actually split the quadratures
}

TEST_CASE("oat at shear pi/2 builds the analytic two-component cat") {
    const int n = 8;  // even N
    const DickeState psi = oat_evolve(css(n, 0.5 * kPi, 0.0), 0.5 * kPi);
    // (|CSS(pi/2, 0)> + i (-1)^S |CSS(pi/2, pi)>)/sqrt(2), antipodal components
    const DickeState a = css(n, 0.5 * kPi, 0.0);
    const DickeState b = css(n, 0.5 * kPi, kPi);
    const double sign = (n / 2) % 2 == 0 ? 1.0 : -1.0;
    DickeState cat;
    cat.n_atoms = n;
    cat.amps.resize(n + 1);
    const complexd w(0.0, sign);
    // antipodal equatorial CSS are exactly orthogonal, so 1/sqrt(2) normalizes
    for (int i = 0; i <= n; ++i) cat.amps[i] = (a.amps[i] + w * b.amps[i]) / std::sqrt(2.0);
    CHECK(fidelity(cat, psi) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ghz amplitudes and Sz variance") {
    const DickeState psi = ghz(2);
    CHECK(std::abs(psi.amps[0] - complexd(1.0 / std::sqrt(2.0), 0.0)) < 1e-12);
    CHECK(std::abs(psi.amps[1]) < 1e-12);
    CHECK(std::abs(psi.amps[2] - complexd(1.0 / std::sqrt(2.0), 0.0)) < 1e-12);
    for (int n : {2, 5, 12}) {
        const DickeState g = ghz(n);
        CHECK(var_axis(g, Eigen::Vector3d::UnitZ()) ==
              doctest::Approx(0.25 * n * n).epsilon(1e-12));
    }
}

TEST_CASE("moments of a CSS are isotropic at S/2") {
    const DickeState psi = css(12, 0.5 * kPi, 0.3);
    const SpinMoments mom = moments(psi);
    CHECK(mom.var_min == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(mom.var_max == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(mom.mean.norm() == doctest::Approx(6.0).epsilon(1e-10));
}

TEST_CASE("moments of an OAT state match the dense covariance oracle") {
    const int n = 20;
    const double shear = 0.05;
    const DickeState psi = oat_evolve(css(n, 0.5 * kPi, 0.0), shear);
    const SpinMoments mom = moments(psi);
    const auto ref =
        oracle::transverse_moments(n, oracle::oat_dense(n, oracle::css_dense(n, 0.5 * kPi, 0.0), shear));
    CHECK(mom.var_min == doctest::Approx(ref.var_min).epsilon(1e-9));
    CHECK(mom.var_max == doctest::Approx(ref.var_max).epsilon(1e-9));
    // compare angles modulo pi
    double da = std::remainder(mom.angle_min - ref.angle_min, kPi);
    CHECK(std::abs(da) < 1e-9);
}

TEST_CASE("moments rejects states with zero mean spin") {
    CHECK_THROWS_AS(moments(ghz(4)), std::domain_error);
}

TEST_CASE("husimi of a CSS peaks at its orientation with value 1") {
    const double t0 = 1.1, p0 = 2.0;
    const DickeState psi = css(6, t0, p0);
    const HusimiGrid grid = husimi_q(psi, 61, 120);
    double best = -1.0, bt = 0, bp = 0;
    for (std::size_t i = 0; i < grid.theta.size(); ++i)
        for (std::size_t j = 0; j < grid.phi.size(); ++j) {
            const double q = grid.q[i * grid.phi.size() + j];
            if (q > best) {
                best = q;
                bt = grid.theta[i];
                bp = grid.phi[j];
            }
        }
    CHECK(best > 0.99);
    CHECK(std::abs(bt - t0) < 0.06);
    CHECK(std::abs(std::remainder(bp - p0, 2.0 * kPi)) < 0.06);
    CHECK(std::norm(inner(css(6, t0, p0), psi)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("husimi of a GHZ state has two antipodal lobes of height 1/2") {
    const DickeState psi = ghz(10);
    const HusimiGrid grid = husimi_q(psi, 41, 40);
    const std::size_t np = grid.phi.size();
    CHECK(grid.q[0] == doctest::Approx(0.5).epsilon(1e-10));                    // theta = 0 pole
    CHECK(grid.q[(grid.theta.size() - 1) * np] == doctest::Approx(0.5).epsilon(1e-10));  // theta = pi
}

TEST_CASE("husimi normalization integral is 1 at one-degree resolution") {
    const DickeState psi = oat_evolve(css(6, 0.5 * kPi, 0.0), 0.2);
    const HusimiGrid grid = husimi_q(psi, 181, 360);
    CHECK(husimi_integral(grid, 6) == doctest::Approx(1.0).epsilon(1e-3));
    for (double q : grid.q) CHECK(q >= 0.0);
}

TEST_CASE("husimi requires at least 8 points per axis") {
    CHECK_THROWS_AS(husimi_q(css(4, 0.5 * kPi, 0.0), 7, 64), std::invalid_argument);
}

TEST_CASE("husimi ellipse orientation agrees with the moments quadrature angle") {
    const int n = 24;
    const DickeState psi = oat_evolve(css(n, 0.5 * kPi, 0.0), 0.04);
    const SpinMoments mom = moments(psi);  // mean along +x; e1 = y, e2 = z

    // local Q samples around the mean direction; u = azimuth, v = elevation
    double suu = 0, svv = 0, suv = 0, sw = 0;
    const int g = 41;
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            const double u = -0.6 + 1.2 * i / (g - 1);
            const double v = -0.6 + 1.2 * j / (g - 1);
            const DickeState probe = css(n, 0.5 * kPi - v, u);
            const double q = std::norm(inner(probe, psi));
            suu += q * u * u;
            svv += q * v * v;
            suv += q * u * v;
            sw += q;
        }
    }
    suu /= sw;
    svv /= sw;
    suv /= sw;
    // Q smears along the anti-squeezed quadrature: its major axis sits at the
    // moments() minimizing angle + pi/2
    const double major = 0.5 * std::atan2(2.0 * suv, suu - svv);
    const double expected = mom.angle_min + 0.5 * kPi;
    CHECK(std::abs(std::remainder(major - expected, kPi)) < 0.05);
}

TEST_CASE("unitarity: rotations and shears preserve norm and inner products") {
    Rng rng(5, "test", 2);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 2 + static_cast<int>(rng.uniform() * 22);
        DickeState a = testutil::random_state(rng, n);
        DickeState b = testutil::random_state(rng, n);
        const complexd ip_before = inner(a, b);
        const Eigen::Vector3d axis = testutil::random_unit_axis(rng);
        const double angle = 2.0 * kPi * rng.uniform();
        const double shear = rng.uniform();
        a = oat_evolve(rotate(a, axis, angle), shear);
        b = oat_evolve(rotate(b, axis, angle), shear);
        CHECK(std::abs(norm_sq(a) - 1.0) < 1e-12);
        CHECK(std::abs(norm_sq(b) - 1.0) < 1e-12);
        CHECK(std::abs(inner(a, b) - ip_before) < 1e-11);
    }
}

TEST_CASE("commutator [Sx, Sy] = i Sz holds entrywise for N in 1..32") {
    for (int n = 1; n <= 32; ++n) {
        const Eigen::MatrixXcd sx = sx_op(n).matrix;
        const Eigen::MatrixXcd sy = sy_op(n).matrix;
        const Eigen::MatrixXcd sz = sz_op(n).matrix;
        const complexd i1(0.0, 1.0);
        CHECK(((sx * sy - sy * sx) - i1 * sz).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(((sy * sz - sz * sy) - i1 * sx).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(((sz * sx - sx * sz) - i1 * sy).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((sx - sx.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((sy - sy.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("oat leaves the full Sz distribution exactly invariant") {
    Rng rng(9, "test", 3);
    const DickeState psi = testutil::random_state(rng, 15);
    const DickeState sheared = oat_evolve(psi, 0.37);
    for (int i = 0; i < psi.dim(); ++i)
        CHECK(std::norm(psi.amps[i]) == doctest::Approx(std::norm(sheared.amps[i])).epsilon(1e-15));
}

TEST_CASE("robertson bound on transverse quadratures") {
    Rng rng(13, "test", 4);
    for (int rep = 0; rep < 25; ++rep) {
        const int n = 2 + static_cast<int>(rng.uniform() * 20);
        const DickeState psi = testutil::random_state(rng, n);
        const Eigen::Vector3d mean = mean_spin(psi);
        if (mean.norm() < 1e-6 * psi.spin()) continue;
        const SpinMoments mom = moments(psi);
        const double bound = 0.25 * mean.norm() * mean.norm();
        CHECK(mom.var_min * mom.var_max >= bound * (1.0 - 1e-9));
    }
}

TEST_CASE("moments are covariant under z rotations") {
    const DickeState psi = oat_evolve(css(14, 0.5 * kPi, 0.0), 0.08);
    const SpinMoments before = moments(psi);
    const double phi = 0.7;
    const SpinMoments after = moments(rotate(psi, Eigen::Vector3d::UnitZ(), phi));
    CHECK(after.var_min == doctest::Approx(before.var_min).epsilon(1e-10));
    CHECK(after.var_max == doctest::Approx(before.var_max).epsilon(1e-10));
    const Eigen::AngleAxisd rot(phi, Eigen::Vector3d::UnitZ());
    CHECK((after.mean - rot * before.mean).norm() < 1e-9);
}

TEST_CASE("state dump round-trips through the plain-text format") {
    Rng rng(21, "test", 5);
    const DickeState psi = testutil::random_state(rng, 11);
    std::stringstream ss;
    dump_state(ss, psi);
    const DickeState back = parse_state(ss);
    REQUIRE(back.n_atoms == psi.n_atoms);
    for (int i = 0; i < psi.dim(); ++i) CHECK(std::abs(back.amps[i] - psi.amps[i]) == 0.0);
    std::string header;
    std::stringstream ss2;
    dump_state(ss2, psi);
    std::getline(ss2, header);
    CHECK(header == "dicke N=11");
}

TEST_SUITE_END();
