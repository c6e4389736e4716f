#pragma once

#include "spinclock/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

// Exact collective-spin states and unitary dynamics of N spin-1/2 atoms in
// the permutation-symmetric (Dicke) subspace, total spin S = N/2.
// States are immutable value types; operations return new states.

namespace spinclock {

using complexd = std::complex<double>;

struct DickeState {
    int n_atoms = 0;
    std::vector<complexd> amps;  // amps[0] <-> m = -S, length n_atoms + 1

    double spin() const { return 0.5 * n_atoms; }
    int dim() const { return n_atoms + 1; }
    double m_at(int i) const { return static_cast<double>(i) - spin(); }
};

inline double norm_sq(const DickeState& psi) {
    double s = 0.0;
    for (const auto& a : psi.amps) s += std::norm(a);
    return s;
}

inline complexd inner(const DickeState& a, const DickeState& b) {
    if (a.n_atoms != b.n_atoms) throw std::invalid_argument("inner: atom-number mismatch");
    complexd s = 0.0;
    for (int i = 0; i < a.dim(); ++i) s += std::conj(a.amps[i]) * b.amps[i];
    return s;
}

inline double fidelity(const DickeState& a, const DickeState& b) { return std::norm(inner(a, b)); }

// Spin-coherent state pointing along (polar, azimuth), binomial square-root
// amplitudes. Computed in log space so N ~ 1e4 does not overflow binomials.
inline DickeState css(int n_atoms, double polar, double azimuth) {
    if (n_atoms < 1) throw std::invalid_argument("css: n_atoms must be >= 1");
    const double c = std::cos(0.5 * polar);
    const double s = std::sin(0.5 * polar);
    const double lc = std::log(std::abs(c));
    const double ls = std::log(std::abs(s));
    const double lgn = std::lgamma(n_atoms + 1.0);

    DickeState psi;
    psi.n_atoms = n_atoms;
    psi.amps.assign(n_atoms + 1, complexd(0.0, 0.0));
    // k spins flipped away from +S: m = S - k, amplitude index i = n_atoms - k
    for (int k = 0; k <= n_atoms; ++k) {
        double logmag = 0.5 * (lgn - std::lgamma(k + 1.0) - std::lgamma(n_atoms - k + 1.0));
        if (n_atoms - k > 0) logmag += (n_atoms - k) * lc;
        if (k > 0) logmag += k * ls;
        if (!std::isfinite(logmag)) continue;  // exact zero amplitude
        double sign = 1.0;
        if (c < 0.0 && ((n_atoms - k) & 1)) sign = -sign;
        if (s < 0.0 && (k & 1)) sign = -sign;
        psi.amps[n_atoms - k] = sign * std::exp(logmag) * std::polar(1.0, k * azimuth);
    }
    // renormalize away the last few ulps
    const double nrm = std::sqrt(norm_sq(psi));
    for (auto& a : psi.amps) a /= nrm;
    return psi;
}

// (|m=+S> + |m=-S>)/sqrt(2)
inline DickeState ghz(int n_atoms) {
    if (n_atoms < 1) throw std::invalid_argument("ghz: n_atoms must be >= 1");
    DickeState psi;
    psi.n_atoms = n_atoms;
    psi.amps.assign(n_atoms + 1, complexd(0.0, 0.0));
    psi.amps.front() = 1.0 / std::sqrt(2.0);
    psi.amps.back() = 1.0 / std::sqrt(2.0);
    return psi;
}

// amps[m] *= exp(-i shear m^2); Sz distribution exactly invariant
inline DickeState oat_evolve(const DickeState& psi, double shear) {
    if (!std::isfinite(shear)) throw std::invalid_argument("oat_evolve: non-finite shear");
    DickeState out = psi;
    for (int i = 0; i < out.dim(); ++i) {
        const double m = out.m_at(i);
        out.amps[i] *= std::polar(1.0, -shear * m * m);
    }
    return out;
}

// --- collective operators -------------------------------------------------

struct CollectiveOperator {
    Eigen::MatrixXcd matrix;
    std::string label;
};

namespace detail {

inline double cplus(double S, double m) { return std::sqrt(S * (S + 1.0) - m * (m + 1.0)); }
inline double cminus(double S, double m) { return std::sqrt(S * (S + 1.0) - m * (m - 1.0)); }

}  // namespace detail

inline CollectiveOperator sz_op(int n_atoms) {
    const int d = n_atoms + 1;
    Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 0; i < d; ++i) mat(i, i) = static_cast<double>(i) - 0.5 * n_atoms;
    return {mat, "Sz"};
}

inline CollectiveOperator splus_op(int n_atoms) {
    const int d = n_atoms + 1;
    const double S = 0.5 * n_atoms;
    Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 0; i + 1 < d; ++i) mat(i + 1, i) = detail::cplus(S, i - S);
    return {mat, "S+"};
}

inline CollectiveOperator sminus_op(int n_atoms) {
    const int d = n_atoms + 1;
    const double S = 0.5 * n_atoms;
    Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 1; i < d; ++i) mat(i - 1, i) = detail::cminus(S, i - S);
    return {mat, "S-"};
}

inline CollectiveOperator sx_op(int n_atoms) {
    CollectiveOperator op{0.5 * (splus_op(n_atoms).matrix + sminus_op(n_atoms).matrix), "Sx"};
    return op;
}

inline CollectiveOperator sy_op(int n_atoms) {
    const complexd half_over_i(0.0, -0.5);
    CollectiveOperator op{half_over_i * (splus_op(n_atoms).matrix - sminus_op(n_atoms).matrix), "Sy"};
    return op;
}

inline CollectiveOperator axis_op(int n_atoms, const Eigen::Vector3d& axis) {
    CollectiveOperator op{axis.x() * sx_op(n_atoms).matrix + axis.y() * sy_op(n_atoms).matrix +
                              axis.z() * sz_op(n_atoms).matrix,
                          "Sn"};
    return op;
}

// --- O(N) operator application (no matrices) -------------------------------

// w = (ax Sx + ay Sy + az Sz) psi, using the tridiagonal structure
inline std::vector<complexd> apply_axis(const DickeState& psi, const Eigen::Vector3d& axis) {
    const int d = psi.dim();
    const double S = psi.spin();
    std::vector<complexd> w(d, complexd(0.0, 0.0));
    // Sx = (S+ + S-)/2, Sy = (S+ - S-)/(2i):
    // (ax Sx + ay Sy) has S+ coefficient (ax - i ay)/2 and S- coefficient (ax + i ay)/2
    const complexd cp = 0.5 * complexd(axis.x(), -axis.y());
    const complexd cm = 0.5 * complexd(axis.x(), axis.y());
    for (int i = 0; i < d; ++i) {
        const double m = psi.m_at(i);
        complexd acc = axis.z() * m * psi.amps[i];
        if (i > 0) acc += cp * detail::cplus(S, m - 1.0) * psi.amps[i - 1];
        if (i + 1 < d) acc += cm * detail::cminus(S, m + 1.0) * psi.amps[i + 1];
        w[i] = acc;
    }
    return w;
}

inline double expect_axis(const DickeState& psi, const Eigen::Vector3d& axis) {
    const auto w = apply_axis(psi, axis);
    complexd s = 0.0;
    for (int i = 0; i < psi.dim(); ++i) s += std::conj(psi.amps[i]) * w[i];
    return s.real();
}

inline Eigen::Vector3d mean_spin(const DickeState& psi) {
    return {expect_axis(psi, Eigen::Vector3d::UnitX()), expect_axis(psi, Eigen::Vector3d::UnitY()),
            expect_axis(psi, Eigen::Vector3d::UnitZ())};
}

inline double var_axis(const DickeState& psi, const Eigen::Vector3d& axis) {
    const auto w = apply_axis(psi, axis);
    double w2 = 0.0;
    complexd mean = 0.0;
    for (int i = 0; i < psi.dim(); ++i) {
        w2 += std::norm(w[i]);
        mean += std::conj(psi.amps[i]) * w[i];
    }
    return w2 - mean.real() * mean.real();
}

// full symmetrized 3x3 covariance of (Sx, Sy, Sz)
inline Eigen::Matrix3d spin_covariance(const DickeState& psi) {
    const Eigen::Vector3d axes[3] = {Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(),
                                     Eigen::Vector3d::UnitZ()};
    std::vector<complexd> w[3];
    for (int k = 0; k < 3; ++k) w[k] = apply_axis(psi, axes[k]);
    Eigen::Vector3d mean = mean_spin(psi);
    Eigen::Matrix3d cov;
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
            complexd s = 0.0;
            for (int i = 0; i < psi.dim(); ++i) s += std::conj(w[a][i]) * w[b][i];
            const double c = s.real() - mean[a] * mean[b];
            cov(a, b) = c;
            cov(b, a) = c;
        }
    return cov;
}

// --- rotations --------------------------------------------------------------

// exp(-i angle S_axis) as a dense matrix via eigendecomposition of S_axis
inline Eigen::MatrixXcd rotation_matrix(int n_atoms, const Eigen::Vector3d& axis, double angle) {
    if (std::abs(axis.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("rotation_matrix: axis must be a unit vector");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(axis_op(n_atoms, axis).matrix);
    const auto& V = es.eigenvectors();
    Eigen::VectorXcd phases(n_atoms + 1);
    for (int i = 0; i <= n_atoms; ++i) phases(i) = std::polar(1.0, -angle * es.eigenvalues()(i));
    return V * phases.asDiagonal() * V.adjoint();
}

inline DickeState apply_matrix(const DickeState& psi, const Eigen::MatrixXcd& u) {
    Eigen::Map<const Eigen::VectorXcd> v(psi.amps.data(), psi.dim());
    Eigen::VectorXcd out = u * v;
    DickeState res;
    res.n_atoms = psi.n_atoms;
    res.amps.assign(out.data(), out.data() + psi.dim());
    return res;
}

// exp(-i angle S_axis) |psi>; z-axis is an O(N) diagonal phase map
inline DickeState rotate(const DickeState& psi, const Eigen::Vector3d& axis, double angle) {
    if (std::abs(axis.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("rotate: axis must be a unit vector");
    if (std::abs(axis.x()) < 1e-14 && std::abs(axis.y()) < 1e-14) {
        const double sign = axis.z() > 0 ? 1.0 : -1.0;
        DickeState out = psi;
        for (int i = 0; i < out.dim(); ++i)
            out.amps[i] *= std::polar(1.0, -sign * angle * out.m_at(i));
        return out;
    }
    return apply_matrix(psi, rotation_matrix(psi.n_atoms, axis, angle));
}

// --- transverse-quadrature moments ------------------------------------------

struct SpinMoments {
    Eigen::Vector3d mean;       // <S>
    double var_min = 0.0;       // (Delta S_min)^2 over transverse quadratures
    double var_max = 0.0;       // (Delta S_max)^2
    double angle_min = 0.0;     // minimizing quadrature angle, from e1 toward e2
    Eigen::Vector3d e1, e2;     // transverse frame; for <S> ~ x this is (y, z)
};

// Mean spin and the 2x2 covariance of the two quadratures transverse to <S>,
// diagonalized analytically. Throws if |<S>| vanishes (frame undefined).
inline SpinMoments moments(const DickeState& psi) {
    SpinMoments out;
    out.mean = mean_spin(psi);
    const double S = psi.spin();
    if (out.mean.norm() <= 1e-9 * S)
        throw std::domain_error("moments: zero mean spin, transverse frame undefined");
    const Eigen::Vector3d n = out.mean.normalized();
    Eigen::Vector3d e1 = Eigen::Vector3d::UnitZ().cross(n);
    if (e1.norm() < 1e-9) e1 = n.cross(Eigen::Vector3d::UnitX());  // mean along z
    e1.normalize();
    const Eigen::Vector3d e2 = n.cross(e1);
    out.e1 = e1;
    out.e2 = e2;

    const auto w1 = apply_axis(psi, e1);
    const auto w2 = apply_axis(psi, e2);
    complexd m1 = 0.0, m2 = 0.0, x12 = 0.0;
    double v1 = 0.0, v2 = 0.0;
    for (int i = 0; i < psi.dim(); ++i) {
        m1 += std::conj(psi.amps[i]) * w1[i];
        m2 += std::conj(psi.amps[i]) * w2[i];
        v1 += std::norm(w1[i]);
        v2 += std::norm(w2[i]);
        x12 += std::conj(w1[i]) * w2[i];
    }
    const double var1 = v1 - m1.real() * m1.real();
    const double var2 = v2 - m2.real() * m2.real();
    const double cov12 = x12.real() - m1.real() * m2.real();  // symmetrized cross term

    const double mid = 0.5 * (var1 + var2);
    const double diff = 0.5 * (var1 - var2);
    const double rad = std::hypot(diff, cov12);
    out.var_min = mid - rad;
    out.var_max = mid + rad;
    out.angle_min = 0.5 * std::atan2(-cov12, -diff);
    return out;
}

// --- Husimi Q ----------------------------------------------------------------

struct HusimiGrid {
    std::vector<double> theta;  // polar samples, radians
    std::vector<double> phi;    // azimuthal samples, radians
    std::vector<double> q;      // row-major [i_theta * n_phi + j_phi]
};

// Q(theta, phi) = |<CSS(theta, phi)|psi>|^2
inline HusimiGrid husimi_q(const DickeState& psi, int n_theta, int n_phi) {
    if (n_theta < 8 || n_phi < 8) throw std::invalid_argument("husimi_q: need >= 8 points per axis");
    HusimiGrid grid;
    grid.theta.resize(n_theta);
    grid.phi.resize(n_phi);
    grid.q.resize(static_cast<std::size_t>(n_theta) * n_phi);
    for (int i = 0; i < n_theta; ++i) grid.theta[i] = kPi * i / (n_theta - 1);
    for (int j = 0; j < n_phi; ++j) grid.phi[j] = 2.0 * kPi * j / n_phi;
    for (int i = 0; i < n_theta; ++i) {
        for (int j = 0; j < n_phi; ++j) {
            const DickeState probe = css(psi.n_atoms, grid.theta[i], grid.phi[j]);
            grid.q[static_cast<std::size_t>(i) * n_phi + j] = std::norm(inner(probe, psi));
        }
    }
    return grid;
}

// integral of Q over the sphere with measure (N+1)/(4 pi) dOmega (should be 1)
inline double husimi_integral(const HusimiGrid& grid, int n_atoms) {
    const int nt = static_cast<int>(grid.theta.size());
    const int np = static_cast<int>(grid.phi.size());
    const double dtheta = kPi / (nt - 1);
    const double dphi = 2.0 * kPi / np;
    double sum = 0.0;
    for (int i = 0; i < nt; ++i) {
        const double wt = (i == 0 || i == nt - 1) ? 0.5 : 1.0;
        double row = 0.0;
        for (int j = 0; j < np; ++j) row += grid.q[static_cast<std::size_t>(i) * np + j];
        sum += wt * row * std::sin(grid.theta[i]);
    }
    return sum * dtheta * dphi * (n_atoms + 1) / (4.0 * kPi);
}

// --- plain-text state dump -----------------------------------------------------

// format: header line "dicke N=<n>", then N+1 lines "m re im"
inline void dump_state(std::ostream& os, const DickeState& psi) {
    char buf[96];
    os << "dicke N=" << psi.n_atoms << "\n";
    for (int i = 0; i < psi.dim(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", psi.m_at(i), psi.amps[i].real(),
                      psi.amps[i].imag());
        os << buf;
    }
}

inline DickeState parse_state(std::istream& is) {
    std::string tag;
    is >> tag;
    if (tag != "dicke") throw std::runtime_error("parse_state: missing 'dicke' header");
    std::string nfield;
    is >> nfield;
    if (nfield.rfind("N=", 0) != 0) throw std::runtime_error("parse_state: missing N= field");
    const int n = std::stoi(nfield.substr(2));
    if (n < 1) throw std::runtime_error("parse_state: invalid atom number");
    DickeState psi;
    psi.n_atoms = n;
    psi.amps.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        double m, re, im;
        if (!(is >> m >> re >> im)) throw std::runtime_error("parse_state: truncated amplitude list");
        if (std::abs(m - psi.m_at(i)) > 1e-9) throw std::runtime_error("parse_state: m index out of order");
        psi.amps[i] = complexd(re, im);
    }
    return psi;
}

}  // namespace spinclock
