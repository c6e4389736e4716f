#pragma once

#include "spinclock/dicke.hpp"
#include "spinclock/rng.hpp"

#include <Eigen/Dense>

namespace testutil {

inline Eigen::VectorXcd to_eigen(const spinclock::DickeState& psi) {
    return Eigen::Map<const Eigen::VectorXcd>(psi.amps.data(), psi.dim());
}

inline spinclock::DickeState from_eigen(int n_atoms, const Eigen::VectorXcd& v) {
    spinclock::DickeState psi;
    psi.n_atoms = n_atoms;
    psi.amps.assign(v.data(), v.data() + v.size());
    return psi;
}

inline Eigen::Vector3d random_unit_axis(spinclock::Rng& rng) {
    const double z = 2.0 * rng.uniform() - 1.0;
    const double a = 2.0 * spinclock::kPi * rng.uniform();
    const double r = std::sqrt(1.0 - z * z);
    return {r * std::cos(a), r * std::sin(a), z};
}

// random smooth state: CSS at a random orientation, sheared and rotated
inline spinclock::DickeState random_state(spinclock::Rng& rng, int n_atoms) {
    using namespace spinclock;
    DickeState psi = css(n_atoms, kPi * rng.uniform(), 2.0 * kPi * rng.uniform());
    psi = oat_evolve(psi, 0.5 * rng.uniform());
    return rotate(psi, random_unit_axis(rng), 2.0 * kPi * rng.uniform());
}

}  // namespace testutil
