#include "rh/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>

namespace rh {

void PerturbationConfig::validate() const {
    if (!(xi_asymmetry_amp >= 0.0) || !(quadratic_zeeman_amp >= 0.0)) {
        throw std::invalid_argument("perturbation amplitudes must be >= 0");
    }
}

bool operator==(const PerturbationConfig& a, const PerturbationConfig& b) {
    return a.xi_asymmetry_amp == b.xi_asymmetry_amp &&
           a.quadratic_zeeman_amp == b.quadratic_zeeman_amp &&
           a.xi_asymmetry_enabled == b.xi_asymmetry_enabled &&
           a.quadratic_zeeman_enabled == b.quadratic_zeeman_enabled;
}

ComplexMat2 h_ideal(double t, const DriveParams& d) {
    const double carrier = std::cos(d.fast_omega * t + d.theta_offset);
    return pauli_vector(Vector3(d.omega0 * carrier * r_hat(d.theta_at(t), d.phi)));
}

double perturbation_shift(double t, const DriveParams& d, const PerturbationConfig& p) {
    const double carrier = std::cos(d.fast_omega * t + d.theta_offset);
    double z = 0.0;
    if (p.xi_asymmetry_enabled) {
        z += p.xi_asymmetry_amp * std::abs(std::sin(d.slow_omega * t) * carrier);
    }
    if (p.quadratic_zeeman_enabled) {
        const double b = std::cos(d.slow_omega * t) * carrier;
        z += p.quadratic_zeeman_amp * b * b;
    }
    return z;
}

ComplexMat2 h_with_perturbations(double t, const DriveParams& d, const PerturbationConfig& p) {
    ComplexMat2 h = h_ideal(t, d);
    const double z = perturbation_shift(t, d, p);
    h(0, 0) += z;
    h(1, 1) -= z;
    return h;
}

ComplexMat2 kick_operator(double t, const DriveParams& d) {
    const double s = d.omega0 * std::sin(d.fast_omega * t + d.theta_offset) / d.fast_omega;
    return pauli_vector(Vector3(s * r_hat(d.theta_at(t), d.phi)));
}

SU2 micromotion_at(double slow_angle, double fast_phase, const DriveParams& d) {
    // exp(i s r.sigma) = cos s 1 + i sin s r.sigma = exp_su2(-s, r)
    const double s = d.omega0 * std::sin(fast_phase) / d.fast_omega;
    return exp_su2(-s, r_hat(slow_angle, d.phi));
}

SU2 micromotion(double t, const DriveParams& d) {
    return micromotion_at(d.theta_at(t), d.fast_omega * t + d.theta_offset, d);
}

HamiltonianFn ideal_hamiltonian(const DriveParams& d) {
    return [d](double t) { return h_ideal(t, d); };
}

HamiltonianFn perturbed_hamiltonian(const DriveParams& d, const PerturbationConfig& p) {
    p.validate();
    return [d, p](double t) { return h_with_perturbations(t, d, p); };
}

}  // namespace rh
