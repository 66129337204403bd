// Instantaneous two-level Hamiltonian of the modulated Raman drive.
//
// Matrices are H / hbar, in rad/s.

#pragma once

#include "rh/drive.hpp"
#include "rh/su2.hpp"

#include <functional>

namespace rh {

/// Time-dependent Hamiltonian H(t) / hbar.
using HamiltonianFn = std::function<ComplexMat2(double)>;

/// Small sigma_z terms neglected by the ideal model. Amplitudes in rad/s, >= 0.
struct PerturbationConfig {
    double xi_asymmetry_amp = 0.0;   ///< multiplies |sin(Omega t) cos(omega t + theta)| sigma_z
    double quadratic_zeeman_amp = 0.0;  ///< multiplies (cos(Omega t) cos(omega t + theta))^2 sigma_z
    bool xi_asymmetry_enabled = false;
    bool quadratic_zeeman_enabled = false;

    void validate() const;
    bool any_enabled() const {
        return (xi_asymmetry_enabled && xi_asymmetry_amp != 0.0) ||
               (quadratic_zeeman_enabled && quadratic_zeeman_amp != 0.0);
    }
};

bool operator==(const PerturbationConfig&, const PerturbationConfig&);

/// Omega0 (r_hat(Omega t, Phi) . sigma) cos(omega t + theta).
ComplexMat2 h_ideal(double t, const DriveParams& d);

/// Coefficient of sigma_z added by the enabled perturbations (rad/s).
double perturbation_shift(double t, const DriveParams& d, const PerturbationConfig& p);

ComplexMat2 h_with_perturbations(double t, const DriveParams& d, const PerturbationConfig& p);

/// S = Omega0 (r_hat . sigma) sin(omega t + theta) / omega, dimensionless.
ComplexMat2 kick_operator(double t, const DriveParams& d);

/// R = exp(i S), maps the physical frame to the Floquet frame. Identity
/// whenever sin(omega t + theta) = 0.
SU2 micromotion(double t, const DriveParams& d);

/// R as a function of the slow angle Theta and the fast phase omega t + theta
/// taken independently.
SU2 micromotion_at(double slow_angle, double fast_phase, const DriveParams& d);

/// Callable wrappers for the integrator.
HamiltonianFn ideal_hamiltonian(const DriveParams& d);
HamiltonianFn perturbed_hamiltonian(const DriveParams& d, const PerturbationConfig& p);

}  // namespace rh
