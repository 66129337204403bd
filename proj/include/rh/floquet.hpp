// Analytic Floquet predictions in the adiabatic (single-band) limit, and the
// diagnostic that checks whether that limit applies.
//
// Sign convention. The zeroth Floquet component of the Floquet-frame
// Hamiltonian is
//
//     H_eff / hbar = Omega (1 - J0(a)) / 2 * (r x dr/dTheta) . sigma
//                  = -Omega g n.sigma,        n = (-sin Phi, cos Phi, 0),
//
// with g = (J0(a) - 1) / 2 <= 0 and a = 2 Omega0 / omega. A forward sweep
// Theta: 0 -> Delta therefore produces U = exp(+i g Delta n.sigma); one
// forward slow cycle is exp(+i 2 pi g n.sigma), which for Phi = 0 and
// g = -0.1248 is (1 - i sigma_y) / sqrt(2). `m` below counts forward slow
// cycles; a negative m runs the loop backwards.

#pragma once

#include "rh/drive.hpp"
#include "rh/su2.hpp"

#include "json.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace rh {

/// Bessel function J0 with absolute error below 1e-10 on the real line.
double bessel_j0(double x);

/// g = (J0(2 Omega0 / omega) - 1) / 2.
double g_factor(double omega0, double fast_omega);

/// n = (-sin Phi, cos Phi, 0).
Vector3 holonomy_axis(double phi);

/// Time-independent H_eff / hbar (rad/s); see the sign convention above.
ComplexMat2 effective_hamiltonian(const DriveParams& d);

/// Adiabatic evolution in the Floquet frame from t0 to t: exp(+i g [Theta(t) - Theta(t0)] n.sigma).
SU2 evolution_operator(double t0, double t, const DriveParams& d);

/// Holonomy of m slow cycles at fixed Phi: exp(+i 2 m pi g n.sigma).
SU2 cyclic_operator(int m, double phi, double g);

struct FloquetPrediction {
    double g = 0.0;
    double gamma = 0.0;  ///< 2 m pi g
    Vector3 axis = Vector3::UnitY();
    SU2 u_cyclic;
};

FloquetPrediction predict_cycles(const DriveParams& d, int m);

/// Physical-frame state predicted by the adiabatic theory at any time:
/// R^dag(t) U_eff(0, t) R(0) psi0, with R taking physical to Floquet frame.
Spin floquet_state(const Spin& psi0, const DriveParams& d, double t);

/// True when omega t + theta is a multiple of 2 pi (within 1e-7 cycles).
bool is_stroboscopic(double t, const DriveParams& d);

/// Predicted states at fast-cycle ends. Throws std::invalid_argument for any
/// time that is not a fast-cycle end.
std::vector<std::pair<double, Spin>> stroboscopic_prediction(const Spin& psi0, const DriveParams& d,
                                                             const std::vector<double>& times);

/// The first `count` + 1 fast-cycle ends starting at t = 0 (theta = 0 drives).
std::vector<double> stroboscopic_times(const DriveParams& d, int count);

// Adiabaticity diagnostic ---------------------------------------------------

struct HarmonicDiagnostic {
    int l = 0;
    double max_element = 0.0;  ///< rad/s
    double ratio = 0.0;        ///< max_element / omega
    bool flagged = false;
};

struct AdiabaticityReport {
    std::vector<HarmonicDiagnostic> harmonics;
    double max_ratio = 0.0;
    bool flagged = false;
    double threshold = 0.1;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// Fourier components H_F^(l), l = 0..max_harmonic, of the Floquet-frame
/// Hamiltonian Omega * A_Theta(Theta, theta'), where A_Theta = i (dR/dTheta) R^dag
/// is differentiated numerically from `micromotion`. Each component is the
/// largest matrix element over a grid of Theta values.
AdiabaticityReport adiabaticity_report(const DriveParams& d, int max_harmonic = 5,
                                       double threshold = 0.1);

/// H_F^(l) at a single Theta (rad/s), by adaptive trapezoidal quadrature.
ComplexMat2 floquet_harmonic(const DriveParams& d, double theta, int l);

void to_json(nlohmann::json& j, const HarmonicDiagnostic& h);
void to_json(nlohmann::json& j, const AdiabaticityReport& r);

}  // namespace rh
