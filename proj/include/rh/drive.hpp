// Modulation waveforms and the mapping from lab parameters (laser powers,
// bias field) to the abstract drive (Omega0, Omega, omega, Phi, theta).

#pragma once

#include "rh/su2.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace rh {

/// Abstract drive. All frequencies are angular (rad/s).
struct DriveParams {
    double omega0 = 0.0;      ///< drive amplitude Omega0
    double slow_omega = 0.0;  ///< Theta(t) = slow_omega * t
    double fast_omega = 0.0;  ///< carrier cos(fast_omega t + theta_offset)
    double phi = 0.0;         ///< azimuth of the field plane
    double theta_offset = 0.0;
    double duration = 0.0;    ///< seconds

    double fast_period() const { return kTwoPi / fast_omega; }
    double slow_period() const { return kTwoPi / slow_omega; }
    double theta_at(double t) const { return slow_omega * t; }

    /// Throws std::invalid_argument on a broken invariant and returns
    /// human-readable warnings for soft ones (weak timescale separation).
    std::vector<std::string> validate() const;
};

bool operator==(const DriveParams&, const DriveParams&);

/// Rb-87-style atomic data for the six-level W scheme. Loaded from a
/// key=value file, see data/rb87_d1.constants.
struct AtomicConstants {
    std::string name;
    std::string version;
    double d_d1 = 0.0;          ///< reduced D1 dipole moment, C m
    double g_f = 0.0;           ///< ground-manifold Lande factor
    double mu_b = 9.2740100783e-24;  ///< J/T
    double quadratic_zeeman = 0.0;   ///< Hz/T^2, differential shift coefficient
    // Clebsch-Gordan factors relative to d_d1. Laser a (sigma+) drives
    // 1->3, 1->4, 2->6; laser b (sigma-) drives 2->3, 2->4, 1->5.
    double c13 = 0.0, c14 = 0.0, c26 = 0.0;
    double c23 = 0.0, c24 = 0.0, c15 = 0.0;

    static AtomicConstants load(const std::filesystem::path& path);
    static AtomicConstants parse(std::istream& in, const std::string& origin = "<stream>");
    /// The shipped Rb-87 D1 file.
    static AtomicConstants rb87();
};

/// Lab-level parameters, SI units. Detunings are ordinary frequencies (Hz).
struct PhysicalParams {
    double power_a = 0.0;  ///< W
    double power_b = 0.0;  ///< W
    double waist = 0.0;    ///< m
    double b0 = 0.0;       ///< T
    double delta_b = 0.0;  ///< T
    std::array<double, 4> detunings{};  ///< Delta_1..Delta_4, Hz
    /// Extra laser frequency difference on top of the one that cancels the
    /// B0 Zeeman splitting, Hz.
    double laser_offset = 0.0;
    AtomicConstants atom;
};

/// Adiabatically eliminated two-level couplings (rad/s).
struct RamanMatrixElements {
    double xi11 = 0.0;
    double xi22 = 0.0;
    double eta12 = 0.0;
    double delta = 0.0;
};

class DetuningTooSmallError : public std::invalid_argument {
public:
    DetuningTooSmallError(const std::string& what, double ratio)
        : std::invalid_argument(what), ratio_(ratio) {}
    double ratio() const { return ratio_; }

private:
    double ratio_;
};

class CalibrationError : public std::runtime_error {
public:
    CalibrationError(const std::string& what, double ratio)
        : std::runtime_error(what), ratio_(ratio) {}
    /// eta12 amplitude over Omega0.
    double ratio() const { return ratio_; }

private:
    double ratio_;
};

// Waveforms ---------------------------------------------------------------

/// B0 + dB cos(Omega t) cos(omega t + theta), tesla.
double magnetic_signal(double t, const PhysicalParams& p, const DriveParams& d);
/// |sin(Omega t) cos(omega t + theta)|, common to both lasers.
double intensity_signal(double t, const DriveParams& d);
/// Phi when sin(Omega t) cos(omega t + theta) >= 0, Phi + pi otherwise.
double phase_signal(double t, const DriveParams& d);

/// (-sin Theta cos Phi, -sin Theta sin Phi, -cos Theta).
Vector3 r_hat(double theta, double phi);

struct WaveformSample {
    double t = 0.0;
    double field = 0.0;
    double intensity = 0.0;
    double phase = 0.0;
};

/// Samples [t_start, t_start + window] with `per_fast_period` points per
/// carrier period (both endpoints included).
std::vector<WaveformSample> sample_waveforms(const PhysicalParams& p, const DriveParams& d,
                                             double window, int per_fast_period = 20,
                                             double t_start = 0.0);

/// CSV with header `t_s,B_T,intensity_rel,phase_rad`.
void write_waveform_csv(std::ostream& out, const std::vector<WaveformSample>& samples);

// Lab -> drive mapping -----------------------------------------------------

/// Peak electric field of a Gaussian beam at its center, V/m.
double peak_field(double power, double waist);

struct RabiFrequencies {
    double a13 = 0.0, a14 = 0.0, a26 = 0.0;
    double b23 = 0.0, b24 = 0.0, b15 = 0.0;
    double max_abs() const;
};

/// Omega_rho_ij = -d E_rho C_ij / hbar at full laser power (rad/s).
RabiFrequencies rabi_frequencies(const PhysicalParams& p);

/// Result of the far-detuning check. Throws DetuningTooSmallError below
/// 1e2 and warns below 1e3 (min |Delta_i| over max Rabi frequency, in Hz).
std::vector<std::string> check_far_detuned(const PhysicalParams& p);

/// Couplings at full laser power with the bias field at `field` tesla.
RamanMatrixElements raman_elements(const PhysicalParams& p, double field);
/// Couplings at the peak of the modulation (field = B0 + dB).
RamanMatrixElements raman_elements(const PhysicalParams& p);

/// Amplitude of the modulated two-photon detuning, 2 |g_F| mu_B dB / hbar (rad/s).
double two_photon_detuning_amplitude(const PhysicalParams& p);

/// Omega0 = (detuning amplitude) / 2, checked against the laser-power side:
/// eta12 at full power must equal Omega0 within `tolerance` (relative).
DriveParams physical_to_drive(const PhysicalParams& p, double slow_omega, double fast_omega,
                              double phi, double duration, double tolerance = 0.01);

/// Common factor s such that detunings s * Delta_i make eta12 equal Omega0.
double calibrate_detuning_scale(const PhysicalParams& p);

}  // namespace rh
