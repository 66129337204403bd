// Run configuration: a flat `key = value` file.
//
// Frequencies are entered as ordinary frequencies in Hz; the 2 pi is applied
// when the config is turned into DriveParams. Exactly one of the `drive.*`
// and `physical.*` blocks must be present.

#pragma once

#include "rh/drive.hpp"
#include "rh/hamiltonian.hpp"
#include "rh/noise.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rh {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct DriveBlock {
    double omega0_hz = 0.0;
    double b0_t = 0.0;       ///< only used for the field waveform
    double delta_b_t = 0.0;  ///< only used for the field waveform
    bool operator==(const DriveBlock&) const = default;
};

struct PhysicalBlock {
    double power_a_w = 0.0;
    double power_b_w = 0.0;
    double waist_m = 0.0;
    double b0_t = 0.0;
    double delta_b_t = 0.0;
    std::array<double, 4> detunings_hz{};
    double laser_offset_hz = 0.0;
    std::string constants = "rb87_d1.constants";
    double calibration_tolerance = 0.01;
    bool operator==(const PhysicalBlock&) const = default;
};

struct PerturbationBlock {
    double xi_asymmetry_hz = 0.0;
    double quadratic_zeeman_hz = 0.0;
    bool xi_asymmetry = false;
    bool quadratic_zeeman = false;
    bool operator==(const PerturbationBlock&) const = default;
};

struct NoiseBlock {
    double sigma_b_rel = 0.05;
    double sigma_p_rel = 0.05;
    double sigma_phase_rad = 0.01 * kPi;
    std::vector<int> counts{10, 20, 50, 100, 200, 500, 1000};
    int runs_per_state = 5;
    int n_states = 26;
    NoiseHold hold = NoiseHold::PiecewiseConstant;
    double duration_s = 20e-6;  ///< pulse length of each noisy run
    bool operator==(const NoiseBlock&) const = default;
};

struct SequenceBlock {
    double phi1_rad = 0.0;
    double phi2_rad = kPi / 2;
    double segment_s = 20e-6;
    bool operator==(const SequenceBlock&) const = default;
};

struct RunConfig {
    std::string experiment = "geometric-phase";
    double duration_s = 0.0;
    double slow_hz = 0.0;
    double fast_hz = 0.0;
    double phi_rad = 0.0;
    double theta_offset_rad = 0.0;
    std::string initial_state = "up";  ///< up, down, +x, -x, +y, -y

    std::optional<DriveBlock> drive;
    std::optional<PhysicalBlock> physical;
    PerturbationBlock perturbation;
    std::optional<NoiseBlock> noise;
    SequenceBlock sequence;

    int dt_divisor = 200;
    std::string output_dir = "out";
    std::uint64_t seed = 1;

    double waveform_window_s = 10e-6;
    int waveform_per_fast_period = 20;
    int max_harmonic = 5;
    double adiabatic_threshold = 0.1;

    /// Directory used to resolve a relative `physical.constants` path
    /// before falling back to the shipped data directory. Not serialized.
    std::filesystem::path base_dir;

    bool operator==(const RunConfig& o) const;

    static RunConfig load(const std::filesystem::path& path);
    static RunConfig parse(std::istream& in, const std::string& origin = "<stream>",
                           const std::filesystem::path& base_dir = {});
    void write(std::ostream& out) const;
    std::string to_string() const;

    /// Structural checks (block exclusivity, ranges). Throws ConfigError.
    void validate() const;

    DriveParams drive_params() const;
    PhysicalParams physical_params() const;
    PerturbationConfig perturbation_config() const;
    NoiseSpec noise_spec() const;
    Spin initial_spin() const;
};

std::vector<std::string> known_experiments();

}  // namespace rh
