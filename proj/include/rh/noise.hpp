// Gaussian parameter fluctuations and the fidelity-versus-fluctuation-count study.

#pragma once

#include "rh/drive.hpp"
#include "rh/hamiltonian.hpp"
#include "rh/su2.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace rh {

enum class NoiseHold { PiecewiseConstant, Linear };

struct NoiseSpec {
    double sigma_b_rel = 0.05;       ///< relative to the detuning amplitude
    double sigma_p_rel = 0.05;       ///< relative to each laser's power
    double sigma_phase = 0.01 * kPi; ///< rad, additive on Phi
    int n_fluctuations = 1;
    std::uint64_t seed = 0;
    NoiseHold hold = NoiseHold::PiecewiseConstant;

    void validate() const;
};

bool operator==(const NoiseSpec&, const NoiseSpec&);

/// Offsets drawn at n evenly spaced events t_k = k T / n, k = 0..n-1.
struct NoiseRealization {
    double duration = 0.0;
    NoiseHold hold = NoiseHold::PiecewiseConstant;
    std::vector<double> field;     ///< relative, multiplies the sigma_z part
    std::vector<double> power_a;   ///< relative
    std::vector<double> power_b;   ///< relative
    std::vector<double> phase;     ///< rad

    std::size_t events() const { return field.size(); }
    double event_spacing() const { return duration / static_cast<double>(events()); }

    /// Offsets in force at time t.
    struct Offsets {
        double field = 0.0, power_a = 0.0, power_b = 0.0, phase = 0.0;
    };
    Offsets at(double t) const;
};

/// Draws spec.n_fluctuations events from mt19937_64 seeded with `seed`.
/// Each event consumes four standard normals in the order field, power a,
/// power b, phase; the sigmas only scale them, so equal seeds give paired
/// draws across different sigmas.
NoiseRealization draw_noise(const NoiseSpec& spec, double duration, std::uint64_t seed);

/// Hamiltonian with the realization applied. Field noise scales the
/// sigma_z (detuning) part, power noise scales the transverse (eta12)
/// part by sqrt((1 + ea)(1 + eb)), phase noise shifts Phi.
HamiltonianFn apply_noise(const DriveParams& d, const NoiseRealization& noise,
                          const PerturbationConfig& perturbation = {});
HamiltonianFn apply_noise(const DriveParams& d, const NoiseSpec& spec,
                          const PerturbationConfig& perturbation = {});

/// n quasi-uniform states: poles for n = 2, octahedron for n = 6, the 26
/// directions of the 3x3x3 cube lattice for n = 26, a Fibonacci lattice otherwise.
std::vector<Spin> bloch_sphere_states(int n);

/// splitmix64 of the master seed combined with (count, state, run).
std::uint64_t derive_seed(std::uint64_t master, int count, int state, int run);

struct SweepPoint {
    int n_fluctuations = 0;
    double mean = 0.0;
    double std_dev = 0.0;  ///< sample standard deviation over runs x states
    int n_samples = 0;
    double standard_error() const;
};

struct RawFidelity {
    int n_fluctuations = 0;
    int state = 0;
    int run = 0;
    std::uint64_t seed = 0;
    double fidelity = 0.0;
};

struct FidelitySweepResult {
    std::vector<SweepPoint> points;
    std::vector<RawFidelity> raw;
};

struct SweepOptions {
    int runs_per_state = 5;
    int n_states = 26;
    int workers = 1;
    int dt_divisor = 200;
    PerturbationConfig perturbation;
};

class SweepFailure : public std::runtime_error {
public:
    SweepFailure(const std::string& what, RawFidelity task)
        : std::runtime_error(what), task_(task) {}
    const RawFidelity& task() const { return task_; }

private:
    RawFidelity task_;
};

/// For every count, state and run: integrate the noisy TDSE over d.duration
/// and score |<ideal psi0|psi>|^2. `ideal` must describe the same duration.
/// Results do not depend on the worker count.
FidelitySweepResult fidelity_sweep(const std::vector<int>& counts, const NoiseSpec& spec,
                                   const DriveParams& d, const SU2& ideal,
                                   const SweepOptions& options = {});

/// `n_fluctuations,mean_fidelity,std_fidelity,n_samples`
void write_sweep_csv(std::ostream& out, const FidelitySweepResult& r);
/// `n_fluctuations,state,run,seed,fidelity`
void write_raw_csv(std::ostream& out, const FidelitySweepResult& r);

nlohmann::json noise_spec_json(const NoiseSpec& spec);
nlohmann::json sweep_summary_json(const FidelitySweepResult& r, const NoiseSpec& spec,
                                  const SweepOptions& options);

}  // namespace rh
