// Fixed-step fourth-order propagation of i dpsi/dt = (H(t)/hbar) psi.

#pragma once

#include "rh/drive.hpp"
#include "rh/hamiltonian.hpp"
#include "rh/su2.hpp"

#include "json.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rh {

struct TrajectorySample {
    double t = 0.0;
    Spin state;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    double dt = 0.0;
    int method_order = 4;
    std::string method = "rk4-renormalized";
    /// Largest | ||psi|| - 1 | seen before renormalization in a single step.
    double max_step_drift = 0.0;
    /// Sum of the per-step drifts.
    double total_drift = 0.0;
    long long steps = 0;

    const TrajectorySample& front() const { return samples.front(); }
    const TrajectorySample& back() const { return samples.back(); }
};

class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, double last_good_time)
        : std::runtime_error(what), last_good_time_(last_good_time) {}
    double last_good_time() const { return last_good_time_; }

private:
    double last_good_time_;
};

struct IntegratorOptions {
    double dt = 0.0;
    /// Shortest timescale of H; dt must not exceed resolution_period / 40.
    /// Zero disables the check.
    double resolution_period = 0.0;
    /// Keep every n-th step (the final state is always kept).
    int record_stride = 1;
};

/// Integrates from `t_begin` to `t_end`. The step is adjusted down to the
/// nearest value that divides the span into an integer number of steps, and
/// sample times are computed as t_begin + k dt so they land on exact grid points.
Trajectory solve_tdse(const HamiltonianFn& h, const Spin& psi0, double t_begin, double t_end,
                      const IntegratorOptions& options);

/// Convenience: drive-based run with dt = fast period / dt_divisor.
Trajectory solve_drive(const DriveParams& d, const Spin& psi0, int dt_divisor = 200,
                       const PerturbationConfig& perturbation = {});

struct StroboscopicSamples {
    std::vector<std::pair<double, Spin>> samples;  ///< q = 0, 1, ... (q = 0 at t = 0 when theta = 0)
    bool interpolated = false;
};

/// States at fast-cycle ends T_q covered by the trajectory. Times that fall
/// between grid points are linearly interpolated and flagged.
StroboscopicSamples stroboscopic_sample(const Trajectory& traj, double fast_omega,
                                        double theta_offset = 0.0);

class IncommensurateSegmentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Segment {
    DriveParams drive;
    double duration = 0.0;
};

/// Runs segments back to back; each segment restarts its own clock (Theta = 0
/// at its start). Each duration must hold a whole number of fast and slow
/// periods, otherwise IncommensurateSegmentError is thrown.
Trajectory run_sequence(const std::vector<Segment>& segments, const Spin& psi0,
                        int dt_divisor = 200, const PerturbationConfig& perturbation = {});

/// `t_s,re_c1,im_c1,re_c2,im_c2,S1,S2,S3,stroboscopic`.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, double fast_omega,
                          double theta_offset = 0.0);

nlohmann::json trajectory_metadata(const Trajectory& traj, const DriveParams& d);

}  // namespace rh
