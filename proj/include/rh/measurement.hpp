// Stokes readout and operator reconstruction from Stokes data.

#pragma once

#include "rh/su2.hpp"

#include "json.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace rh {

struct StokesVector {
    double s1 = 0.0;
    double s2 = 0.0;
    double s3 = 1.0;

    Vector3 vec() const { return Vector3(s1, s2, s3); }
    static StokesVector from_vec(const Vector3& v) { return {v(0), v(1), v(2)}; }
    double norm() const { return vec().norm(); }
};

/// S1 = 2 c1 c2 cos(beta), S2 = 2 c1 c2 sin(beta), S3 = c1^2 - c2^2, with
/// c1, c2 the moduli and beta = arg(c2) - arg(c1) wrapped to (-pi, pi].
StokesVector stokes(const Spin& psi);

/// Relative phase arg(c2) - arg(c1) on (-pi, pi]; 0 when either amplitude vanishes.
double relative_phase(const Spin& psi);

enum class PhaseCorrection { LabToRotating, RotatingToLab };

/// Multiplies c2 by exp(-i alpha) (LabToRotating) or exp(+i alpha), where
/// alpha = 2 pi delta_laser_freq t.
Spin zeeman_phase_correction(const Spin& psi, double delta_laser_freq_hz, double t,
                             PhaseCorrection direction = PhaseCorrection::LabToRotating);

struct Reconstruction {
    SU2 op;                ///< global phase fixed to u0 >= 0
    double residual = 0.0; ///< RMS Bloch-vector mismatch after the fit
    bool warning = false;  ///< residual above threshold
};

/// Least-squares Bloch rotation taking each `before` vector to the matching
/// `after` vector, returned as an SU(2) operator. Needs at least two
/// non-collinear probes; throws std::invalid_argument otherwise.
Reconstruction reconstruct_su2(const std::vector<StokesVector>& before,
                               const std::vector<StokesVector>& after,
                               double residual_threshold = 1e-3);

/// Single-probe variant. Assumes the rotation axis is perpendicular to the
/// initial Bloch vector, which for |1> is the equatorial family
/// u0 1 - i (ux sigma_x + uy sigma_y). The component of the rotation about
/// the initial vector is not observable from one probe and is set to zero.
/// Throws when before and after are antiparallel (axis undetermined).
Reconstruction reconstruct_su2_single(const StokesVector& before, const StokesVector& after);

/// +x, +y and +z Bloch states.
std::vector<Spin> axis_probe_states();

/// Rotation matrix to (u0 >= 0, u), inverse of SU2::rotation_matrix.
SU2 su2_from_rotation(const Eigen::Matrix3d& r);

void write_stokes_csv(std::ostream& out, const std::vector<std::pair<double, StokesVector>>& series);

/// {u0, ux, uy, uz, residual}
nlohmann::json operator_json(const Reconstruction& r);

}  // namespace rh
