#include "rh/measurement.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace rh {

double relative_phase(const Spin& psi) {
    if (psi.c1() == 0.0 || psi.c2() == 0.0) {
        return 0.0;
    }
    double beta = std::arg(psi.c2()) - std::arg(psi.c1());
    if (beta > kPi) {
        beta -= kTwoPi;
    } else if (beta <= -kPi) {
        beta += kTwoPi;
    }
    return beta;
}

StokesVector stokes(const Spin& psi) {
    const double c1 = std::abs(psi.c1());
    const double c2 = std::abs(psi.c2());
    const double beta = relative_phase(psi);
    return {2.0 * c1 * c2 * std::cos(beta), 2.0 * c1 * c2 * std::sin(beta), c1 * c1 - c2 * c2};
}

Spin zeeman_phase_correction(const Spin& psi, double delta_laser_freq_hz, double t,
                             PhaseCorrection direction) {
    const double alpha = kTwoPi * delta_laser_freq_hz * t;
    const double sign = direction == PhaseCorrection::LabToRotating ? -1.0 : 1.0;
    Spin::Amplitudes a = psi.amplitudes();
    a(1) *= std::polar(1.0, sign * alpha);
    return Spin::normalized(a);
}

SU2 su2_from_rotation(const Eigen::Matrix3d& r) {
    // Shepperd: pick the largest of 4w^2, 4x^2, 4y^2, 4z^2 to divide by.
    const double tr = r.trace();
    double w, x, y, z;
    if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
        w = 0.5 * std::sqrt(std::max(0.0, 1.0 + tr));
        x = (r(2, 1) - r(1, 2)) / (4.0 * w);
        y = (r(0, 2) - r(2, 0)) / (4.0 * w);
        z = (r(1, 0) - r(0, 1)) / (4.0 * w);
    } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
        x = 0.5 * std::sqrt(std::max(0.0, 1.0 + 2.0 * r(0, 0) - tr));
        w = (r(2, 1) - r(1, 2)) / (4.0 * x);
        y = (r(0, 1) + r(1, 0)) / (4.0 * x);
        z = (r(0, 2) + r(2, 0)) / (4.0 * x);
    } else if (r(1, 1) >= r(2, 2)) {
        y = 0.5 * std::sqrt(std::max(0.0, 1.0 + 2.0 * r(1, 1) - tr));
        w = (r(0, 2) - r(2, 0)) / (4.0 * y);
        x = (r(0, 1) + r(1, 0)) / (4.0 * y);
        z = (r(1, 2) + r(2, 1)) / (4.0 * y);
    } else {
        z = 0.5 * std::sqrt(std::max(0.0, 1.0 + 2.0 * r(2, 2) - tr));
        w = (r(1, 0) - r(0, 1)) / (4.0 * z);
        x = (r(0, 2) + r(2, 0)) / (4.0 * z);
        y = (r(1, 2) + r(2, 1)) / (4.0 * z);
    }
    if (w < 0.0) {
        w = -w;
        x = -x;
        y = -y;
        z = -z;
    }
    return SU2::from_components(w, Vector3(x, y, z));
}

Reconstruction reconstruct_su2(const std::vector<StokesVector>& before,
                               const std::vector<StokesVector>& after, double residual_threshold) {
    if (before.size() != after.size()) {
        throw std::invalid_argument("reconstruct_su2: probe count mismatch");
    }
    if (before.size() < 2) {
        throw std::invalid_argument("reconstruct_su2: need at least two probes");
    }
    Eigen::Matrix3d spread = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < before.size(); ++i) {
        const Vector3 x = before[i].vec();
        const Vector3 y = after[i].vec();
        spread += x * x.transpose();
        cross += y * x.transpose();
    }
    const Eigen::JacobiSVD<Eigen::Matrix3d> probe_svd(spread);
    const auto& sv = probe_svd.singularValues();
    if (!(sv(1) > 1e-8 * std::max(1.0, sv(0)))) {
        throw std::invalid_argument("reconstruct_su2: probe states are collinear");
    }

    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Matrix3d u = svd.matrixU();
    const Eigen::Matrix3d v = svd.matrixV();
    Eigen::Matrix3d fix = Eigen::Matrix3d::Identity();
    fix(2, 2) = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    const Eigen::Matrix3d r = u * fix * v.transpose();

    double sq = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i) {
        sq += (r * before[i].vec() - after[i].vec()).squaredNorm();
    }
    Reconstruction out{su2_from_rotation(r), std::sqrt(sq / static_cast<double>(before.size())),
                       false};
    out.warning = out.residual > residual_threshold;
    return out;
}

Reconstruction reconstruct_su2_single(const StokesVector& before, const StokesVector& after) {
    const Vector3 a = before.vec().normalized();
    const Vector3 b = after.vec().normalized();
    const Vector3 c = a.cross(b);
    const double s = c.norm();
    const double cosang = std::clamp(a.dot(b), -1.0, 1.0);
    Reconstruction out;
    out.residual = std::abs(before.norm() - after.norm());
    if (s < 1e-12) {
        if (cosang < 0.0) {
            throw std::invalid_argument(
                "reconstruct_su2_single: antiparallel vectors leave the axis undetermined");
        }
        out.op = SU2::identity();
        return out;
    }
    const double half = 0.5 * std::atan2(s, cosang);
    out.op = exp_su2(half, Vector3(c / s));
    return out;
}

std::vector<Spin> axis_probe_states() {
    return {Spin::from_bloch(Vector3::UnitX()), Spin::from_bloch(Vector3::UnitY()),
            Spin::from_bloch(Vector3::UnitZ())};
}

void write_stokes_csv(std::ostream& out,
                      const std::vector<std::pair<double, StokesVector>>& series) {
    out << "t_s,S1,S2,S3\n" << std::setprecision(17);
    for (const auto& [t, s] : series) {
        out << t << ',' << s.s1 << ',' << s.s2 << ',' << s.s3 << '\n';
    }
}

nlohmann::json operator_json(const Reconstruction& r) {
    return nlohmann::json{{"u0", r.op.u0()},
                          {"ux", r.op.u()(0)},
                          {"uy", r.op.u()(1)},
                          {"uz", r.op.u()(2)},
                          {"residual", r.residual}};
}

}  // namespace rh
