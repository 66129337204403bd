// 2x2 complex linear algebra, Pauli matrices and SU(2) operators.
//
// Everything here is templated on the real scalar type; the rest of the
// library instantiates it with double through the aliases at the bottom.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rh {

/// Tolerance `base` for double, widened to 100 ulp for coarser scalars.
template <typename Scalar>
constexpr Scalar scaled_tol(double base) {
    return std::max(static_cast<Scalar>(base), Scalar(100) * std::numeric_limits<Scalar>::epsilon());
}

template <typename Scalar>
using Mat2 = Eigen::Matrix<std::complex<Scalar>, 2, 2>;
template <typename Scalar>
using CVec2 = Eigen::Matrix<std::complex<Scalar>, 2, 1>;
template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
Mat2<Scalar> sigma_x() {
    Mat2<Scalar> m;
    m << Scalar(0), Scalar(1), Scalar(1), Scalar(0);
    return m;
}

template <typename Scalar>
Mat2<Scalar> sigma_y() {
    using C = std::complex<Scalar>;
    Mat2<Scalar> m;
    m << C(0), C(0, -1), C(0, 1), C(0);
    return m;
}

template <typename Scalar>
Mat2<Scalar> sigma_z() {
    Mat2<Scalar> m;
    m << Scalar(1), Scalar(0), Scalar(0), Scalar(-1);
    return m;
}

/// n_x sigma_x + n_y sigma_y + n_z sigma_z. `n` need not be a unit vector.
template <typename Derived>
Mat2<typename Derived::Scalar> pauli_vector(const Eigen::MatrixBase<Derived>& n) {
    using Scalar = typename Derived::Scalar;
    using C = std::complex<Scalar>;
    Mat2<Scalar> m;
    m << C(n(2)), C(n(0), -n(1)), C(n(0), n(1)), C(-n(2));
    return m;
}

/// Coefficients (x, y, z) of the traceless part of a Hermitian 2x2 matrix,
/// i.e. the inverse of pauli_vector.
template <typename Scalar>
Vec3<Scalar> pauli_components(const Mat2<Scalar>& m) {
    return Vec3<Scalar>(std::real(m(0, 1) + m(1, 0)) / 2,
                        std::imag(m(1, 0) - m(0, 1)) / 2,
                        std::real(m(0, 0) - m(1, 1)) / 2);
}

template <typename Scalar>
bool is_hermitian(const Mat2<Scalar>& m, Scalar tol) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

template <typename Scalar>
bool is_unitary(const Mat2<Scalar>& m, Scalar tol) {
    return (m.adjoint() * m - Mat2<Scalar>::Identity()).norm() < tol;
}

/// Normalized pseudo-spin-1/2 state c1|1> + c2|2>.
template <typename Scalar>
class SpinState {
public:
    using Amplitudes = CVec2<Scalar>;

    SpinState() : amps_(std::complex<Scalar>(1), std::complex<Scalar>(0)) {}

    /// Takes amplitudes that are already normalized; throws otherwise.
    explicit SpinState(const Amplitudes& amps) : amps_(amps) {
        const Scalar norm = amps_.norm();
        if (!std::isfinite(norm) || std::abs(norm - Scalar(1)) > scaled_tol<Scalar>(1e-9)) {
            throw std::invalid_argument("SpinState: amplitudes are not normalized (norm " +
                                        std::to_string(static_cast<double>(norm)) + ")");
        }
        amps_ /= norm;
    }

    SpinState(std::complex<Scalar> c1, std::complex<Scalar> c2) : SpinState(Amplitudes(c1, c2)) {}

    /// Normalizes arbitrary nonzero amplitudes.
    static SpinState normalized(const Amplitudes& amps) {
        const Scalar norm = amps.norm();
        if (!(norm > Scalar(0)) || !std::isfinite(norm)) {
            throw std::invalid_argument("SpinState: cannot normalize a zero or non-finite vector");
        }
        return SpinState(Amplitudes(amps / norm));
    }

    static SpinState up() { return SpinState(); }
    static SpinState down() {
        return SpinState(std::complex<Scalar>(0), std::complex<Scalar>(1));
    }

    /// State whose Bloch vector (<sigma_x>, <sigma_y>, <sigma_z>) points along `n`.
    template <typename Derived>
    static SpinState from_bloch(const Eigen::MatrixBase<Derived>& n) {
        const Vec3<Scalar> u = n.normalized();
        const Scalar theta = std::acos(std::clamp(u(2), Scalar(-1), Scalar(1)));
        const Scalar phi = std::atan2(u(1), u(0));
        return SpinState(std::complex<Scalar>(std::cos(theta / 2)),
                         std::polar(std::sin(theta / 2), phi));
    }

    const Amplitudes& amplitudes() const { return amps_; }
    std::complex<Scalar> c1() const { return amps_(0); }
    std::complex<Scalar> c2() const { return amps_(1); }

    Vec3<Scalar> bloch() const {
        const std::complex<Scalar> z = std::conj(amps_(0)) * amps_(1);
        return Vec3<Scalar>(2 * z.real(), 2 * z.imag(), std::norm(amps_(0)) - std::norm(amps_(1)));
    }

    SpinState with_global_phase(Scalar chi) const {
        return SpinState(Amplitudes(amps_ * std::polar(Scalar(1), chi)));
    }

private:
    Amplitudes amps_;
};

/// Unitary 2x2 operator U = e^{i chi} (u0 1 - i u.sigma) with u0^2 + |u|^2 = 1.
///
/// The matrix is kept as given; (chi, u0, u) is the cached SU(2) decomposition.
/// The split of a global sign between e^{i chi} and (u0, u) is fixed by
/// chi = arg(det U) / 2 on (-pi/2, pi/2].
template <typename Scalar>
class SU2Operator {
public:
    SU2Operator() : SU2Operator(Mat2<Scalar>::Identity()) {}

    explicit SU2Operator(const Mat2<Scalar>& m) : matrix_(m) {
        if (!is_unitary(m, scaled_tol<Scalar>(1e-8))) {
            throw std::invalid_argument("SU2Operator: matrix is not unitary");
        }
        decompose();
    }

    /// u0 1 - i u.sigma; (u0, u) is renormalized onto the unit 3-sphere.
    template <typename Derived>
    static SU2Operator from_components(Scalar u0, const Eigen::MatrixBase<Derived>& u) {
        const Scalar norm = std::sqrt(u0 * u0 + u.squaredNorm());
        if (!(norm > Scalar(0))) {
            throw std::invalid_argument("SU2Operator: zero quaternion");
        }
        const Vec3<Scalar> v = u / norm;
        return SU2Operator(compose(u0 / norm, v));
    }

    static SU2Operator identity() { return SU2Operator(); }

    const Mat2<Scalar>& matrix() const { return matrix_; }
    Scalar u0() const { return u0_; }
    const Vec3<Scalar>& u() const { return u_; }
    Scalar global_phase() const { return chi_; }

    /// Bloch rotation angle in [0, 2pi] and axis (unit; +z when the angle is 0).
    Scalar rotation_angle() const { return 2 * std::atan2(u_.norm(), u0_); }
    Vec3<Scalar> rotation_axis() const {
        const Scalar s = u_.norm();
        return s > Scalar(0) ? Vec3<Scalar>(u_ / s) : Vec3<Scalar>::UnitZ();
    }

    /// SO(3) matrix acting on Bloch vectors: bloch(U psi) = R bloch(psi).
    Eigen::Matrix<Scalar, 3, 3> rotation_matrix() const {
        const Scalar w = u0_, x = u_(0), y = u_(1), z = u_(2);
        Eigen::Matrix<Scalar, 3, 3> r;
        r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
             2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
             2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
        return r;
    }

    SU2Operator adjoint() const { return SU2Operator(Mat2<Scalar>(matrix_.adjoint())); }

    SU2Operator operator*(const SU2Operator& rhs) const {
        return SU2Operator(Mat2<Scalar>(matrix_ * rhs.matrix_));
    }

    SpinState<Scalar> apply(const SpinState<Scalar>& psi) const {
        return SpinState<Scalar>::normalized(matrix_ * psi.amplitudes());
    }

    /// Matrix with the global phase stripped: u0 1 - i u.sigma.
    Mat2<Scalar> special_matrix() const { return compose(u0_, u_); }

private:
    static Mat2<Scalar> compose(Scalar u0, const Vec3<Scalar>& u) {
        const std::complex<Scalar> i(0, 1);
        return Mat2<Scalar>(u0 * Mat2<Scalar>::Identity() - i * pauli_vector(u));
    }

    void decompose() {
        chi_ = std::arg(matrix_.determinant()) / 2;
        const Mat2<Scalar> v = matrix_ * std::polar(Scalar(1), -chi_);
        // v = u0 1 - i u.sigma  =>  tr v = 2 u0,  tr(sigma_k v) = -2 i u_k
        const std::complex<Scalar> i(0, 1);
        u0_ = std::real(v.trace()) / 2;
        u_ = Vec3<Scalar>(std::real(i * (sigma_x<Scalar>() * v).trace()) / 2,
                          std::real(i * (sigma_y<Scalar>() * v).trace()) / 2,
                          std::real(i * (sigma_z<Scalar>() * v).trace()) / 2);
        const Scalar norm = std::sqrt(u0_ * u0_ + u_.squaredNorm());
        u0_ /= norm;
        u_ /= norm;
    }

    Mat2<Scalar> matrix_;
    Scalar chi_ = 0;
    Scalar u0_ = 1;
    Vec3<Scalar> u_ = Vec3<Scalar>::Zero();
};

/// cos(angle) 1 - i sin(angle) axis.sigma. `angle` is half the Bloch rotation angle.
template <typename Scalar, typename Derived>
SU2Operator<Scalar> exp_su2(Scalar angle, const Eigen::MatrixBase<Derived>& axis) {
    const Scalar norm = axis.norm();
    if (!(std::abs(norm - Scalar(1)) <= scaled_tol<Scalar>(1e-9))) {
        throw std::invalid_argument("exp_su2: axis must be a unit vector (norm " +
                                    std::to_string(static_cast<double>(norm)) + ")");
    }
    const Vec3<Scalar> u = std::sin(angle) * axis;
    return SU2Operator<Scalar>::from_components(std::cos(angle), u);
}

/// Frobenius norm of U1 U2 - U2 U1.
template <typename Scalar>
Scalar commutator_frobenius(const SU2Operator<Scalar>& a, const SU2Operator<Scalar>& b) {
    return (a.matrix() * b.matrix() - b.matrix() * a.matrix()).norm();
}

/// |<a|b>|^2 for raw amplitude vectors; both must be normalized.
template <typename Scalar>
Scalar fidelity(const CVec2<Scalar>& a, const CVec2<Scalar>& b) {
    constexpr Scalar tol = scaled_tol<Scalar>(1e-9);
    if (std::abs(a.norm() - 1) > tol || std::abs(b.norm() - 1) > tol) {
        throw std::invalid_argument("fidelity: inputs must be normalized");
    }
    return std::min(Scalar(1), std::norm(a.dot(b)));
}

template <typename Scalar>
Scalar fidelity(const SpinState<Scalar>& a, const SpinState<Scalar>& b) {
    return fidelity(a.amplitudes(), b.amplitudes());
}

/// Phase-sensitive Frobenius distance ||A - B||_F.
template <typename Scalar>
Scalar operator_distance(const SU2Operator<Scalar>& a, const SU2Operator<Scalar>& b) {
    return (a.matrix() - b.matrix()).norm();
}

/// min over chi of ||A - e^{i chi} B||_F. The optimal chi is -arg tr(A^dag B);
/// the norm is then taken directly rather than as sqrt(4 - 2 |tr|), which
/// cancels badly near zero.
template <typename Scalar>
Scalar operator_distance_mod_phase(const SU2Operator<Scalar>& a, const SU2Operator<Scalar>& b) {
    const std::complex<Scalar> overlap = (a.matrix().adjoint() * b.matrix()).trace();
    const Scalar chi = std::abs(overlap) > Scalar(0) ? -std::arg(overlap) : Scalar(0);
    return (a.matrix() - b.matrix() * std::polar(Scalar(1), chi)).norm();
}

using ComplexMat2 = Mat2<double>;
using Vector3 = Vec3<double>;
using Spin = SpinState<double>;
using SU2 = SU2Operator<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2 * std::numbers::pi;

}  // namespace rh
