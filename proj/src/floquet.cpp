#include "rh/floquet.hpp"

#include "rh/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

namespace rh {

namespace {

// Power series, summed in extended precision; the largest term near |x| = 20
// is ~1e7, leaving ~1e-12 absolute error.
double j0_series(double x) {
    const long double q = static_cast<long double>(x) * x / 4.0L;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<long double>(k) * k);
        sum += term;
        if (std::abs(term) < 1e-22L) {
            break;
        }
    }
    return static_cast<double>(sum);
}

// Hankel asymptotic expansion, truncated at the smallest term.
double j0_asymptotic(double x) {
    x = std::abs(x);
    double p = 0.0;
    double q = 0.0;
    double a = 1.0;  // a_k / x^k
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 60; ++k) {
        if (std::abs(a) > previous) {
            break;
        }
        previous = std::abs(a);
        // contributions alternate P, Q with sign (-1)^(k/2)
        const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0) {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if (std::abs(a) < 1e-18) {
            break;
        }
        const double odd = 2.0 * (k + 1) - 1.0;
        a *= -(odd * odd) / (static_cast<double>(k + 1) * 8.0 * x);
    }
    const double w = x - kPi / 4.0;
    return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(w) - q * std::sin(w));
}

}  // namespace

double bessel_j0(double x) {
    if (!std::isfinite(x)) {
        return std::isnan(x) ? x : 0.0;
    }
    return std::abs(x) <= 20.0 ? j0_series(x) : j0_asymptotic(x);
}

double g_factor(double omega0, double fast_omega) {
    if (!(fast_omega > 0.0)) {
        throw std::invalid_argument("g_factor: fast_omega must be > 0");
    }
    return 0.5 * (bessel_j0(2.0 * omega0 / fast_omega) - 1.0);
}

Vector3 holonomy_axis(double phi) {
    return Vector3(-std::sin(phi), std::cos(phi), 0.0);
}

ComplexMat2 effective_hamiltonian(const DriveParams& d) {
    const double g = g_factor(d.omega0, d.fast_omega);
    return pauli_vector(Vector3(-d.slow_omega * g * holonomy_axis(d.phi)));
}

SU2 evolution_operator(double t0, double t, const DriveParams& d) {
    if (t < t0) {
        throw std::invalid_argument("evolution_operator: t must be >= t0");
    }
    const double g = g_factor(d.omega0, d.fast_omega);
    const double swept = d.theta_at(t) - d.theta_at(t0);
    return exp_su2(-g * swept, holonomy_axis(d.phi));
}

SU2 cyclic_operator(int m, double phi, double g) {
    return exp_su2(-kTwoPi * m * g, holonomy_axis(phi));
}

FloquetPrediction predict_cycles(const DriveParams& d, int m) {
    FloquetPrediction p;
    p.g = g_factor(d.omega0, d.fast_omega);
    p.gamma = kTwoPi * m * p.g;
    p.axis = holonomy_axis(d.phi);
    p.u_cyclic = cyclic_operator(m, d.phi, p.g);
    return p;
}

Spin floquet_state(const Spin& psi0, const DriveParams& d, double t) {
    const SU2 u = micromotion(t, d).adjoint() * evolution_operator(0.0, t, d) * micromotion(0.0, d);
    return u.apply(psi0);
}

bool is_stroboscopic(double t, const DriveParams& d) {
    const double cycles = (d.fast_omega * t + d.theta_offset) / kTwoPi;
    return std::abs(cycles - std::round(cycles)) <= 1e-7;
}

std::vector<std::pair<double, Spin>> stroboscopic_prediction(const Spin& psi0, const DriveParams& d,
                                                             const std::vector<double>& times) {
    std::vector<std::pair<double, Spin>> out;
    out.reserve(times.size());
    const SU2 r0 = micromotion(0.0, d);
    for (double t : times) {
        if (t < 0.0 || !is_stroboscopic(t, d)) {
            throw std::invalid_argument("stroboscopic_prediction: t = " + std::to_string(t) +
                                        " s is not the end of a fast cycle");
        }
        // R(T_q) is the identity
        out.emplace_back(t, (evolution_operator(0.0, t, d) * r0).apply(psi0));
    }
    return out;
}

std::vector<double> stroboscopic_times(const DriveParams& d, int count) {
    const long long first = static_cast<long long>(std::ceil(d.theta_offset / kTwoPi - 1e-12));
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(count + 1));
    for (long long q = first; q <= first + count; ++q) {
        times.push_back((kTwoPi * static_cast<double>(q) - d.theta_offset) / d.fast_omega);
    }
    return times;
}

// Adiabaticity --------------------------------------------------------------

namespace {

ComplexMat2 floquet_frame_hamiltonian(const DriveParams& d, double theta, double fast_phase) {
    // A_Theta = i (dR/dTheta) R^dag by central differences at fixed fast phase
    constexpr double h = 1e-5;
    const ComplexMat2 plus = micromotion_at(theta + h, fast_phase, d).matrix();
    const ComplexMat2 minus = micromotion_at(theta - h, fast_phase, d).matrix();
    const ComplexMat2 r_dag = micromotion_at(theta, fast_phase, d).matrix().adjoint();
    const std::complex<double> i(0.0, 1.0);
    const ComplexMat2 a = i * (plus - minus) * r_dag / (2.0 * h);
    return d.slow_omega * a;
}

ComplexMat2 harmonic_with_points(const DriveParams& d, double theta, int l, int points) {
    ComplexMat2 acc = ComplexMat2::Zero();
    for (int j = 0; j < points; ++j) {
        const double phase = kTwoPi * j / points;
        acc += floquet_frame_hamiltonian(d, theta, phase) * std::polar(1.0, -l * phase);
    }
    return acc / static_cast<double>(points);
}

}  // namespace

ComplexMat2 floquet_harmonic(const DriveParams& d, double theta, int l) {
    const double scale = std::abs(d.slow_omega) * std::max(1.0, d.omega0 / d.fast_omega);
    const double tol = 1e-9 * std::max(scale, 1e-300);
    int points = 32;
    ComplexMat2 previous = harmonic_with_points(d, theta, l, points);
    double residual = 0.0;
    while (points < (1 << 16)) {
        points *= 2;
        const ComplexMat2 next = harmonic_with_points(d, theta, l, points);
        residual = (next - previous).cwiseAbs().maxCoeff();
        if (residual <= tol) {
            return next;
        }
        previous = next;
    }
    throw QuadratureError("Floquet harmonic l=" + std::to_string(l) +
                              " did not converge (residual " + std::to_string(residual) + " rad/s)",
                          residual);
}

AdiabaticityReport adiabaticity_report(const DriveParams& d, int max_harmonic, double threshold) {
    if (max_harmonic < 0) {
        throw std::invalid_argument("adiabaticity_report: max_harmonic must be >= 0");
    }
    constexpr int kThetaSamples = 16;
    AdiabaticityReport report;
    report.threshold = threshold;
    for (int l = 0; l <= max_harmonic; ++l) {
        HarmonicDiagnostic h;
        h.l = l;
        for (int k = 0; k < kThetaSamples; ++k) {
            const double theta = kTwoPi * k / kThetaSamples;
            h.max_element =
                std::max(h.max_element, floquet_harmonic(d, theta, l).cwiseAbs().maxCoeff());
        }
        h.ratio = h.max_element / d.fast_omega;
        h.flagged = h.ratio > threshold;
        report.max_ratio = std::max(report.max_ratio, h.ratio);
        report.flagged = report.flagged || h.flagged;
        report.harmonics.push_back(h);
    }
    return report;
}

void to_json(nlohmann::json& j, const HarmonicDiagnostic& h) {
    j = nlohmann::json{{"l", h.l},
                       {"max_element_rad_per_s", h.max_element},
                       {"ratio", h.ratio},
                       {"flagged", h.flagged}};
}

void to_json(nlohmann::json& j, const AdiabaticityReport& r) {
    j = nlohmann::json{{"harmonics", r.harmonics},
                       {"max_ratio", r.max_ratio},
                       {"threshold", r.threshold},
                       {"flagged", r.flagged}};
}

}  // namespace rh
