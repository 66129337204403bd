#include "rh/integrator.hpp"

#include "rh/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace rh {

namespace {

using Amplitudes = Spin::Amplitudes;

bool commensurate(double duration, double period) {
    const double n = duration / period;
    return n >= 0.5 && std::abs(n - std::round(n)) <= 1e-6 * std::max(1.0, n);
}

std::string describe(double v) {
    std::ostringstream os;
    os << std::setprecision(9) << v;
    return os.str();
}

}  // namespace

Trajectory solve_tdse(const HamiltonianFn& h, const Spin& psi0, double t_begin, double t_end,
                      const IntegratorOptions& options) {
    if (!(t_end > t_begin)) {
        throw std::invalid_argument("solve_tdse: empty time span");
    }
    if (!(options.dt > 0.0)) {
        throw std::invalid_argument("solve_tdse: dt must be > 0");
    }
    if (options.resolution_period > 0.0 && options.dt > options.resolution_period / 40.0) {
        throw std::invalid_argument("solve_tdse: dt = " + describe(options.dt) +
                                    " s exceeds the resolution floor (period/40 = " +
                                    describe(options.resolution_period / 40.0) + " s)");
    }
    const double span = t_end - t_begin;
    const long long steps = std::max<long long>(1, static_cast<long long>(std::ceil(span / options.dt - 1e-9)));
    const double dt = span / static_cast<double>(steps);
    const int stride = std::max(1, options.record_stride);

    Trajectory traj;
    traj.dt = dt;
    traj.steps = steps;
    traj.samples.reserve(static_cast<std::size_t>(steps / stride + 2));
    traj.samples.push_back({t_begin, psi0});

    const std::complex<double> minus_i(0.0, -1.0);
    Amplitudes psi = psi0.amplitudes();
    double t = t_begin;
    ComplexMat2 h_start = h(t);
    for (long long k = 0; k < steps; ++k) {
        const double t_mid = t_begin + (static_cast<double>(k) + 0.5) * dt;
        const double t_next = t_begin + static_cast<double>(k + 1) * dt;
        const ComplexMat2 h_mid = h(t_mid);
        const ComplexMat2 h_end = h(t_next);

        const Amplitudes k1 = minus_i * (h_start * psi);
        const Amplitudes k2 = minus_i * (h_mid * (psi + 0.5 * dt * k1));
        const Amplitudes k3 = minus_i * (h_mid * (psi + 0.5 * dt * k2));
        const Amplitudes k4 = minus_i * (h_end * (psi + dt * k3));
        Amplitudes next = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        const double norm = next.norm();
        if (!std::isfinite(norm) || norm == 0.0) {
            throw NumericalFailure("solve_tdse: state became non-finite after t = " + describe(t) +
                                       " s",
                                   t);
        }
        const double drift = std::abs(norm - 1.0);
        traj.max_step_drift = std::max(traj.max_step_drift, drift);
        traj.total_drift += drift;
        psi = next / norm;
        t = t_next;
        h_start = h_end;

        if ((k + 1) % stride == 0 || k + 1 == steps) {
            traj.samples.push_back({t, Spin(psi)});
        }
    }
    return traj;
}

Trajectory solve_drive(const DriveParams& d, const Spin& psi0, int dt_divisor,
                       const PerturbationConfig& perturbation) {
    if (dt_divisor < 40) {
        throw std::invalid_argument("dt divisor must be >= 40");
    }
    IntegratorOptions options;
    options.dt = d.fast_period() / dt_divisor;
    options.resolution_period = d.fast_period();
    const HamiltonianFn h = perturbation.any_enabled() ? perturbed_hamiltonian(d, perturbation)
                                                      : ideal_hamiltonian(d);
    return solve_tdse(h, psi0, 0.0, d.duration, options);
}

StroboscopicSamples stroboscopic_sample(const Trajectory& traj, double fast_omega,
                                        double theta_offset) {
    StroboscopicSamples out;
    if (traj.samples.empty()) {
        return out;
    }
    const double t0 = traj.front().t;
    const double t1 = traj.back().t;
    const double period = kTwoPi / fast_omega;
    const double slack = 1e-9 * period;
    const long long q_first = static_cast<long long>(std::ceil((fast_omega * t0 + theta_offset) / kTwoPi - 1e-9));
    const long long q_last = static_cast<long long>(std::floor((fast_omega * t1 + theta_offset) / kTwoPi + 1e-9));

    const auto& s = traj.samples;
    for (long long q = q_first; q <= q_last; ++q) {
        const double tq = (kTwoPi * static_cast<double>(q) - theta_offset) / fast_omega;
        auto it = std::lower_bound(s.begin(), s.end(), tq - slack,
                                   [](const TrajectorySample& a, double v) { return a.t < v; });
        if (it != s.end() && std::abs(it->t - tq) <= slack) {
            out.samples.emplace_back(tq, it->state);
            continue;
        }
        if (it == s.begin() || it == s.end()) {
            continue;
        }
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double w = (tq - lo.t) / (hi.t - lo.t);
        const Amplitudes mixed = (1.0 - w) * lo.state.amplitudes() + w * hi.state.amplitudes();
        out.samples.emplace_back(tq, Spin::normalized(mixed));
        out.interpolated = true;
    }
    return out;
}

Trajectory run_sequence(const std::vector<Segment>& segments, const Spin& psi0, int dt_divisor,
                        const PerturbationConfig& perturbation) {
    if (segments.empty()) {
        throw std::invalid_argument("run_sequence: no segments");
    }
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const Segment& seg = segments[i];
        const bool fast_ok = commensurate(seg.duration, seg.drive.fast_period());
        const bool slow_ok =
            seg.drive.slow_omega == 0.0 || commensurate(seg.duration, seg.drive.slow_period());
        if (!fast_ok || !slow_ok) {
            throw IncommensurateSegmentError("run_sequence: segment " + std::to_string(i) +
                                        " duration " + describe(seg.duration) +
                                        " s is not a whole number of fast and slow periods");
        }
    }

    Trajectory total;
    Spin state = psi0;
    double offset = 0.0;
    for (const Segment& seg : segments) {
        DriveParams d = seg.drive;
        d.duration = seg.duration;
        const Trajectory part = solve_drive(d, state, dt_divisor, perturbation);
        const std::size_t skip = total.samples.empty() ? 0 : 1;
        for (std::size_t k = skip; k < part.samples.size(); ++k) {
            total.samples.push_back({offset + part.samples[k].t, part.samples[k].state});
        }
        total.dt = std::max(total.dt, part.dt);
        total.max_step_drift = std::max(total.max_step_drift, part.max_step_drift);
        total.total_drift += part.total_drift;
        total.steps += part.steps;
        state = part.back().state;
        offset += seg.duration;
    }
    return total;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, double fast_omega,
                          double theta_offset) {
    out << "t_s,re_c1,im_c1,re_c2,im_c2,S1,S2,S3,stroboscopic\n";
    out << std::setprecision(17);
    const double period = kTwoPi / fast_omega;
    for (const auto& s : traj.samples) {
        const auto& a = s.state.amplitudes();
        const Vector3 b = s.state.bloch();
        const double cycles = (fast_omega * s.t + theta_offset) / kTwoPi;
        const bool strobe = std::abs(cycles - std::round(cycles)) * period <= 1e-9 * period;
        out << s.t << ',' << a(0).real() << ',' << a(0).imag() << ',' << a(1).real() << ','
            << a(1).imag() << ',' << b(0) << ',' << b(1) << ',' << b(2) << ',' << (strobe ? 1 : 0)
            << '\n';
    }
}

nlohmann::json trajectory_metadata(const Trajectory& traj, const DriveParams& d) {
    return nlohmann::json{
        {"dt", traj.dt},
        {"method", traj.method},
        {"method_order", traj.method_order},
        {"steps", traj.steps},
        {"drift", {{"max_step", traj.max_step_drift}, {"total", traj.total_drift}}},
        {"params",
         {{"omega0_rad_per_s", d.omega0},
          {"slow_omega_rad_per_s", d.slow_omega},
          {"fast_omega_rad_per_s", d.fast_omega},
          {"phi_rad", d.phi},
          {"theta_offset_rad", d.theta_offset},
          {"duration_s", d.duration}}}};
}

}  // namespace rh
