#include "rh/noise.hpp"

#include "rh/integrator.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <ostream>
#include <random>
#include <thread>

namespace rh {

void NoiseSpec::validate() const {
    if (!(sigma_b_rel >= 0.0) || !(sigma_p_rel >= 0.0) || !(sigma_phase >= 0.0)) {
        throw std::invalid_argument("noise sigmas must be >= 0");
    }
    if (n_fluctuations < 1) {
        throw std::invalid_argument("n_fluctuations must be >= 1");
    }
}

bool operator==(const NoiseSpec& a, const NoiseSpec& b) {
    return a.sigma_b_rel == b.sigma_b_rel && a.sigma_p_rel == b.sigma_p_rel &&
           a.sigma_phase == b.sigma_phase && a.n_fluctuations == b.n_fluctuations &&
           a.seed == b.seed && a.hold == b.hold;
}

NoiseRealization::Offsets NoiseRealization::at(double t) const {
    const std::size_t n = events();
    if (n == 0) {
        return {};
    }
    const double spacing = event_spacing();
    const double pos = std::max(0.0, t / spacing);
    const std::size_t k = std::min(n - 1, static_cast<std::size_t>(pos));
    if (hold == NoiseHold::PiecewiseConstant || k + 1 >= n) {
        return {field[k], power_a[k], power_b[k], phase[k]};
    }
    const double w = pos - static_cast<double>(k);
    auto lerp = [w, k](const std::vector<double>& v) { return (1.0 - w) * v[k] + w * v[k + 1]; };
    return {lerp(field), lerp(power_a), lerp(power_b), lerp(phase)};
}

NoiseRealization draw_noise(const NoiseSpec& spec, double duration, std::uint64_t seed) {
    spec.validate();
    if (!(duration > 0.0)) {
        throw std::invalid_argument("draw_noise: duration must be > 0");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    NoiseRealization r;
    r.duration = duration;
    r.hold = spec.hold;
    const auto n = static_cast<std::size_t>(spec.n_fluctuations);
    r.field.reserve(n);
    r.power_a.reserve(n);
    r.power_b.reserve(n);
    r.phase.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double zb = normal(rng);
        const double za = normal(rng);
        const double zc = normal(rng);
        const double zp = normal(rng);
        r.field.push_back(spec.sigma_b_rel * zb);
        r.power_a.push_back(spec.sigma_p_rel * za);
        r.power_b.push_back(spec.sigma_p_rel * zc);
        r.phase.push_back(spec.sigma_phase * zp);
    }
    return r;
}

HamiltonianFn apply_noise(const DriveParams& d, const NoiseRealization& noise,
                          const PerturbationConfig& perturbation) {
    perturbation.validate();
    return [d, noise, perturbation](double t) {
        const auto e = noise.at(t);
        const double carrier = std::cos(d.fast_omega * t + d.theta_offset);
        const double transverse =
            std::sqrt(std::max(0.0, (1.0 + e.power_a) * (1.0 + e.power_b)));
        const double longitudinal = 1.0 + e.field;
        const Vector3 r = r_hat(d.theta_at(t), d.phi + e.phase);
        const Vector3 scaled(r(0) * transverse, r(1) * transverse, r(2) * longitudinal);
        ComplexMat2 h = pauli_vector(Vector3(d.omega0 * carrier * scaled));
        const double z = perturbation.any_enabled() ? perturbation_shift(t, d, perturbation) : 0.0;
        h(0, 0) += z;
        h(1, 1) -= z;
        return h;
    };
}

HamiltonianFn apply_noise(const DriveParams& d, const NoiseSpec& spec,
                          const PerturbationConfig& perturbation) {
    return apply_noise(d, draw_noise(spec, d.duration, spec.seed), perturbation);
}

std::vector<Spin> bloch_sphere_states(int n) {
    if (n < 2) {
        throw std::invalid_argument("bloch_sphere_states: n must be >= 2");
    }
    std::vector<Vector3> dirs;
    if (n == 2) {
        dirs = {Vector3::UnitZ(), -Vector3::UnitZ()};
    } else if (n == 6) {
        dirs = {Vector3::UnitZ(),  -Vector3::UnitZ(), Vector3::UnitX(),
                -Vector3::UnitX(), Vector3::UnitY(),  -Vector3::UnitY()};
    } else if (n == 26) {
        for (int i = -1; i <= 1; ++i) {
            for (int j = -1; j <= 1; ++j) {
                for (int k = -1; k <= 1; ++k) {
                    if (i != 0 || j != 0 || k != 0) {
                        dirs.emplace_back(Vector3(k, j, -i).normalized());
                    }
                }
            }
        }
    } else {
        const double golden = kPi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < n; ++i) {
            const double z = 1.0 - (2.0 * i + 1.0) / n;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double az = golden * i;
            dirs.emplace_back(rho * std::cos(az), rho * std::sin(az), z);
        }
    }
    std::vector<Spin> out;
    out.reserve(dirs.size());
    for (const auto& v : dirs) {
        out.push_back(Spin::from_bloch(v));
    }
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, int count, int state, int run) {
    std::uint64_t x = splitmix64(master);
    x = splitmix64(x ^ static_cast<std::uint32_t>(count));
    x = splitmix64(x ^ static_cast<std::uint32_t>(state));
    return splitmix64(x ^ static_cast<std::uint32_t>(run));
}

double SweepPoint::standard_error() const {
    return n_samples > 0 ? std_dev / std::sqrt(static_cast<double>(n_samples)) : 0.0;
}

FidelitySweepResult fidelity_sweep(const std::vector<int>& counts, const NoiseSpec& spec,
                                   const DriveParams& d, const SU2& ideal,
                                   const SweepOptions& options) {
    spec.validate();
    if (options.runs_per_state < 1 || options.n_states < 2) {
        throw std::invalid_argument("fidelity_sweep: need >= 1 run and >= 2 states");
    }
    if (counts.empty()) {
        throw std::invalid_argument("fidelity_sweep: empty count list");
    }
    for (int c : counts) {
        if (c < 1) {
            throw std::invalid_argument("fidelity_sweep: fluctuation counts must be >= 1");
        }
    }
    const std::vector<Spin> states = bloch_sphere_states(options.n_states);
    const int per_count = options.n_states * options.runs_per_state;

    FidelitySweepResult result;
    result.raw.resize(counts.size() * static_cast<std::size_t>(per_count));
    for (std::size_t ci = 0; ci < counts.size(); ++ci) {
        for (int s = 0; s < options.n_states; ++s) {
            for (int r = 0; r < options.runs_per_state; ++r) {
                RawFidelity& task =
                    result.raw[ci * per_count + static_cast<std::size_t>(s * options.runs_per_state + r)];
                task.n_fluctuations = counts[ci];
                task.state = s;
                task.run = r;
                task.seed = derive_seed(spec.seed, counts[ci], s, r);
            }
        }
    }

    IntegratorOptions integ;
    integ.dt = d.fast_period() / options.dt_divisor;
    integ.resolution_period = d.fast_period();
    integ.record_stride = 1 << 30;

    std::vector<std::exception_ptr> errors(result.raw.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < result.raw.size(); i = next++) {
            RawFidelity& task = result.raw[i];
            try {
                NoiseSpec local = spec;
                local.n_fluctuations = task.n_fluctuations;
                const NoiseRealization noise = draw_noise(local, d.duration, task.seed);
                const Spin& psi0 = states[static_cast<std::size_t>(task.state)];
                const Trajectory traj =
                    solve_tdse(apply_noise(d, noise, options.perturbation), psi0, 0.0, d.duration, integ);
                task.fidelity = fidelity(ideal.apply(psi0), traj.back().state);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int workers = std::max(1, options.workers);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) {
            continue;
        }
        const RawFidelity& task = result.raw[i];
        std::string reason;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            reason = e.what();
        } catch (...) {
            reason = "unknown error";
        }
        throw SweepFailure("fidelity_sweep failed at count " + std::to_string(task.n_fluctuations) +
                               ", state " + std::to_string(task.state) + ", run " +
                               std::to_string(task.run) + ", seed " + std::to_string(task.seed) +
                               ": " + reason,
                           task);
    }

    for (std::size_t ci = 0; ci < counts.size(); ++ci) {
        SweepPoint p;
        p.n_fluctuations = counts[ci];
        p.n_samples = per_count;
        double sum = 0.0;
        for (int k = 0; k < per_count; ++k) {
            sum += result.raw[ci * per_count + k].fidelity;
        }
        p.mean = sum / per_count;
        double sq = 0.0;
        for (int k = 0; k < per_count; ++k) {
            const double dev = result.raw[ci * per_count + k].fidelity - p.mean;
            sq += dev * dev;
        }
        p.std_dev = per_count > 1 ? std::sqrt(sq / (per_count - 1)) : 0.0;
        result.points.push_back(p);
    }
    return result;
}

void write_sweep_csv(std::ostream& out, const FidelitySweepResult& r) {
    out << "n_fluctuations,mean_fidelity,std_fidelity,n_samples\n" << std::setprecision(17);
    for (const auto& p : r.points) {
        out << p.n_fluctuations << ',' << p.mean << ',' << p.std_dev << ',' << p.n_samples << '\n';
    }
}

void write_raw_csv(std::ostream& out, const FidelitySweepResult& r) {
    out << "n_fluctuations,state,run,seed,fidelity\n" << std::setprecision(17);
    for (const auto& f : r.raw) {
        out << f.n_fluctuations << ',' << f.state << ',' << f.run << ',' << f.seed << ','
            << f.fidelity << '\n';
    }
}

nlohmann::json noise_spec_json(const NoiseSpec& spec) {
    return nlohmann::json{{"sigma_b_rel", spec.sigma_b_rel},
                          {"sigma_p_rel", spec.sigma_p_rel},
                          {"sigma_phase_rad", spec.sigma_phase},
                          {"seed", spec.seed},
                          {"hold", spec.hold == NoiseHold::Linear ? "linear" : "piecewise-constant"}};
}

nlohmann::json sweep_summary_json(const FidelitySweepResult& r, const NoiseSpec& spec,
                                  const SweepOptions& options) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : r.points) {
        points.push_back({{"n_fluctuations", p.n_fluctuations},
                          {"mean_fidelity", p.mean},
                          {"std_fidelity", p.std_dev},
                          {"standard_error", p.standard_error()},
                          {"n_samples", p.n_samples}});
    }
    return nlohmann::json{{"spec", noise_spec_json(spec)},
                          {"seed", spec.seed},
                          {"runs_per_state", options.runs_per_state},
                          {"n_states", options.n_states},
                          {"dt_divisor", options.dt_divisor},
                          {"rng", "mt19937_64, splitmix64 sub-seeds per (count, state, run)"},
                          {"points", points}};
}

}  // namespace rh
