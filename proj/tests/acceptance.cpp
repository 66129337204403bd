// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "rh/config.hpp"
#include "rh/drive.hpp"
#include "rh/floquet.hpp"
#include "rh/integrator.hpp"
#include "rh/measurement.hpp"
#include "rh/noise.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace rh;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

const std::filesystem::path kData(RH_DATA_DIR);

RunConfig reference_config() {
    return RunConfig::load(kData / "reference.conf");
}

DriveParams reference_drive(double duration) {
    DriveParams d = reference_config().drive_params();
    d.duration = duration;
    return d;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

bool within(const Vector3& v, const Vector3& target, double tol) {
    return (v - target).cwiseAbs().maxCoeff() <= tol;
}

SU2 reconstruct_three_probe(const DriveParams& d, int dt_divisor) {
    std::vector<StokesVector> before;
    std::vector<StokesVector> after;
    for (const Spin& s : axis_probe_states()) {
        before.push_back(stokes(s));
        after.push_back(stokes(solve_drive(d, s, dt_divisor).back().state));
    }
    return reconstruct_su2(before, after).op;
}

// 1 --------------------------------------------------------------------------
Outcome g_factor_value() {
    const DriveParams d = reference_drive(20e-6);
    const double g = g_factor(d.omega0, d.fast_omega);
    return {std::abs(g + 0.1248) <= 0.0005, fmt("g = %.6f, target -0.1248 +- 0.0005", g)};
}

// 2 --------------------------------------------------------------------------
Outcome geometric_rabi_period() {
    const RunConfig c = reference_config();
    const DriveParams d = c.drive_params();
    const auto st = stroboscopic_sample(solve_drive(d, Spin::up(), c.dt_divisor), d.fast_omega);
    const double target = 80e-6;
    double s3 = -2.0;
    double t_best = 0.0;
    for (const auto& [t, s] : st.samples) {
        if (std::abs(t - target) <= 0.5 * d.fast_period()) {
            s3 = stokes(s).s3;
            t_best = t;
        }
    }
    const double g = g_factor(d.omega0, d.fast_omega);
    const double cycles = 1.0 / (2.0 * std::abs(g));
    const bool oracle_four = std::lround(cycles) == 4;
    return {!st.interpolated && s3 >= 0.98 && oracle_four,
            fmt("S3(%.1f us) = %.5f (need >= 0.98); oracle period = %.4f slow cycles", t_best * 1e6, s3,
                cycles)};
}

// 3 --------------------------------------------------------------------------
Outcome single_cycle_holonomy() {
    const DriveParams d = reference_drive(20e-6);
    const Spin end = solve_drive(d, Spin::up()).back().state;
    const StokesVector s = stokes(end);
    const bool stokes_ok = within(s.vec(), Vector3(1, 0, 0), 0.05);

    // full operator from three probes against the ideal holonomy
    const std::complex<double> i(0.0, 1.0);
    const SU2 ideal(ComplexMat2((ComplexMat2::Identity() - i * sigma_y<double>()) / std::sqrt(2.0)));
    const double d_ideal = operator_distance_mod_phase(reconstruct_three_probe(d, 200), ideal);

    // single-probe estimate from |1>, compared with the reference operator
    const double n = std::sqrt(0.7066 * 0.7066 + 0.0445 * 0.0445 + 0.7062 * 0.7062);
    const SU2 reference_op(ComplexMat2(
        (0.7066 * ComplexMat2::Identity() - i * (0.0445 * sigma_x<double>() + 0.7062 * sigma_y<double>())) / n));
    const SU2 single = reconstruct_su2_single(stokes(Spin::up()), s).op;
    const double d_reference = operator_distance_mod_phase(single, reference_op);

    std::ostringstream os;
    os << fmt("Stokes (%.4f, %.4f, %.4f) vs (1,0,0) +- 0.05 ", s.s1, s.s2, s.s3)
       << (stokes_ok ? "[ok]" : "[out]") << fmt("; |U - (1-i sy)/sqrt2| = %.4f (<= 0.1)", d_ideal)
       << fmt("; |U_single - U_ref| = %.4f (<= 0.05)", d_reference);
    return {stokes_ok && d_ideal <= 0.1 && d_reference <= 0.05, os.str()};
}

// 4 --------------------------------------------------------------------------
Outcome non_commutativity() {
    const RunConfig c = reference_config();
    DriveParams d1 = c.drive_params();
    d1.phi = c.sequence.phi1_rad;
    d1.duration = c.sequence.segment_s;
    DriveParams d2 = d1;
    d2.phi = c.sequence.phi2_rad;
    const double seg = c.sequence.segment_s;
    const Vector3 a = stokes(run_sequence({{d1, seg}, {d2, seg}}, Spin::up()).back().state).vec();
    const Vector3 b = stokes(run_sequence({{d2, seg}, {d1, seg}}, Spin::up()).back().state).vec();
    const bool stokes_ok = within(a, Vector3(1, 0, 0), 0.1) && within(b, Vector3(0, 1, 0), 0.1);
    const double comm = commutator_frobenius(reconstruct_three_probe(d1, c.dt_divisor),
                                             reconstruct_three_probe(d2, c.dt_divisor));
    const bool comm_ok = std::abs(comm - std::sqrt(2.0)) <= 0.1;
    std::ostringstream os;
    os << fmt("U2U1|1> Stokes (%.4f, %.4f, %.4f) vs (1,0,0); ", a.x(), a.y(), a.z())
       << fmt("U1U2|1> Stokes (%.4f, %.4f, %.4f) vs (0,1,0), tol 0.1 ", b.x(), b.y(), b.z())
       << (stokes_ok ? "[ok]" : "[out]") << fmt("; ||[U1,U2]||_F = %.4f (sqrt2 +- 0.1)", comm);
    return {stokes_ok && comm_ok, os.str()};
}

// 5 --------------------------------------------------------------------------
Outcome oracle_equivalence() {
    const double omega0s[] = {150e3, 258.3e3, 400e3};
    const double fasts[] = {400e3, 500e3, 600e3};
    const int divisors[] = {10, 20, 40};
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    int points = 0;
    int excluded = 0;
    double worst = 1.0;
    std::string worst_at;
    for (double o0 : omega0s) {
        for (double f : fasts) {
            for (int div : divisors) {
                DriveParams d;
                d.omega0 = kTwoPi * o0;
                d.fast_omega = kTwoPi * f;
                d.slow_omega = d.fast_omega / div;
                d.duration = d.slow_period();
                if (adiabaticity_report(d).max_ratio >= 0.05) {
                    ++excluded;
                    continue;
                }
                ++points;
                for (int k = 0; k < 3; ++k) {
                    const Spin psi0 = Spin::normalized(Spin::Amplitudes(
                        std::complex<double>(normal(rng), normal(rng)),
                        std::complex<double>(normal(rng), normal(rng))));
                    const auto st = stroboscopic_sample(solve_drive(d, psi0), d.fast_omega);
                    std::vector<double> times;
                    for (const auto& s : st.samples) {
                        times.push_back(s.first);
                    }
                    const auto pred = stroboscopic_prediction(psi0, d, times);
                    for (std::size_t q = 0; q < times.size(); ++q) {
                        const double fid = fidelity(st.samples[q].second, pred[q].second);
                        if (fid < worst) {
                            worst = fid;
                            worst_at = fmt("Omega0 = %.1f kHz, omega = %.0f kHz, Omega = omega/%.0f", o0 / 1e3,
                                           f / 1e3, div);
                        }
                    }
                }
            }
        }
    }
    return {points > 0 && worst >= 0.995,
            fmt("%.0f grid points (%.0f excluded by ratio >= 0.05), worst fidelity %.5f (need >= 0.995)",
                points, excluded, worst) +
                " at " + worst_at};
}

// 6 --------------------------------------------------------------------------
Outcome convergence_order() {
    const DriveParams d = reference_drive(20e-6);
    const Spin ref = solve_drive(d, Spin::up(), 3200).back().state;
    double err[3];
    const int ns[] = {50, 100, 200};
    for (int k = 0; k < 3; ++k) {
        err[k] = (solve_drive(d, Spin::up(), ns[k]).back().state.amplitudes() - ref.amplitudes()).norm();
    }
    const double r1 = err[0] / err[1];
    const double r2 = err[1] / err[2];
    auto ok = [](double r) { return r >= 16.0 / 1.5 && r <= 16.0 * 1.5; };
    return {ok(r1) && ok(r2), fmt("errors %.3g, %.3g, %.3g; halving ratios %.2f, ", err[0], err[1], err[2], r1) +
                                  fmt("%.2f (16 within x1.5)", r2)};
}

// 7 --------------------------------------------------------------------------
Outcome magnetic_calibration() {
    PhysicalParams p;
    p.atom = AtomicConstants::rb87();
    p.delta_b = 0.368e-4;
    const double amp_hz = two_photon_detuning_amplitude(p) / kTwoPi;
    const double omega0_hz = reference_drive(20e-6).omega0 / kTwoPi;
    const double vs_omega0 = amp_hz / (2 * omega0_hz);
    return {std::abs(amp_hz - 516.9e3) <= 5e3 && std::abs(vs_omega0 - 1.0) < 0.01,
            fmt("amplitude 2pi x %.2f kHz (516.9 +- 5), %.4f x 2 Omega0", amp_hz / 1e3, vs_omega0)};
}

// 8, 10 ----------------------------------------------------------------------
struct SweepRun {
    FidelitySweepResult result;
    std::string csv;
    std::string raw;
    std::string json;
};

SweepRun run_reference_sweep(int workers) {
    const RunConfig c = reference_config();
    DriveParams d = c.drive_params();
    d.duration = c.noise->duration_s;
    SweepOptions o;
    o.runs_per_state = c.noise->runs_per_state;
    o.n_states = c.noise->n_states;
    o.dt_divisor = c.dt_divisor;
    o.workers = workers;
    const SU2 ideal = micromotion(d.duration, d).adjoint() * evolution_operator(0.0, d.duration, d) *
                      micromotion(0.0, d);
    SweepRun run;
    run.result = fidelity_sweep(c.noise->counts, c.noise_spec(), d, ideal, o);
    std::ostringstream a;
    std::ostringstream b;
    write_sweep_csv(a, run.result);
    write_raw_csv(b, run.result);
    run.csv = a.str();
    run.raw = b.str();
    run.json = sweep_summary_json(run.result, c.noise_spec(), o).dump(2);
    return run;
}

int worker_count() {
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

Outcome noise_robustness() {
    const SweepRun run = run_reference_sweep(worker_count());
    bool ok = true;
    std::ostringstream os;
    os << "mean - SE per count:";
    for (const auto& p : run.result.points) {
        const double lower = p.mean - p.standard_error();
        const double need = p.n_fluctuations >= 200 ? 0.98 : 0.9;
        ok = ok && lower > need;
        os << ' ' << p.n_fluctuations << ':' << fmt("%.4f", lower);
    }
    os << " (> 0.9 all, > 0.98 for >= 200)";
    return {ok, os.str()};
}

Outcome determinism() {
    const SweepRun a = run_reference_sweep(worker_count());
    const SweepRun b = run_reference_sweep(worker_count());
    const SweepRun c = run_reference_sweep(1);
    const bool same = a.csv == b.csv && a.raw == b.raw && a.json == b.json;
    const bool same_serial = a.csv == c.csv && a.raw == c.raw && a.json == c.json;
    return {same && same_serial,
            std::string("repeat ") + (same ? "identical" : "DIFFERS") + ", single-worker " +
                (same_serial ? "identical" : "DIFFERS") + fmt(" (%.0f raw rows)", static_cast<double>(a.result.raw.size()))};
}

// 9 --------------------------------------------------------------------------
Outcome perturbation_negligibility() {
    const DriveParams d = reference_drive(20e-6);
    const Spin ideal = solve_drive(d, Spin::up()).back().state;
    const double amp = kTwoPi * 1880.0;
    struct Case {
        const char* name;
        bool xi;
        bool qz;
    };
    bool ok = true;
    std::ostringstream os;
    for (const Case& k : {Case{"xi", true, false}, Case{"qz", false, true}, Case{"both", true, true}}) {
        PerturbationConfig p;
        p.xi_asymmetry_amp = amp;
        p.quadratic_zeeman_amp = amp;
        p.xi_asymmetry_enabled = k.xi;
        p.quadratic_zeeman_enabled = k.qz;
        const double change = 1.0 - fidelity(ideal, solve_drive(d, Spin::up(), 200, p).back().state);
        ok = ok && change < 0.01;
        os << k.name << fmt(" %.2e  ", change);
    }
    os << "(1 - F, need < 0.01)";
    return {ok, os.str()};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"g-factor", g_factor_value},
        {"geometric Rabi period", geometric_rabi_period},
        {"single-cycle holonomy", single_cycle_holonomy},
        {"non-commutativity", non_commutativity},
        {"oracle equivalence", oracle_equivalence},
        {"convergence order", convergence_order},
        {"magnetic calibration", magnetic_calibration},
        {"noise robustness", noise_robustness},
        {"perturbation negligibility", perturbation_negligibility},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (k + 1) << ". " << criteria[k].name << ": "
                  << o.detail << std::endl;
    }
    std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
