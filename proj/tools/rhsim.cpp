// rhsim: config-driven runs of the driven two-level holonomy experiments.
//
// Exit codes: 0 ok, 1 I/O failure, 2 invalid config or arguments,
// 3 numerical failure, 4 adiabaticity flag under --strict,
// 5 segment durations not commensurate with the drive periods.

#include "rh/config.hpp"
#include "rh/drive.hpp"
#include "rh/floquet.hpp"
#include "rh/integrator.hpp"
#include "rh/measurement.hpp"
#include "rh/noise.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit : int { kOk = 0, kIo = 1, kInvalid = 2, kNumerical = 3, kNotAdiabatic = 4, kIncommensurate = 5 };

struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> dt_divisor;
    int workers = 0;
    bool strict = false;
};

class StrictAbort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) {
        throw OutputError("cannot write " + (dir / name).string());
    }
    return f;
}

void write_json(const fs::path& dir, const std::string& name, const json& j) {
    auto f = open_out(dir, name);
    f << j.dump(2) << '\n';
}

json frequency(double hz) {
    return json{{"hz", hz}, {"rad_per_s", rh::kTwoPi * hz}};
}

json stokes_json(const rh::StokesVector& s) {
    return json{{"S1", s.s1}, {"S2", s.s2}, {"S3", s.s3}};
}

json su2_json(const rh::SU2& u) {
    rh::Reconstruction r;
    r.op = u;
    json j = rh::operator_json(r);
    j.erase("residual");
    return j;
}

/// Adiabaticity check shared by the drive-based commands. Runs before the
/// timescale validation so that --strict reports the physics, not the bound.
json check_adiabatic(const rh::RunConfig& c, const rh::DriveParams& d, bool strict,
                     std::vector<std::string>& warnings) {
    const rh::AdiabaticityReport r = rh::adiabaticity_report(d, c.max_harmonic, c.adiabatic_threshold);
    if (r.flagged) {
        std::ostringstream msg;
        msg << "adiabaticity: largest Floquet harmonic is " << r.max_ratio
            << " of the carrier frequency (threshold " << r.threshold << ")";
        if (strict) {
            throw StrictAbort(msg.str());
        }
        warnings.push_back(msg.str());
        std::cerr << "warning: " << msg.str() << '\n';
    }
    return r;
}

void validate_drive(const rh::DriveParams& d, std::vector<std::string>& warnings) {
    for (const auto& w : d.validate()) {
        std::cerr << "warning: " << w << '\n';
        warnings.push_back(w);
    }
}

/// Probe states propagated through a run; the Stokes pairs give the operator.
rh::Reconstruction reconstruct_at(const std::vector<rh::Trajectory>& probes, std::size_t index) {
    std::vector<rh::StokesVector> before;
    std::vector<rh::StokesVector> after;
    for (const auto& tr : probes) {
        before.push_back(rh::stokes(tr.front().state));
        after.push_back(rh::stokes(tr.samples.at(index).state));
    }
    return rh::reconstruct_su2(before, after);
}

std::vector<rh::Trajectory> run_probes(const rh::DriveParams& d, int dt_divisor,
                                       const rh::PerturbationConfig& p) {
    std::vector<rh::Trajectory> out;
    for (const rh::Spin& s : rh::axis_probe_states()) {
        out.push_back(rh::solve_drive(d, s, dt_divisor, p));
    }
    return out;
}

json config_block(const rh::RunConfig& c, const rh::DriveParams& d) {
    return json{{"omega0", frequency(d.omega0 / rh::kTwoPi)},
                {"slow", frequency(c.slow_hz)},
                {"fast", frequency(c.fast_hz)},
                {"phi_rad", d.phi},
                {"theta_offset_rad", d.theta_offset}};
}

// geometric-phase -----------------------------------------------------------

void cmd_geometric_phase(const rh::RunConfig& c, const fs::path& out, bool strict) {
    std::vector<std::string> warnings;
    const rh::DriveParams d = c.drive_params();
    const json adiabatic = check_adiabatic(c, d, strict, warnings);
    validate_drive(d, warnings);
    const rh::PerturbationConfig pert = c.perturbation_config();
    const rh::Spin psi0 = c.initial_spin();

    const rh::Trajectory tr = rh::solve_drive(d, psi0, c.dt_divisor, pert);
    const rh::StroboscopicSamples st = rh::stroboscopic_sample(tr, d.fast_omega, d.theta_offset);

    std::vector<double> times;
    for (const auto& s : st.samples) {
        times.push_back(s.first);
    }
    const auto oracle = rh::stroboscopic_prediction(psi0, d, times);

    {
        auto f = open_out(out, "stroboscopic.csv");
        f << "q,t_s,P1,P2\n" << std::setprecision(17);
        for (std::size_t q = 0; q < st.samples.size(); ++q) {
            const auto& a = st.samples[q].second.amplitudes();
            f << q << ',' << st.samples[q].first << ',' << std::norm(a(0)) << ',' << std::norm(a(1)) << '\n';
        }
    }
    {
        std::vector<std::pair<double, rh::StokesVector>> series;
        for (const auto& [t, s] : st.samples) {
            series.emplace_back(t, rh::stokes(s));
        }
        auto f = open_out(out, "stokes.csv");
        rh::write_stokes_csv(f, series);
    }
    {
        auto f = open_out(out, "oracle.csv");
        f << "q,t_s,P1,P2,S1,S2,S3\n" << std::setprecision(17);
        for (std::size_t q = 0; q < oracle.size(); ++q) {
            const auto& a = oracle[q].second.amplitudes();
            const rh::StokesVector s = rh::stokes(oracle[q].second);
            f << q << ',' << oracle[q].first << ',' << std::norm(a(0)) << ',' << std::norm(a(1)) << ','
              << s.s1 << ',' << s.s2 << ',' << s.s3 << '\n';
        }
    }
    {
        auto f = open_out(out, "trajectory.csv");
        rh::write_trajectory_csv(f, tr, d.fast_omega, d.theta_offset);
        write_json(out, "trajectory.json", rh::trajectory_metadata(tr, d));
    }

    // operator reconstruction at every slow-cycle end
    const double g = rh::g_factor(d.omega0, d.fast_omega);
    json cycles = json::array();
    if (d.slow_omega > 0.0) {
        const std::vector<rh::Trajectory> probes = run_probes(d, c.dt_divisor, pert);
        const double steps_per_cycle = d.slow_period() / tr.dt;
        for (int m = 1;; ++m) {
            const double exact = m * steps_per_cycle;
            const auto index = static_cast<std::size_t>(std::llround(exact));
            if (index >= tr.samples.size()) {
                break;
            }
            if (std::abs(exact - static_cast<double>(index)) > 1e-6) {
                warnings.push_back("slow cycle " + std::to_string(m) + " does not end on a time step");
                continue;
            }
            const rh::Reconstruction rec = reconstruct_at(probes, index);
            const rh::SU2 ideal = rh::cyclic_operator(m, d.phi, g);
            cycles.push_back({{"m", m},
                              {"t_s", tr.samples[index].t},
                              {"reconstructed", rh::operator_json(rec)},
                              {"residual_warning", rec.warning},
                              {"oracle", su2_json(ideal)},
                              {"distance_mod_phase", rh::operator_distance_mod_phase(rec.op, ideal)}});
        }
    }

    json report{{"experiment", "geometric-phase"},
                {"frequencies", config_block(c, d)},
                {"duration_s", d.duration},
                {"initial_state", c.initial_state},
                {"g", g},
                {"gamma_per_cycle_rad", rh::kTwoPi * g},
                {"holonomy_axis", {rh::holonomy_axis(d.phi).x(), rh::holonomy_axis(d.phi).y(), 0.0}},
                {"geometric_rabi_period_s",
                 (g != 0.0 && d.slow_omega > 0.0) ? json(d.slow_period() / (2.0 * std::abs(g))) : json()},
                {"stroboscopic_samples", st.samples.size()},
                {"stroboscopic_interpolated", st.interpolated},
                {"final_stokes", stokes_json(rh::stokes(tr.back().state))},
                {"cycles", cycles},
                {"adiabaticity", adiabatic},
                {"integrator", rh::trajectory_metadata(tr, d)},
                {"perturbations",
                 {{"xi_asymmetry", pert.xi_asymmetry_enabled},
                  {"quadratic_zeeman", pert.quadratic_zeeman_enabled}}},
                {"warnings", warnings}};
    write_json(out, "report.json", report);
    std::cout << "g = " << g << ", " << cycles.size() << " slow cycles reconstructed, artifacts in "
              << out.string() << '\n';
}

// non-abelian ---------------------------------------------------------------

void cmd_non_abelian(const rh::RunConfig& c, const fs::path& out, bool strict) {
    std::vector<std::string> warnings;
    rh::DriveParams d1 = c.drive_params();
    d1.duration = c.sequence.segment_s;
    d1.phi = c.sequence.phi1_rad;
    rh::DriveParams d2 = d1;
    d2.phi = c.sequence.phi2_rad;
    const json adiabatic = check_adiabatic(c, d1, strict, warnings);
    validate_drive(d1, warnings);
    const rh::PerturbationConfig pert = c.perturbation_config();
    const rh::Spin psi0 = c.initial_spin();
    const double seg = c.sequence.segment_s;

    // "u2u1" applies segment 1 first
    const rh::Trajectory a = rh::run_sequence({{d1, seg}, {d2, seg}}, psi0, c.dt_divisor, pert);
    const rh::Trajectory b = rh::run_sequence({{d2, seg}, {d1, seg}}, psi0, c.dt_divisor, pert);

    auto dump = [&](const rh::Trajectory& tr, const std::string& name) {
        std::vector<std::pair<double, rh::StokesVector>> series;
        for (const auto& [t, s] : rh::stroboscopic_sample(tr, d1.fast_omega, d1.theta_offset).samples) {
            series.emplace_back(t, rh::stokes(s));
        }
        auto f = open_out(out, name);
        rh::write_stokes_csv(f, series);
    };
    dump(a, "stokes_u2u1.csv");
    dump(b, "stokes_u1u2.csv");

    const rh::StokesVector sa = rh::stokes(a.back().state);
    const rh::StokesVector sb = rh::stokes(b.back().state);

    const auto p1 = run_probes(d1, c.dt_divisor, pert);
    const auto p2 = run_probes(d2, c.dt_divisor, pert);
    const rh::Reconstruction u1 = reconstruct_at(p1, p1.front().samples.size() - 1);
    const rh::Reconstruction u2 = reconstruct_at(p2, p2.front().samples.size() - 1);

    const rh::SU2 o1 = rh::evolution_operator(0.0, seg, d1);
    const rh::SU2 o2 = rh::evolution_operator(0.0, seg, d2);

    json report{{"experiment", "non-abelian"},
                {"frequencies", config_block(c, d1)},
                {"phi1_rad", d1.phi},
                {"phi2_rad", d2.phi},
                {"segment_s", seg},
                {"initial_state", c.initial_state},
                {"final_stokes_u2u1", stokes_json(sa)},
                {"final_stokes_u1u2", stokes_json(sb)},
                {"final_stokes_difference", stokes_json(rh::StokesVector::from_vec(sa.vec() - sb.vec()))},
                {"final_stokes_difference_norm", (sa.vec() - sb.vec()).norm()},
                {"u1_reconstructed", rh::operator_json(u1)},
                {"u2_reconstructed", rh::operator_json(u2)},
                {"commutator_frobenius", rh::commutator_frobenius(u1.op, u2.op)},
                {"oracle",
                 {{"u1", su2_json(o1)},
                  {"u2", su2_json(o2)},
                  {"final_stokes_u2u1", stokes_json(rh::stokes((o2 * o1).apply(psi0)))},
                  {"final_stokes_u1u2", stokes_json(rh::stokes((o1 * o2).apply(psi0)))},
                  {"commutator_frobenius", rh::commutator_frobenius(o1, o2)}}},
                {"adiabaticity", adiabatic},
                {"warnings", warnings}};
    write_json(out, "non_abelian.json", report);
    std::cout << "commutator norm " << rh::commutator_frobenius(u1.op, u2.op) << ", artifacts in "
              << out.string() << '\n';
}

// noise-sweep ---------------------------------------------------------------

void cmd_noise_sweep(const rh::RunConfig& c, const fs::path& out, bool strict, int workers) {
    std::vector<std::string> warnings;
    if (!c.noise) {
        throw rh::ConfigError("noise-sweep needs a noise.* block");
    }
    rh::DriveParams d = c.drive_params();
    d.duration = c.noise->duration_s;
    const json adiabatic = check_adiabatic(c, d, strict, warnings);
    validate_drive(d, warnings);

    const rh::NoiseSpec spec = c.noise_spec();
    rh::SweepOptions o;
    o.runs_per_state = c.noise->runs_per_state;
    o.n_states = c.noise->n_states;
    o.dt_divisor = c.dt_divisor;
    o.perturbation = c.perturbation_config();
    o.workers = workers > 0 ? workers : std::max(1u, std::thread::hardware_concurrency());

    // adiabatic prediction over the pulse, including the frame change
    const rh::SU2 ideal = rh::micromotion(d.duration, d).adjoint() *
                          rh::evolution_operator(0.0, d.duration, d) * rh::micromotion(0.0, d);
    const rh::FidelitySweepResult r = rh::fidelity_sweep(c.noise->counts, spec, d, ideal, o);

    {
        auto f = open_out(out, "sweep.csv");
        rh::write_sweep_csv(f, r);
    }
    {
        auto f = open_out(out, "sweep_raw.csv");
        rh::write_raw_csv(f, r);
    }
    json summary = rh::sweep_summary_json(r, spec, o);
    summary["experiment"] = "noise-sweep";
    summary["duration_s"] = d.duration;
    summary["frequencies"] = config_block(c, d);
    summary["adiabaticity"] = adiabatic;
    summary["warnings"] = warnings;
    write_json(out, "sweep.json", summary);
    for (const auto& p : r.points) {
        std::cout << p.n_fluctuations << " fluctuations: mean fidelity " << p.mean << " +- "
                  << p.standard_error() << '\n';
    }
}

// waveforms -----------------------------------------------------------------

void cmd_waveforms(const rh::RunConfig& c, const fs::path& out) {
    const rh::DriveParams d = c.drive_params();
    d.validate();
    rh::PhysicalParams p;
    if (c.physical) {
        p = c.physical_params();
    } else {
        p.b0 = c.drive->b0_t;
        p.delta_b = c.drive->delta_b_t;
    }
    const auto samples = rh::sample_waveforms(p, d, c.waveform_window_s, c.waveform_per_fast_period);
    auto f = open_out(out, "waveforms.csv");
    rh::write_waveform_csv(f, samples);
    std::cout << samples.size() << " waveform samples written to " << (out / "waveforms.csv").string()
              << '\n';
}

// adiabaticity --------------------------------------------------------------

void cmd_adiabaticity(const rh::RunConfig& c, const fs::path& out, bool strict) {
    std::vector<std::string> warnings;
    const rh::DriveParams d = c.drive_params();
    const rh::AdiabaticityReport r = rh::adiabaticity_report(d, c.max_harmonic, c.adiabatic_threshold);
    json j = r;
    j["frequencies"] = config_block(c, d);
    j["g"] = rh::g_factor(d.omega0, d.fast_omega);
    write_json(out, "adiabaticity.json", j);
    std::cout << "max harmonic ratio " << r.max_ratio << (r.flagged ? " (flagged)" : "") << '\n';
    if (r.flagged && strict) {
        throw StrictAbort("adiabaticity threshold exceeded");
    }
}

int run(const std::string& experiment, const Overrides& ov) {
    rh::RunConfig c = rh::RunConfig::load(ov.config);
    if (ov.seed) {
        c.seed = *ov.seed;
    }
    if (ov.dt_divisor) {
        c.dt_divisor = *ov.dt_divisor;
    }
    c.experiment = experiment.empty() ? c.experiment : experiment;
    c.validate();

    // --out only moves the artifacts; the echoed config keeps its own output_dir
    const fs::path out(ov.out ? *ov.out : c.output_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
        throw OutputError("cannot create output directory " + out.string() + ": " + ec.message());
    }
    {
        auto f = open_out(out, "config.conf");
        c.write(f);
    }

    if (c.experiment == "geometric-phase") {
        cmd_geometric_phase(c, out, ov.strict);
    } else if (c.experiment == "non-abelian") {
        cmd_non_abelian(c, out, ov.strict);
    } else if (c.experiment == "noise-sweep") {
        cmd_noise_sweep(c, out, ov.strict, ov.workers);
    } else if (c.experiment == "waveforms") {
        cmd_waveforms(c, out);
    } else {
        cmd_adiabaticity(c, out, ov.strict);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Driven two-level holonomy simulator"};
    app.fallthrough();
    app.require_subcommand(0, 1);

    Overrides ov;
    app.add_option("--config", ov.config, "run configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", ov.out, "output directory (overrides output_dir)");
    app.add_option("--seed", ov.seed, "master seed (overrides seed)");
    app.add_option("--dt-divisor", ov.dt_divisor, "steps per fast period")->check(CLI::PositiveNumber);
    app.add_option("--workers", ov.workers, "noise-sweep worker threads (0 = all cores)")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--strict", ov.strict, "exit 4 when the adiabaticity diagnostic is flagged");

    std::vector<CLI::App*> subs;
    for (const auto& name : rh::known_experiments()) {
        subs.push_back(app.add_subcommand(name, "run the " + name + " experiment"));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    std::string experiment;
    for (const auto* s : subs) {
        if (s->parsed()) {
            experiment = s->get_name();
        }
    }

    try {
        return run(experiment, ov);
    } catch (const StrictAbort& e) {
        std::cerr << "error: " << e.what() << " (--strict)\n";
        return kNotAdiabatic;
    } catch (const rh::IncommensurateSegmentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIncommensurate;
    } catch (const rh::NumericalFailure& e) {
        std::cerr << "error: " << e.what() << " (last good t = " << e.last_good_time() << " s)\n";
        return kNumerical;
    } catch (const rh::QuadratureError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const rh::SweepFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const rh::CalibrationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const OutputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    }
}
