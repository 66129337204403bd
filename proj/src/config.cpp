#include "rh/config.hpp"

#include "rh/kv.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace rh {

namespace {

const std::vector<std::string> kExperiments = {"geometric-phase", "non-abelian", "noise-sweep",
                                               "waveforms", "adiabaticity"};
const std::vector<std::string> kStates = {"up", "down", "+x", "-x", "+y", "-y"};

class Reader {
public:
    Reader(kv::Table table, std::string origin) : table_(std::move(table)), origin_(std::move(origin)) {}

    bool has(const std::string& key) const { return table_.count(key) != 0; }

    bool has_prefix(const std::string& prefix) const {
        return std::any_of(table_.begin(), table_.end(),
                           [&](const auto& kv) { return kv.first.rfind(prefix, 0) == 0; });
    }

    void number(const std::string& key, double& out, bool required = false) {
        if (const auto* e = take(key, required)) {
            out = wrap([&] { return kv::to_double(key, *e, origin_); });
        }
    }

    void integer(const std::string& key, int& out) {
        if (const auto* e = take(key, false)) {
            const long long v = wrap([&] { return kv::to_integer(key, *e, origin_); });
            if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
                fail(*e, "'" + key + "' is out of range");
            }
            out = static_cast<int>(v);
        }
    }

    void unsigned64(const std::string& key, std::uint64_t& out) {
        if (const auto* e = take(key, false)) {
            try {
                std::size_t used = 0;
                if (e->value.empty() || e->value[0] == '-') {
                    throw std::invalid_argument("negative");
                }
                out = std::stoull(e->value, &used);
                if (used != e->value.size()) {
                    throw std::invalid_argument("trailing");
                }
            } catch (const std::exception&) {
                fail(*e, "'" + key + "' is not an unsigned integer: " + e->value);
            }
        }
    }

    void text(const std::string& key, std::string& out) {
        if (const auto* e = take(key, false)) {
            out = e->value;
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const auto* e = take(key, false)) {
            const std::string& v = e->value;
            if (v == "true" || v == "on" || v == "1") {
                out = true;
            } else if (v == "false" || v == "off" || v == "0") {
                out = false;
            } else {
                fail(*e, "'" + key + "' must be true or false: " + v);
            }
        }
    }

    void int_list(const std::string& key, std::vector<int>& out) {
        if (const auto* e = take(key, false)) {
            out.clear();
            std::stringstream ss(e->value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const kv::Entry piece{kv::trim(item), e->line};
                const long long v = wrap([&] { return kv::to_integer(key, piece, origin_); });
                out.push_back(static_cast<int>(v));
            }
        }
    }

    void hold(const std::string& key, NoiseHold& out) {
        if (const auto* e = take(key, false)) {
            if (e->value == "piecewise-constant") {
                out = NoiseHold::PiecewiseConstant;
            } else if (e->value == "linear") {
                out = NoiseHold::Linear;
            } else {
                fail(*e, "'" + key + "' must be piecewise-constant or linear");
            }
        }
    }

    void finish() const {
        for (const auto& [key, entry] : table_) {
            if (used_.count(key) == 0) {
                fail(entry, "unknown key '" + key + "'");
            }
        }
    }

private:
    const kv::Entry* take(const std::string& key, bool required) {
        const auto it = table_.find(key);
        if (it == table_.end()) {
            if (required) {
                throw ConfigError(origin_ + ": missing required key '" + key + "'");
            }
            return nullptr;
        }
        used_.insert(key);
        return &it->second;
    }

    template <typename F>
    auto wrap(F&& f) -> decltype(f()) {
        try {
            return f();
        } catch (const kv::ParseError& e) {
            throw ConfigError(e.what());
        }
    }

    [[noreturn]] void fail(const kv::Entry& e, const std::string& msg) const {
        throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": " + msg);
    }

    kv::Table table_;
    std::string origin_;
    std::set<std::string> used_;
};

const char* hold_name(NoiseHold h) {
    return h == NoiseHold::Linear ? "linear" : "piecewise-constant";
}

}  // namespace

std::vector<std::string> known_experiments() { return kExperiments; }

bool RunConfig::operator==(const RunConfig& o) const {
    return experiment == o.experiment && duration_s == o.duration_s && slow_hz == o.slow_hz &&
           fast_hz == o.fast_hz && phi_rad == o.phi_rad && theta_offset_rad == o.theta_offset_rad &&
           initial_state == o.initial_state && drive == o.drive && physical == o.physical &&
           perturbation == o.perturbation && noise == o.noise && sequence == o.sequence &&
           dt_divisor == o.dt_divisor && output_dir == o.output_dir && seed == o.seed &&
           waveform_window_s == o.waveform_window_s &&
           waveform_per_fast_period == o.waveform_per_fast_period &&
           max_harmonic == o.max_harmonic && adiabatic_threshold == o.adiabatic_threshold;
}

RunConfig RunConfig::parse(std::istream& in, const std::string& origin,
                           const std::filesystem::path& base_dir) {
    kv::Table table;
    try {
        table = kv::parse(in, origin);
    } catch (const kv::ParseError& e) {
        throw ConfigError(e.what());
    }
    Reader r(std::move(table), origin);
    RunConfig c;
    c.base_dir = base_dir;

    r.text("experiment", c.experiment);
    r.number("duration_s", c.duration_s, true);
    r.number("slow_hz", c.slow_hz, true);
    r.number("fast_hz", c.fast_hz, true);
    r.number("phi_rad", c.phi_rad);
    r.number("theta_offset_rad", c.theta_offset_rad);
    r.text("initial_state", c.initial_state);

    const bool has_drive = r.has_prefix("drive.");
    const bool has_physical = r.has_prefix("physical.");
    if (has_drive == has_physical) {
        throw ConfigError(origin + ": exactly one of the drive.* and physical.* blocks is required");
    }
    if (has_drive) {
        DriveBlock d;
        r.number("drive.omega0_hz", d.omega0_hz, true);
        r.number("drive.b0_T", d.b0_t);
        r.number("drive.delta_b_T", d.delta_b_t);
        c.drive = d;
    } else {
        PhysicalBlock p;
        r.number("physical.power_a_W", p.power_a_w, true);
        r.number("physical.power_b_W", p.power_b_w, true);
        r.number("physical.waist_m", p.waist_m, true);
        r.number("physical.b0_T", p.b0_t, true);
        r.number("physical.delta_b_T", p.delta_b_t, true);
        for (int i = 0; i < 4; ++i) {
            r.number("physical.detuning" + std::to_string(i + 1) + "_Hz", p.detunings_hz[i], true);
        }
        r.number("physical.laser_offset_Hz", p.laser_offset_hz);
        r.text("physical.constants", p.constants);
        r.number("physical.calibration_tolerance", p.calibration_tolerance);
        c.physical = p;
    }

    r.number("perturbation.xi_asymmetry_hz", c.perturbation.xi_asymmetry_hz);
    r.number("perturbation.quadratic_zeeman_hz", c.perturbation.quadratic_zeeman_hz);
    r.boolean("perturbation.xi_asymmetry", c.perturbation.xi_asymmetry);
    r.boolean("perturbation.quadratic_zeeman", c.perturbation.quadratic_zeeman);

    if (r.has_prefix("noise.")) {
        NoiseBlock n;
        r.number("noise.sigma_b_rel", n.sigma_b_rel);
        r.number("noise.sigma_p_rel", n.sigma_p_rel);
        r.number("noise.sigma_phase_rad", n.sigma_phase_rad);
        r.int_list("noise.counts", n.counts);
        r.integer("noise.runs_per_state", n.runs_per_state);
        r.integer("noise.n_states", n.n_states);
        r.hold("noise.hold", n.hold);
        r.number("noise.duration_s", n.duration_s);
        c.noise = n;
    }

    r.number("sequence.phi1_rad", c.sequence.phi1_rad);
    r.number("sequence.phi2_rad", c.sequence.phi2_rad);
    r.number("sequence.segment_s", c.sequence.segment_s);

    r.integer("integrator.dt_divisor", c.dt_divisor);
    r.text("output_dir", c.output_dir);
    r.unsigned64("seed", c.seed);
    r.number("waveforms.window_s", c.waveform_window_s);
    r.integer("waveforms.per_fast_period", c.waveform_per_fast_period);
    r.integer("adiabaticity.max_harmonic", c.max_harmonic);
    r.number("adiabaticity.threshold", c.adiabatic_threshold);
    r.finish();

    c.validate();
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    return parse(in, path.string(), path.parent_path());
}

void RunConfig::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) {
            throw ConfigError(msg);
        }
    };
    require(std::find(kExperiments.begin(), kExperiments.end(), experiment) != kExperiments.end(),
            "unknown experiment '" + experiment + "'");
    require(std::find(kStates.begin(), kStates.end(), initial_state) != kStates.end(),
            "unknown initial_state '" + initial_state + "'");
    require(drive.has_value() != physical.has_value(),
            "exactly one of the drive and physical blocks is required");
    require(duration_s > 0.0, "duration_s must be > 0");
    require(fast_hz > 0.0, "fast_hz must be > 0");
    require(slow_hz >= 0.0, "slow_hz must be >= 0");
    require(dt_divisor >= 40, "integrator.dt_divisor must be >= 40");
    require(waveform_window_s > 0.0, "waveforms.window_s must be > 0");
    require(waveform_per_fast_period >= 1, "waveforms.per_fast_period must be >= 1");
    require(max_harmonic >= 0, "adiabaticity.max_harmonic must be >= 0");
    require(adiabatic_threshold > 0.0, "adiabaticity.threshold must be > 0");
    require(sequence.segment_s > 0.0, "sequence.segment_s must be > 0");
    require(perturbation.xi_asymmetry_hz >= 0.0 && perturbation.quadratic_zeeman_hz >= 0.0,
            "perturbation amplitudes must be >= 0");
    if (drive) {
        require(drive->omega0_hz >= 0.0, "drive.omega0_hz must be >= 0");
    }
    if (physical) {
        require(physical->calibration_tolerance > 0.0, "physical.calibration_tolerance must be > 0");
    }
    if (noise) {
        require(noise->sigma_b_rel >= 0.0 && noise->sigma_p_rel >= 0.0 && noise->sigma_phase_rad >= 0.0,
                "noise sigmas must be >= 0");
        require(!noise->counts.empty(), "noise.counts must not be empty");
        for (int n : noise->counts) {
            require(n >= 1, "noise.counts entries must be >= 1");
        }
        require(noise->runs_per_state >= 1, "noise.runs_per_state must be >= 1");
        require(noise->n_states >= 2, "noise.n_states must be >= 2");
        require(noise->duration_s > 0.0, "noise.duration_s must be > 0");
    }
    require(experiment != "noise-sweep" || noise.has_value(),
            "noise-sweep needs a noise.* block");
}

void RunConfig::write(std::ostream& out) const {
    out << std::setprecision(17);
    out << "experiment = " << experiment << '\n'
        << "duration_s = " << duration_s << '\n'
        << "slow_hz = " << slow_hz << '\n'
        << "fast_hz = " << fast_hz << '\n'
        << "phi_rad = " << phi_rad << '\n'
        << "theta_offset_rad = " << theta_offset_rad << '\n'
        << "initial_state = " << initial_state << '\n';
    if (drive) {
        out << "drive.omega0_hz = " << drive->omega0_hz << '\n'
            << "drive.b0_T = " << drive->b0_t << '\n'
            << "drive.delta_b_T = " << drive->delta_b_t << '\n';
    }
    if (physical) {
        out << "physical.power_a_W = " << physical->power_a_w << '\n'
            << "physical.power_b_W = " << physical->power_b_w << '\n'
            << "physical.waist_m = " << physical->waist_m << '\n'
            << "physical.b0_T = " << physical->b0_t << '\n'
            << "physical.delta_b_T = " << physical->delta_b_t << '\n';
        for (int i = 0; i < 4; ++i) {
            out << "physical.detuning" << i + 1 << "_Hz = " << physical->detunings_hz[i] << '\n';
        }
        out << "physical.laser_offset_Hz = " << physical->laser_offset_hz << '\n'
            << "physical.constants = " << physical->constants << '\n'
            << "physical.calibration_tolerance = " << physical->calibration_tolerance << '\n';
    }
    out << "perturbation.xi_asymmetry_hz = " << perturbation.xi_asymmetry_hz << '\n'
        << "perturbation.quadratic_zeeman_hz = " << perturbation.quadratic_zeeman_hz << '\n'
        << "perturbation.xi_asymmetry = " << (perturbation.xi_asymmetry ? "true" : "false") << '\n'
        << "perturbation.quadratic_zeeman = " << (perturbation.quadratic_zeeman ? "true" : "false")
        << '\n';
    if (noise) {
        out << "noise.sigma_b_rel = " << noise->sigma_b_rel << '\n'
            << "noise.sigma_p_rel = " << noise->sigma_p_rel << '\n'
            << "noise.sigma_phase_rad = " << noise->sigma_phase_rad << '\n'
            << "noise.counts = ";
        for (std::size_t i = 0; i < noise->counts.size(); ++i) {
            out << (i ? "," : "") << noise->counts[i];
        }
        out << '\n'
            << "noise.runs_per_state = " << noise->runs_per_state << '\n'
            << "noise.n_states = " << noise->n_states << '\n'
            << "noise.hold = " << hold_name(noise->hold) << '\n'
            << "noise.duration_s = " << noise->duration_s << '\n';
    }
    out << "sequence.phi1_rad = " << sequence.phi1_rad << '\n'
        << "sequence.phi2_rad = " << sequence.phi2_rad << '\n'
        << "sequence.segment_s = " << sequence.segment_s << '\n'
        << "integrator.dt_divisor = " << dt_divisor << '\n'
        << "output_dir = " << output_dir << '\n'
        << "seed = " << seed << '\n'
        << "waveforms.window_s = " << waveform_window_s << '\n'
        << "waveforms.per_fast_period = " << waveform_per_fast_period << '\n'
        << "adiabaticity.max_harmonic = " << max_harmonic << '\n'
        << "adiabaticity.threshold = " << adiabatic_threshold << '\n';
}

std::string RunConfig::to_string() const {
    std::ostringstream os;
    write(os);
    return os.str();
}

PhysicalParams RunConfig::physical_params() const {
    PhysicalParams p;
    if (drive) {
        p.b0 = drive->b0_t;
        p.delta_b = drive->delta_b_t;
        return p;
    }
    const PhysicalBlock& b = *physical;
    p.power_a = b.power_a_w;
    p.power_b = b.power_b_w;
    p.waist = b.waist_m;
    p.b0 = b.b0_t;
    p.delta_b = b.delta_b_t;
    p.detunings = b.detunings_hz;
    p.laser_offset = b.laser_offset_hz;

    std::filesystem::path path(b.constants);
    if (path.is_relative()) {
        const auto local = base_dir / path;
        path = (!base_dir.empty() && std::filesystem::exists(local))
                   ? local
                   : std::filesystem::path(RH_DATA_DIR) / path;
    }
    try {
        p.atom = AtomicConstants::load(path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("physical.constants: ") + e.what());
    }
    return p;
}

DriveParams RunConfig::drive_params() const {
    if (drive) {
        DriveParams d;
        d.omega0 = kTwoPi * drive->omega0_hz;
        d.slow_omega = kTwoPi * slow_hz;
        d.fast_omega = kTwoPi * fast_hz;
        d.phi = phi_rad;
        d.theta_offset = theta_offset_rad;
        d.duration = duration_s;
        return d;
    }
    DriveParams d = physical_to_drive(physical_params(), kTwoPi * slow_hz, kTwoPi * fast_hz, phi_rad,
                                      duration_s, physical->calibration_tolerance);
    d.theta_offset = theta_offset_rad;
    return d;
}

PerturbationConfig RunConfig::perturbation_config() const {
    PerturbationConfig p;
    p.xi_asymmetry_amp = kTwoPi * perturbation.xi_asymmetry_hz;
    p.quadratic_zeeman_amp = kTwoPi * perturbation.quadratic_zeeman_hz;
    p.xi_asymmetry_enabled = perturbation.xi_asymmetry;
    p.quadratic_zeeman_enabled = perturbation.quadratic_zeeman;
    return p;
}

NoiseSpec RunConfig::noise_spec() const {
    if (!noise) {
        throw ConfigError("config has no noise.* block");
    }
    NoiseSpec s;
    s.sigma_b_rel = noise->sigma_b_rel;
    s.sigma_p_rel = noise->sigma_p_rel;
    s.sigma_phase = noise->sigma_phase_rad;
    s.n_fluctuations = noise->counts.front();
    s.seed = seed;
    s.hold = noise->hold;
    return s;
}

Spin RunConfig::initial_spin() const {
    if (initial_state == "down") {
        return Spin::down();
    }
    if (initial_state == "+x") {
        return Spin::from_bloch(Vector3::UnitX());
    }
    if (initial_state == "-x") {
        return Spin::from_bloch(Vector3(-Vector3::UnitX()));
    }
    if (initial_state == "+y") {
        return Spin::from_bloch(Vector3::UnitY());
    }
    if (initial_state == "-y") {
        return Spin::from_bloch(Vector3(-Vector3::UnitY()));
    }
    return Spin::up();
}

}  // namespace rh
