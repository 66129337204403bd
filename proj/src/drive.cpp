#include "rh/drive.hpp"

#include "rh/kv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace rh {

namespace {

constexpr double kHbar = 1.054571817e-34;          // J s
constexpr double kSpeedOfLight = 299792458.0;      // m/s
constexpr double kEpsilon0 = 8.8541878128e-12;     // F/m

double carrier_product(double t, const DriveParams& d) {
    return std::sin(d.slow_omega * t) * std::cos(d.fast_omega * t + d.theta_offset);
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

}  // namespace

std::vector<std::string> DriveParams::validate() const {
    std::vector<std::string> warnings;
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(omega0) || !finite(slow_omega) || !finite(fast_omega) || !finite(phi) ||
        !finite(theta_offset) || !finite(duration)) {
        throw std::invalid_argument("DriveParams: non-finite field");
    }
    if (omega0 < 0.0) {
        throw std::invalid_argument("DriveParams: omega0 must be >= 0");
    }
    if (fast_omega <= 0.0) {
        throw std::invalid_argument("DriveParams: fast_omega must be > 0");
    }
    if (duration <= 0.0) {
        throw std::invalid_argument("DriveParams: duration must be > 0");
    }
    const double ratio = std::abs(slow_omega) / fast_omega;
    // slack absorbs rounding of Hz -> rad/s conversions at the boundaries
    constexpr double slack = 1.0 + 1e-12;
    if (ratio > 0.2 * slack) {
        throw std::invalid_argument("DriveParams: slow_omega/fast_omega = " + fmt(ratio) +
                                    " exceeds 1/5; adiabatic regime not reachable");
    }
    if (ratio > 0.1 * slack) {
        warnings.push_back("slow_omega/fast_omega = " + fmt(ratio) +
                           " is above 1/10; expect visible non-adiabatic corrections");
    }
    return warnings;
}

bool operator==(const DriveParams& a, const DriveParams& b) {
    return a.omega0 == b.omega0 && a.slow_omega == b.slow_omega && a.fast_omega == b.fast_omega &&
           a.phi == b.phi && a.theta_offset == b.theta_offset && a.duration == b.duration;
}

// Atomic constants ----------------------------------------------------------

AtomicConstants AtomicConstants::parse(std::istream& in, const std::string& origin) {
    const kv::Table table = kv::parse(in, origin);
    AtomicConstants c;
    auto number = [&](const std::string& key) {
        const auto it = table.find(key);
        if (it == table.end()) {
            throw kv::ParseError(origin + ": missing key '" + key + "'");
        }
        return kv::to_double(key, it->second, origin);
    };
    auto text = [&](const std::string& key) {
        const auto it = table.find(key);
        return it == table.end() ? std::string{} : it->second.value;
    };
    static const char* known[] = {"name",  "version", "d_d1_Cm", "g_F", "mu_B_J_per_T",
                                  "quadratic_zeeman_Hz_per_T2", "cg_a13", "cg_a14",
                                  "cg_a26", "cg_b23", "cg_b24", "cg_b15"};
    for (const auto& [key, entry] : table) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
            throw kv::ParseError(origin + ":" + std::to_string(entry.line) + ": unknown key '" +
                                 key + "'");
        }
    }
    c.name = text("name");
    c.version = text("version");
    c.d_d1 = number("d_d1_Cm");
    c.g_f = number("g_F");
    c.mu_b = number("mu_B_J_per_T");
    c.quadratic_zeeman = number("quadratic_zeeman_Hz_per_T2");
    c.c13 = number("cg_a13");
    c.c14 = number("cg_a14");
    c.c26 = number("cg_a26");
    c.c23 = number("cg_b23");
    c.c24 = number("cg_b24");
    c.c15 = number("cg_b15");
    return c;
}

AtomicConstants AtomicConstants::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open atomic constants file " + path.string());
    }
    return parse(in, path.string());
}

AtomicConstants AtomicConstants::rb87() {
    return load(std::filesystem::path(RH_DATA_DIR) / "rb87_d1.constants");
}

// Waveforms -----------------------------------------------------------------

double magnetic_signal(double t, const PhysicalParams& p, const DriveParams& d) {
    return p.b0 + p.delta_b * std::cos(d.slow_omega * t) * std::cos(d.fast_omega * t + d.theta_offset);
}

double intensity_signal(double t, const DriveParams& d) {
    return std::abs(carrier_product(t, d));
}

double phase_signal(double t, const DriveParams& d) {
    // sgn(0) := +1
    return carrier_product(t, d) >= 0.0 ? d.phi : d.phi + kPi;
}

Vector3 r_hat(double theta, double phi) {
    const double s = std::sin(theta);
    return Vector3(-s * std::cos(phi), -s * std::sin(phi), -std::cos(theta));
}

std::vector<WaveformSample> sample_waveforms(const PhysicalParams& p, const DriveParams& d,
                                             double window, int per_fast_period, double t_start) {
    if (window <= 0.0 || per_fast_period < 2) {
        throw std::invalid_argument("sample_waveforms: window must be > 0 and density >= 2");
    }
    const long long intervals =
        std::max<long long>(1, std::llround(window / d.fast_period() * per_fast_period));
    std::vector<WaveformSample> out;
    out.reserve(static_cast<std::size_t>(intervals + 1));
    for (long long k = 0; k <= intervals; ++k) {
        const double t = t_start + window * static_cast<double>(k) / static_cast<double>(intervals);
        out.push_back({t, magnetic_signal(t, p, d), intensity_signal(t, d), phase_signal(t, d)});
    }
    return out;
}

void write_waveform_csv(std::ostream& out, const std::vector<WaveformSample>& samples) {
    out << "t_s,B_T,intensity_rel,phase_rad\n";
    out << std::setprecision(17);
    for (const auto& s : samples) {
        out << s.t << ',' << s.field << ',' << s.intensity << ',' << s.phase << '\n';
    }
}

// Lab -> drive --------------------------------------------------------------

double peak_field(double power, double waist) {
    if (power < 0.0) {
        throw std::invalid_argument("laser power must be >= 0");
    }
    if (waist <= 0.0) {
        throw std::invalid_argument("beam waist must be > 0");
    }
    // I0 = 2P / (pi w^2),  E = sqrt(2 I0 / (c eps0))
    return std::sqrt(4.0 * power / (kPi * waist * waist * kSpeedOfLight * kEpsilon0));
}

double RabiFrequencies::max_abs() const {
    return std::max({std::abs(a13), std::abs(a14), std::abs(a26), std::abs(b23), std::abs(b24),
                     std::abs(b15)});
}

RabiFrequencies rabi_frequencies(const PhysicalParams& p) {
    const double ea = peak_field(p.power_a, p.waist);
    const double eb = peak_field(p.power_b, p.waist);
    const double ka = -p.atom.d_d1 * ea / kHbar;
    const double kb = -p.atom.d_d1 * eb / kHbar;
    const AtomicConstants& c = p.atom;
    return {ka * c.c13, ka * c.c14, ka * c.c26, kb * c.c23, kb * c.c24, kb * c.c15};
}

std::vector<std::string> check_far_detuned(const PhysicalParams& p) {
    const double rabi_hz = rabi_frequencies(p).max_abs() / kTwoPi;
    double min_detuning = std::numeric_limits<double>::infinity();
    for (double delta : p.detunings) {
        min_detuning = std::min(min_detuning, std::abs(delta));
    }
    if (rabi_hz == 0.0) {
        return {};
    }
    const double ratio = min_detuning / rabi_hz;
    if (ratio < 1e2) {
        throw DetuningTooSmallError("single-photon detuning only " + fmt(ratio) +
                                        "x the largest Rabi frequency (need >= 100x)",
                                    ratio);
    }
    if (ratio < 1e3) {
        return {"single-photon detuning only " + fmt(ratio) +
                "x the largest Rabi frequency; adiabatic elimination is marginal"};
    }
    return {};
}

RamanMatrixElements raman_elements(const PhysicalParams& p, double field) {
    check_far_detuned(p);
    const RabiFrequencies r = rabi_frequencies(p);
    const double d1 = kTwoPi * p.detunings[0];
    const double d2 = kTwoPi * p.detunings[1];
    const double d3 = kTwoPi * p.detunings[2];
    const double d4 = kTwoPi * p.detunings[3];

    RamanMatrixElements m;
    m.xi11 = r.a13 * r.a13 / d1 + r.a14 * r.a14 / d2 + r.b15 * r.b15 / d3;
    m.xi22 = r.b23 * r.b23 / d1 + r.b24 * r.b24 / d2 + r.a26 * r.a26 / d4;
    m.eta12 = std::abs(std::abs(r.a13 * r.b23) / d1 + std::abs(r.a14 * r.b24) / d2);
    // |1> = m_F -1, |2> = m_F +1: omega_1 - omega_2 = -2 g_F mu_B B / hbar. The
    // programmed laser difference cancels the splitting at B0.
    const double zeeman = -2.0 * p.atom.g_f * p.atom.mu_b / kHbar;
    m.delta = zeeman * (field - p.b0) + kTwoPi * p.laser_offset;
    return m;
}

RamanMatrixElements raman_elements(const PhysicalParams& p) {
    return raman_elements(p, p.b0 + p.delta_b);
}

double two_photon_detuning_amplitude(const PhysicalParams& p) {
    return 2.0 * std::abs(p.atom.g_f) * p.atom.mu_b * std::abs(p.delta_b) / kHbar;
}

DriveParams physical_to_drive(const PhysicalParams& p, double slow_omega, double fast_omega,
                              double phi, double duration, double tolerance) {
    const double omega0 = two_photon_detuning_amplitude(p) / 2.0;
    if (!(omega0 > 0.0)) {
        throw std::invalid_argument("modulation field delta_b gives Omega0 = 0");
    }
    if (std::abs(p.delta_b) >= p.b0) {
        throw std::invalid_argument("delta_b must be smaller than b0");
    }
    const double eta = raman_elements(p).eta12;
    const double ratio = eta / omega0;
    if (!(std::abs(ratio - 1.0) <= tolerance)) {
        throw CalibrationError("laser coupling eta12 = " + fmt(ratio) +
                                   " x Omega0; adjust powers or detunings",
                               ratio);
    }
    DriveParams d;
    d.omega0 = omega0;
    d.slow_omega = slow_omega;
    d.fast_omega = fast_omega;
    d.phi = phi;
    d.duration = duration;
    d.validate();
    return d;
}

double calibrate_detuning_scale(const PhysicalParams& p) {
    const double omega0 = two_photon_detuning_amplitude(p) / 2.0;
    const double eta = raman_elements(p).eta12;
    if (!(omega0 > 0.0) || !(eta > 0.0)) {
        throw std::invalid_argument("calibration needs nonzero field modulation and laser power");
    }
    // eta12 is proportional to 1/Delta
    return eta / omega0;
}

}  // namespace rh
