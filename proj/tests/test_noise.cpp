#include "doctest.h"

#include "rh/floquet.hpp"
#include "rh/noise.hpp"

#include <set>
#include <sstream>

using namespace rh;

namespace {

DriveParams reference_drive() {
    DriveParams d;
    d.omega0 = kTwoPi * 258.3e3;
    d.slow_omega = kTwoPi * 50e3;
    d.fast_omega = kTwoPi * 500e3;
    d.duration = 20e-6;
    return d;
}

SU2 ideal_cycle(const DriveParams& d) {
    return cyclic_operator(1, d.phi, g_factor(d.omega0, d.fast_omega));
}

NoiseSpec quiet(int n) {
    NoiseSpec s;
    s.sigma_b_rel = s.sigma_p_rel = s.sigma_phase = 0.0;
    s.n_fluctuations = n;
    return s;
}

int count_lines(const std::string& s) {
    return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("zero-sigma noise is exactly the ideal Hamiltonian") {
    const DriveParams d = reference_drive();
    for (NoiseHold hold : {NoiseHold::PiecewiseConstant, NoiseHold::Linear}) {
        NoiseSpec s = quiet(50);
        s.hold = hold;
        const HamiltonianFn h = apply_noise(d, s);
        for (int k = 0; k <= 1000; ++k) {
            const double t = d.duration * k / 1000.0;
            CHECK((h(t) - h_ideal(t, d)).norm() == 0.0);
        }
    }
}

TEST_CASE("noise realizations") {
    NoiseSpec s;
    s.n_fluctuations = 200;
    const NoiseRealization a = draw_noise(s, 20e-6, 99);
    const NoiseRealization b = draw_noise(s, 20e-6, 99);
    const NoiseRealization c = draw_noise(s, 20e-6, 100);
    CHECK(a.events() == 200);
    CHECK(a.event_spacing() == doctest::Approx(100e-9).epsilon(1e-12));
    CHECK(a.field == b.field);
    CHECK(a.phase == b.phase);
    CHECK(a.field != c.field);

    SUBCASE("piecewise-constant hold") {
        for (std::size_t k = 0; k < a.events(); k += 17) {
            const double t = (static_cast<double>(k) + 0.5) * a.event_spacing();
            const NoiseRealization::Offsets o = a.at(t);
            CHECK(o.field == a.field[k]);
            CHECK(o.power_a == a.power_a[k]);
            CHECK(o.power_b == a.power_b[k]);
            CHECK(o.phase == a.phase[k]);
        }
    }
    SUBCASE("linear hold interpolates between events") {
        NoiseSpec l = s;
        l.hold = NoiseHold::Linear;
        const NoiseRealization r = draw_noise(l, 20e-6, 99);
        const double t = 10.5 * r.event_spacing();
        CHECK(r.at(t).field == doctest::Approx(0.5 * (r.field[10] + r.field[11])));
        CHECK(r.at(10 * r.event_spacing()).field == doctest::Approx(r.field[10]));
    }
    SUBCASE("draws are paired across sigmas") {
        NoiseSpec twice = s;
        twice.sigma_b_rel *= 2;
        twice.sigma_phase *= 2;
        const NoiseRealization r = draw_noise(twice, 20e-6, 99);
        for (std::size_t k = 0; k < r.events(); ++k) {
            CHECK(r.field[k] == doctest::Approx(2 * a.field[k]));
            CHECK(r.phase[k] == doctest::Approx(2 * a.phase[k]));
            CHECK(r.power_a[k] == a.power_a[k]);
        }
    }
    SUBCASE("sample statistics") {
        NoiseSpec big = s;
        big.n_fluctuations = 20000;
        const NoiseRealization r = draw_noise(big, 20e-6, 5);
        double m = 0.0;
        double v = 0.0;
        for (double x : r.field) {
            m += x;
            v += x * x;
        }
        m /= r.events();
        v = v / r.events() - m * m;
        CHECK(std::abs(m) < 5 * 0.05 / std::sqrt(20000.0));
        CHECK(std::sqrt(v) == doctest::Approx(0.05).epsilon(0.03));
    }
}

TEST_CASE("noise spec validation") {
    NoiseSpec s;
    CHECK_NOTHROW(s.validate());
    s.n_fluctuations = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = NoiseSpec{};
    s.sigma_b_rel = -0.1;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = NoiseSpec{};
    s.sigma_phase = std::nan("");
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("Bloch sphere probe states") {
    const auto poles = bloch_sphere_states(2);
    REQUIRE(poles.size() == 2);
    CHECK(fidelity(poles[0], Spin::up()) == doctest::Approx(1.0));
    CHECK(fidelity(poles[1], Spin::down()) == doctest::Approx(1.0));

    for (int n : {6, 26, 50}) {
        const auto states = bloch_sphere_states(n);
        REQUIRE(states.size() == static_cast<std::size_t>(n));
        double min_dist = 10.0;
        Vector3 centroid = Vector3::Zero();
        for (std::size_t i = 0; i < states.size(); ++i) {
            CHECK(std::abs(states[i].amplitudes().norm() - 1.0) < 1e-14);
            centroid += states[i].bloch();
            for (std::size_t j = i + 1; j < states.size(); ++j) {
                min_dist = std::min(min_dist, (states[i].bloch() - states[j].bloch()).norm());
            }
        }
        // exact point groups for 6 and 26, Fibonacci spiral otherwise
        CHECK(min_dist > 0.8 * std::sqrt(4 * kPi / n));
        CHECK(centroid.norm() < (n == 50 ? 0.02 * n : 1e-9 * n));
    }
    CHECK_THROWS_AS(bloch_sphere_states(1), std::invalid_argument);
}

TEST_CASE("derive_seed") {
    std::set<std::uint64_t> seen;
    for (int c = 0; c < 8; ++c) {
        for (int s = 0; s < 26; ++s) {
            for (int r = 0; r < 5; ++r) {
                seen.insert(derive_seed(7, c, s, r));
            }
        }
    }
    CHECK(seen.size() == 8 * 26 * 5);
    CHECK(derive_seed(7, 1, 2, 3) == derive_seed(7, 1, 2, 3));
    CHECK(derive_seed(7, 1, 2, 3) != derive_seed(8, 1, 2, 3));
}

TEST_CASE("fidelity sweep") {
    const DriveParams d = reference_drive();
    const SU2 ideal = ideal_cycle(d);

    SUBCASE("no noise reproduces the adiabatic holonomy") {
        SweepOptions o;
        o.runs_per_state = 1;
        const FidelitySweepResult r = fidelity_sweep({1, 10}, quiet(1), d, ideal, o);
        REQUIRE(r.points.size() == 2);
        CHECK(r.points[0].n_samples == 26);
        CHECK(r.points[0].mean >= 0.995);
        CHECK(r.points[0].mean == doctest::Approx(r.points[1].mean).epsilon(1e-12));
        CHECK(r.raw.size() == 52);
    }
    SUBCASE("results do not depend on the worker count") {
        NoiseSpec s;
        s.seed = 3;
        SweepOptions o;
        o.runs_per_state = 2;
        o.n_states = 6;
        o.dt_divisor = 100;
        const FidelitySweepResult one = fidelity_sweep({10, 20}, s, d, ideal, o);
        o.workers = 3;
        const FidelitySweepResult three = fidelity_sweep({10, 20}, s, d, ideal, o);
        REQUIRE(one.raw.size() == three.raw.size());
        for (std::size_t k = 0; k < one.raw.size(); ++k) {
            CHECK(one.raw[k].seed == three.raw[k].seed);
            CHECK(one.raw[k].fidelity == three.raw[k].fidelity);
        }
        std::ostringstream a;
        std::ostringstream b;
        write_sweep_csv(a, one);
        write_sweep_csv(b, three);
        CHECK(a.str() == b.str());
    }
    SUBCASE("property: paired draws make infidelity grow with sigma") {
        SweepOptions o;
        o.runs_per_state = 3;
        o.n_states = 6;
        o.dt_divisor = 100;
        double last = -1.0;
        for (double scale : {0.0, 1.0, 2.0, 4.0}) {
            NoiseSpec s;
            s.seed = 11;
            s.sigma_b_rel *= scale;
            s.sigma_p_rel *= scale;
            s.sigma_phase *= scale;
            const double infid = 1.0 - fidelity_sweep({20}, s, d, ideal, o).points[0].mean;
            CHECK(infid > last);
            last = infid;
        }
    }
    SUBCASE("outputs") {
        NoiseSpec s;
        s.seed = 1;
        SweepOptions o;
        o.runs_per_state = 2;
        o.n_states = 2;
        o.dt_divisor = 100;
        const FidelitySweepResult r = fidelity_sweep({10, 50}, s, d, ideal, o);
        std::ostringstream sweep;
        write_sweep_csv(sweep, r);
        CHECK(sweep.str().rfind("n_fluctuations,mean_fidelity,std_fidelity,n_samples\n", 0) == 0);
        CHECK(count_lines(sweep.str()) == 3);
        std::ostringstream raw;
        write_raw_csv(raw, r);
        CHECK(raw.str().rfind("n_fluctuations,state,run,seed,fidelity\n", 0) == 0);
        CHECK(count_lines(raw.str()) == 9);
        const nlohmann::json j = sweep_summary_json(r, s, o);
        CHECK(j.contains("points"));
        CHECK(r.points[0].standard_error() ==
              doctest::Approx(r.points[0].std_dev / std::sqrt(4.0)));
    }
    SUBCASE("bad options are rejected") {
        SweepOptions o;
        o.runs_per_state = 0;
        CHECK_THROWS_AS(fidelity_sweep({10}, NoiseSpec{}, d, ideal, o), std::invalid_argument);
        CHECK_THROWS_AS(fidelity_sweep({0}, NoiseSpec{}, d, ideal), std::invalid_argument);
    }
}
