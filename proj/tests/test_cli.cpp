#include "doctest.h"

#include "json.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kBase =
    "duration_s = 20e-6\n"
    "slow_hz = 50e3\n"
    "fast_hz = 500e3\n"
    "drive.omega0_hz = 258.3e3\n"
    "drive.b0_T = 5e-4\n"
    "drive.delta_b_T = 3.68e-5\n";

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("rhsim_cli_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = scratch() / name;
    std::ofstream(p) << text;
    return p;
}

int rhsim(const std::string& args) {
    const std::string cmd = std::string(RHSIM_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

nlohmann::json load_json(const fs::path& p) {
    return nlohmann::json::parse(slurp(p));
}

std::string out_dir(const std::string& name) {
    return (scratch() / name).string();
}

}  // namespace

TEST_CASE("geometric-phase report on the reference config") {
    const fs::path cfg = fs::path(RH_DATA_DIR) / "reference.conf";
    REQUIRE(rhsim("geometric-phase --config " + cfg.string() + " --out " + out_dir("gp")) == 0);
    const nlohmann::json r = load_json(scratch() / "gp" / "report.json");
    CHECK(r["g"].get<double>() == doctest::Approx(-0.1248).epsilon(0.0005 / 0.1248));
    CHECK(r["geometric_rabi_period_s"].get<double>() == doctest::Approx(80e-6).epsilon(0.01));
    CHECK(r["frequencies"]["slow"]["hz"].get<double>() == 50e3);
    CHECK(r["frequencies"]["slow"]["rad_per_s"].get<double>() == doctest::Approx(2 * M_PI * 50e3));
    CHECK(r["cycles"].size() == 5);
    CHECK(r["stroboscopic_samples"] == 51);
    for (const char* f : {"stroboscopic.csv", "stokes.csv", "oracle.csv", "trajectory.csv",
                          "trajectory.json", "config.conf"}) {
        CHECK(fs::exists(scratch() / "gp" / f));
    }
}

TEST_CASE("zero drive amplitude gives a flat run and identity holonomy") {
    std::string text = kBase;
    text.replace(text.find("258.3e3"), 7, "0");
    const fs::path cfg = write_config("zero.conf", text);
    REQUIRE(rhsim("--config " + cfg.string() + " --out " + out_dir("zero")) == 0);
    const nlohmann::json r = load_json(scratch() / "zero" / "report.json");
    CHECK(r["g"].get<double>() == 0.0);
    CHECK(r["cycles"][0]["reconstructed"]["u0"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    std::istringstream rows(slurp(scratch() / "zero" / "stroboscopic.csv"));
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
        const auto p1 = std::stod(line.substr(line.find(',', line.find(',') + 1) + 1));
        CHECK(p1 == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("exit codes") {
    const fs::path good = write_config("good.conf", kBase);
    CHECK(rhsim("adiabaticity --config " + good.string() + " --out " + out_dir("ad")) == 0);

    SUBCASE("invalid configuration") {
        const fs::path bad = write_config("bad.conf", kBase + "no_such_key = 1\n");
        CHECK(rhsim("--config " + bad.string() + " --out " + out_dir("bad")) == 2);
        CHECK(rhsim("--config " + (scratch() / "missing.conf").string()) == 2);
        CHECK(rhsim("teleport --config " + good.string()) == 2);
    }
    SUBCASE("adiabaticity flag under --strict") {
        std::string text = kBase;
        text.replace(text.find("slow_hz = 50e3"), 14, "slow_hz = 500e3");
        const fs::path fast = write_config("fast.conf", text);
        CHECK(rhsim("--strict --config " + fast.string() + " --out " + out_dir("fast")) == 4);
        CHECK(rhsim("adiabaticity --strict --config " + fast.string() + " --out " + out_dir("fast")) == 4);
    }
    SUBCASE("incommensurate segments") {
        const fs::path seg = write_config("seg.conf", kBase + "sequence.segment_s = 15e-6\n");
        CHECK(rhsim("non-abelian --config " + seg.string() + " --out " + out_dir("seg")) == 5);
    }
}

TEST_CASE("non-abelian with equal azimuths commutes") {
    const fs::path cfg = write_config("same.conf", kBase + "sequence.phi1_rad = 0.3\nsequence.phi2_rad = 0.3\n");
    REQUIRE(rhsim("non-abelian --config " + cfg.string() + " --out " + out_dir("same")) == 0);
    const nlohmann::json r = load_json(scratch() / "same" / "non_abelian.json");
    CHECK(r["final_stokes_difference_norm"].get<double>() < 1e-12);
    CHECK(r["commutator_frobenius"].get<double>() < 1e-6);
    CHECK(slurp(scratch() / "same" / "stokes_u2u1.csv") == slurp(scratch() / "same" / "stokes_u1u2.csv"));
}

TEST_CASE("waveform windows") {
    const fs::path one = write_config("one.conf", kBase + "waveforms.window_s = 2e-6\n");
    REQUIRE(rhsim("waveforms --config " + one.string() + " --out " + out_dir("wf1")) == 0);
    const std::string csv = slurp(scratch() / "wf1" / "waveforms.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 22);

    std::string text = kBase;
    text.replace(text.find("3.68e-5"), 7, "0");
    const fs::path flat = write_config("flat.conf", text);
    REQUIRE(rhsim("waveforms --config " + flat.string() + " --out " + out_dir("wf0")) == 0);
    std::istringstream rows(slurp(scratch() / "wf0" / "waveforms.csv"));
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
        const auto a = line.find(',');
        CHECK(std::stod(line.substr(a + 1)) == 5e-4);
    }
}

TEST_CASE("noise sweep is a pure function of config and seed") {
    const std::string noise = "noise.counts = 10,50\nnoise.runs_per_state = 2\nnoise.n_states = 6\n"
                              "integrator.dt_divisor = 100\n";
    const fs::path cfg = write_config("noise.conf", kBase + noise);
    REQUIRE(rhsim("noise-sweep --seed 42 --workers 1 --config " + cfg.string() + " --out " + out_dir("n1")) == 0);
    REQUIRE(rhsim("noise-sweep --seed 42 --workers 3 --config " + cfg.string() + " --out " + out_dir("n2")) == 0);
    REQUIRE(rhsim("noise-sweep --seed 43 --workers 1 --config " + cfg.string() + " --out " + out_dir("n3")) == 0);
    for (const char* f : {"sweep.csv", "sweep_raw.csv", "sweep.json", "config.conf"}) {
        CHECK(slurp(scratch() / "n1" / f) == slurp(scratch() / "n2" / f));
    }
    CHECK(slurp(scratch() / "n1" / "sweep_raw.csv") != slurp(scratch() / "n3" / "sweep_raw.csv"));

    const fs::path quiet = write_config(
        "quiet.conf", kBase + noise + "noise.sigma_b_rel = 0\nnoise.sigma_p_rel = 0\nnoise.sigma_phase_rad = 0\n");
    REQUIRE(rhsim("noise-sweep --config " + quiet.string() + " --out " + out_dir("nq")) == 0);
    const nlohmann::json s = load_json(scratch() / "nq" / "sweep.json");
    for (const auto& p : s["points"]) {
        CHECK(p["mean_fidelity"].get<double>() > 0.995);
    }
    CHECK(s["points"][0]["mean_fidelity"] == s["points"][1]["mean_fidelity"]);
}
