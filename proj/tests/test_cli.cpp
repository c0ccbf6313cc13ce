// test_cli.cpp — presets, config parsing, CSV artifacts, exit codes

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "omprobe/config.hpp"
#include "omprobe/csv.hpp"
#include "omprobe/errors.hpp"
#include "omprobe/presets.hpp"

using namespace omprobe;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("omprobe_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) lines.push_back(line);
    return lines;
}

std::vector<double> parse_row(const std::string& line) {
    std::vector<double> out;
    std::istringstream is(line);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

} // namespace

TEST_CASE("preset catalog contents") {
    CHECK(preset_catalog().size() == 18);
    const Preset* fig5a = find_preset("fig5a");
    REQUIRE(fig5a != nullptr);
    CHECK(fig5a->n_thermal == 10.0);
    CHECK(fig5a->probe_mag == doctest::Approx(1.0 / 30.0).epsilon(1e-15));
    CHECK(fig5a->n_cav == 5);
    CHECK(fig5a->n_mech == 50);
    CHECK(fig5a->mode == RunMode::Lindblad);
    REQUIRE(fig5a->phases.size() == 2);
    CHECK(fig5a->phases[0] == 0.0);
    CHECK(fig5a->phases[1] == doctest::Approx(kPi));

    const Preset* fig3b = find_preset("fig3b");
    REQUIRE(fig3b != nullptr);
    CHECK(fig3b->g_mag == doctest::Approx(5e-4));
    CHECK(fig3b->grid_lo == doctest::Approx(-5e-3));
    CHECK(fig3b->eta == 0.05);

    const Preset* fig4c = find_preset("fig4c");
    REQUIRE(fig4c != nullptr);
    CHECK(fig4c->g_mag == doctest::Approx(0.5 * std::sqrt(1e-3)).epsilon(1e-12));
    CHECK(fig4c->eta == 1.0);

    CHECK(find_preset("nope") == nullptr);
    CHECK(suggest_preset("fig2x") == "fig2a");
    CHECK(suggest_preset("fig5") == "fig5a");
}

TEST_CASE("config file parsing with diagnostics") {
    const fs::path dir = fresh_dir("config");
    const fs::path good = dir / "run.ini";
    {
        std::ofstream f(good);
        f << "# comment\n"
          << "[run]\n"
          << "mode = spectrum\n"
          << "method = closed\n"
          << "out = s.csv\n"
          << "[system]\n"
          << "gamma_m = 0.001\n"
          << "omega_m = 10\n"
          << "eta = 0.05\n"
          << "[working_point]\n"
          << "G = 0.3333333333333333\n"
          << "phi = 0\n"
          << "y = 1\n"
          << "[grid]\n"
          << "delta_prime_min = -1\n"
          << "delta_prime_max = 1\n"
          << "points = 11\n";
    }
    const RunConfig c = parse_config_file(good.string());
    CHECK(c.mode == RunMode::Spectrum);
    CHECK(c.method == ResponseMethod::ClosedForm);
    CHECK(*c.gamma_m == 0.001);
    CHECK(*c.g_mag == doctest::Approx(1.0 / 3.0));
    CHECK(*c.points == 11);

    auto expect_error = [&](const std::string& body, const std::string& needle) {
        const fs::path bad = dir / "bad.ini";
        std::ofstream f(bad);
        f << body;
        f.close();
        try {
            parse_config_file(bad.string());
            CHECK(false);
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            CHECK(what.find(needle) != std::string::npos);
            CHECK(what.find("bad.ini:") != std::string::npos);
        }
    };
    expect_error("[system]\nkappa == 1\n", "number");
    expect_error("[system]\nbogus = 1\n", "unknown key");
    expect_error("[nowhere]\nx = 1\n", "unknown section");
    expect_error("x = 1\n", "outside any [section]");
    expect_error("[grid]\npoints = 1.5\n", "integer");
    expect_error("[run]\nmode = banana\n", "unknown mode");
}

TEST_CASE("flags override file values") {
    RunConfig file;
    file.gamma_m = 0.001;
    file.points = 100;
    file.preset = "fig2a";
    RunConfig flags;
    flags.points = 7;
    const RunConfig merged = merge_configs(flags, file);
    CHECK(*merged.points == 7);
    CHECK(*merged.gamma_m == 0.001);
    CHECK(*merged.preset == "fig2a");
}

TEST_CASE("spectrum run: schema, precision, determinism, metadata") {
    const fs::path dir = fresh_dir("spectrum");
    RunConfig c;
    c.preset = "fig2a";
    c.points = 3;
    c.out_dir = dir.string();
    c.out_path = "fig2a.csv";
    const RunResult r1 = run(c);
    REQUIRE(r1.artifacts.size() == 2);

    const std::string text = slurp(dir / "fig2a.csv");
    CHECK(text.find('\r') == std::string::npos); // LF endings only
    const auto lines = split_lines(text);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "delta_prime,re_epsT,im_epsT,re_scriptT,im_scriptT,T");
    const auto mid = parse_row(lines[2]);
    REQUIRE(mid.size() == 6);
    CHECK(mid[0] == 0.0);
    // Full double precision round trip of the resonance value.
    CHECK(mid[1] == doctest::Approx(0.14988775255674733).epsilon(1e-15));
    CHECK(mid[5] == doctest::Approx(0.72269083325301797).epsilon(1e-15));

    // Bit-identical reruns.
    const RunResult r2 = run(c);
    CHECK(slurp(dir / "fig2a.csv") == text);

    const std::string meta = slurp(dir / "fig2a.meta.json");
    for (const char* key : {"\"version\"", "\"preset\"", "\"system\"", "\"drives\"",
                            "\"working_point\"", "\"cooperativity\"", "\"grid\"",
                            "\"method\"", "\"linearity_margin\"", "\"t_max_estimate\""})
        CHECK(meta.find(key) != std::string::npos);
}

TEST_CASE("single-point spectrum via flags only") {
    const fs::path dir = fresh_dir("point");
    RunConfig c;
    c.mode = RunMode::Spectrum;
    c.g_mag = 1.0 / 3.0;
    c.phi = kPi;
    c.y = 1.0;
    c.eta = 0.05;
    c.gamma_m = 1e-3;
    c.omega_m = 10.0;
    c.points = 1;
    c.grid_lo = 0.0;
    c.grid_hi = 0.0;
    c.out_dir = dir.string();
    c.out_path = "pt.csv";
    run(c);
    const auto lines = split_lines(slurp(dir / "pt.csv"));
    REQUIRE(lines.size() == 2);
    const auto row = parse_row(lines[1]);
    CHECK(row[5] == doctest::Approx(1.3212094693898071).epsilon(1e-12));
}

TEST_CASE("sweep-g run finds the amplification maximum") {
    const fs::path dir = fresh_dir("sweep");
    RunConfig c;
    c.mode = RunMode::SweepG;
    c.phi = kPi;
    c.eta = 1.0;
    c.gamma_m = 1e-3;
    c.omega_m = 10.0;
    c.g_lo = 1e-3;
    c.g_hi = 0.2;
    c.g_points = 120;
    c.sweep_y = {1.0};
    c.out_dir = dir.string();
    c.out_path = "sweep.csv";
    run(c);
    const auto lines = split_lines(slurp(dir / "sweep.csv"));
    REQUIRE(lines.size() == 121);
    CHECK(lines[0] == "y,g,re_epsT,im_epsT,re_scriptT,im_scriptT,T");
    double best_t = 0.0, best_g = 0.0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto row = parse_row(lines[i]);
        if (row[6] > best_t) {
            best_t = row[6];
            best_g = row[1];
        }
    }
    CHECK(best_t == doctest::Approx(1000.0).epsilon(5e-3));
    CHECK(best_g == doctest::Approx(0.0158).epsilon(0.1));
}

TEST_CASE("lindblad run emits the comparison schema") {
    const fs::path dir = fresh_dir("lindblad");
    RunConfig c;
    c.mode = RunMode::Lindblad;
    c.g_mag = 1.0 / 3.0;
    c.phi = 0.0;
    c.y = 1.0;
    c.eta = 0.05;
    c.gamma_m = 1e-3;
    c.omega_m = 10.0;
    c.probe_mag = 1.0 / 30.0;
    c.n_thermal = 0.0;
    c.ncut_cav = 3;
    c.ncut_mech = 5;
    c.points = 3;
    c.grid_lo = -0.5;
    c.grid_hi = 0.5;
    c.out_dir = dir.string();
    c.out_path = "lb.csv";
    run(c);
    const auto lines = split_lines(slurp(dir / "lb.csv"));
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "delta_prime,re_epsT_num,im_epsT_num,re_epsT_ana,im_epsT_ana,abs_err");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto row = parse_row(lines[i]);
        REQUIRE(row.size() == 6);
        CHECK(row[5] <= 0.02 * std::hypot(row[3], row[4]));
    }
}

TEST_CASE("lindblad convergence table") {
    const fs::path dir = fresh_dir("converge");
    RunConfig c;
    c.mode = RunMode::Lindblad;
    c.converge = true;
    c.g_mag = 1.0 / 3.0;
    c.phi = 0.0;
    c.y = 1.0;
    c.eta = 0.05;
    c.gamma_m = 1e-3;
    c.omega_m = 10.0;
    c.probe_mag = 1.0 / 30.0;
    c.n_thermal = 0.0;
    c.ncut_cav = 4;
    c.ncut_mech = 8;
    c.out_dir = dir.string();
    c.out_path = "conv.csv";
    run(c);
    const auto lines = split_lines(slurp(dir / "conv.csv"));
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "n_cav,n_mech,re_mean_c,im_mean_c,diff");
    const auto last = parse_row(lines[3]);
    CHECK(last[1] == 8.0);
    CHECK(last[4] <= 1e-4); // converged at these weak drives
    const std::string meta = slurp(dir / "conv.meta.json");
    CHECK(meta.find("\"converged\": true") != std::string::npos);
}

TEST_CASE("nonlinear-check run writes the validation report") {
    const fs::path dir = fresh_dir("nl");
    RunConfig c;
    c.mode = RunMode::NonlinearCheck;
    c.g_mag = 1.0 / 3.0;
    c.phi = 0.0;
    c.y = 1.0;
    c.eta = 0.05;
    c.gamma_m = 0.05; // fast settle for the test run
    c.omega_m = 10.0;
    c.eps_ratios = {1e-3};
    c.write_timeseries = true;
    c.out_dir = dir.string();
    c.out_path = "lin.csv";
    run(c);
    const auto lines = split_lines(slurp(dir / "lin.csv"));
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "eps_p_over_eps_c,margin,rel_deviation");
    const auto row = parse_row(lines[1]);
    CHECK(row[0] == doctest::Approx(1e-3));
    CHECK(row[2] < 0.05);
    const auto ts = split_lines(slurp(dir / "lin-timeseries.csv"));
    CHECK(ts[0] == "t,re_c,im_c,re_b,im_b");
    CHECK(ts.size() > 100);
}

TEST_CASE("direct-drive config defines the DriveSet explicitly") {
    // Raw eps_c/eps_p/eps_a with delta0; reproduces the fig2a resonance when
    // the drives match the |G| = kappa/3 inversion.
    const fs::path dir = fresh_dir("drives");
    const fs::path ini = dir / "drives.ini";
    {
        std::ofstream f(ini);
        f << "[run]\nmode = spectrum\nout = d.csv\n"
          << "[system]\ngamma_m = 0.001\nomega_m = 10\ng0 = 0.001\neta = 0.05\n"
          << "delta0 = 10.022222222166667\n" // back-solved for Delta = omega_m
          << "[drives]\ncontrol_mag = 3337.4973990834642\n"
          << "control_phase = 1.5208379310729538\n" // arg(i*10 + kappa/2)
          << "probe_mag = 0.001\nprobe_phase = 0\n"
          << "mech_mag = 0.001\n"
          << "mech_phase = -1.5707963267948966\n" // Phi = 0
          << "[grid]\ndelta_prime_min = 0\ndelta_prime_max = 0\npoints = 1\n";
    }
    RunConfig c = parse_config_file(ini.string());
    c.out_dir = dir.string();
    run(c);
    const auto lines = split_lines(slurp(dir / "d.csv"));
    REQUIRE(lines.size() == 2);
    const auto row = parse_row(lines[1]);
    CHECK(row[1] == doctest::Approx(0.14988775255674733).epsilon(1e-6));

    // Missing delta0 is a configuration error.
    RunConfig broken = c;
    broken.delta0.reset();
    CHECK_THROWS_AS(run(broken), ConfigError);
}

TEST_CASE("classify run reports the regime") {
    const fs::path dir = fresh_dir("classify");
    RunConfig c;
    c.mode = RunMode::Classify;
    c.preset = "fig2c";
    c.out_dir = dir.string();
    c.out_path = "regime.csv";
    const RunResult r = run(c);
    REQUIRE(r.messages.size() == 1);
    CHECK(r.messages[0].find("GWI_like") != std::string::npos);
    const std::string meta = slurp(dir / "regime.meta.json");
    CHECK(meta.find("\"regime\"") != std::string::npos);
    CHECK(meta.find("\"t_max_estimate\"") != std::string::npos);
}

TEST_CASE("unknown preset raises a ConfigError with a suggestion") {
    RunConfig c;
    c.preset = "fig2z";
    c.mode = RunMode::Spectrum;
    try {
        run(c);
        CHECK(false);
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("did you mean") != std::string::npos);
        CHECK(what.find("fig2") != std::string::npos);
    }
}

TEST_CASE("OMPROBE_OUT_DIR supplies the default output directory") {
    const fs::path dir = fresh_dir("envdir");
    setenv("OMPROBE_OUT_DIR", dir.c_str(), 1);
    RunConfig c;
    c.preset = "fig2a";
    c.points = 1;
    c.grid_lo = 0.0;
    c.grid_hi = 0.0;
    run(c);
    unsetenv("OMPROBE_OUT_DIR");
    CHECK(fs::exists(dir / "fig2a.csv"));
}

TEST_CASE("CLI binary exit codes") {
    const char* cli = std::getenv("OMPROBE_CLI");
    REQUIRE(cli != nullptr);
    const fs::path dir = fresh_dir("exitcodes");

    auto run_cmd = [&](const std::string& args) {
        const std::string cmd = std::string(cli) + " " + args + " > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };

    CHECK(run_cmd("list-presets") == 0);
    CHECK(run_cmd("spectrum --preset fig2a --points 1 --out " +
                  (dir / "ok.csv").string()) == 0);
    CHECK(fs::exists(dir / "ok.csv"));
    CHECK(run_cmd("spectrum --preset fig9q --out " + (dir / "x.csv").string()) == 2);
    CHECK(run_cmd("spectrum --eta 7 --G 0.1 --out " + (dir / "y.csv").string()) == 2);
    // numerical failure: truncation beyond the Liouvillian dimension cap
    CHECK(run_cmd("lindblad --preset fig5a --ncut-cav 70 --ncut-mech 70 --out " +
                  (dir / "z.csv").string()) == 3);
}
