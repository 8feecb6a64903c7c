#include <bit>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "vnfp/cli_io.hpp"

using namespace vnfp;
namespace fs = std::filesystem;

namespace {

// Frozen canonical digest of the default configuration. A change here means
// the resolved-key schema or the serialization changed, which invalidates
// every recorded manifest; bump kArtifactVersion when that is intended.
constexpr const char* kDefaultDigest = "edb6cd7f3eabc78d";

std::string parse_error(const std::string& text)
{
    try {
        parse_config_text(text, "inline");
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

bool contains(const std::string& s, const std::string& needle)
{
    return s.find(needle) != std::string::npos;
}

fs::path fresh_dir(const std::string& tag)
{
    const fs::path p = fs::temp_directory_path() / ("vnfp_io_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("default configuration digest is frozen")
{
    const RunConfig cfg = default_config();
    CHECK(cfg.digest == kDefaultDigest);
    CHECK(cfg.resolved.size() == 27);
    CHECK(parse_config_text("", "inline").digest == kDefaultDigest);
    CHECK(parse_config_text("# only a comment\n\n", "inline").digest == kDefaultDigest);
}

TEST_CASE("digest is invariant under key order, sections, and spelling")
{
    const RunConfig a = parse_config_text("[grid]\nn = 500\n[time]\ndt = 0.002\n", "a");
    const RunConfig b = parse_config_text("time.dt = 0.002\ngrid.n = 500\n", "b");
    CHECK(a.digest == b.digest);
    CHECK(a.digest != kDefaultDigest);

    // Equivalent numeric spellings canonicalize to the same digest.
    const RunConfig c = parse_config_text("[time]\nt_end = 20.0\n", "c");
    CHECK(c.digest == kDefaultDigest);
    const RunConfig d = parse_config_text("grid.n = 500\n[time]\ndt = 2e-3\n", "d");
    CHECK(d.digest == a.digest);
}

TEST_CASE("any single override changes the digest")
{
    const char* overrides[] = {
        "grid.q_max = 41\n",      "grid.n = 1999\n",        "time.dt = 0.002\n",
        "solver.mode = relativistic\n", "solver.sigma = 0.5\n", "mc.seed = 2\n",
        "density.profile = gaussian\n", "ultra.times = 1,2\n",
    };
    for (const char* text : overrides)
        CHECK(parse_config_text(text, "inline").digest != kDefaultDigest);
}

TEST_CASE("parse errors carry origin, line, and key")
{
    CHECK(contains(parse_error("\nnot.a.key = 1\n"), "inline:2"));
    CHECK(contains(parse_error("\nnot.a.key = 1\n"), "unknown key 'not.a.key'"));

    const std::string dup = parse_error("[grid]\nn = 10\nn = 20\n");
    CHECK(contains(dup, "inline:3"));
    CHECK(contains(dup, "duplicate key 'grid.n'"));

    CHECK(contains(parse_error("just some words\n"), "expected key = value"));
    CHECK(contains(parse_error("[grid\nn = 10\n"), "malformed section header"));
    CHECK(contains(parse_error("= 3\n"), "empty key"));

    const std::string bad = parse_error("[grid]\nq_max = fast\n");
    CHECK(contains(bad, "inline:2"));
    CHECK(contains(bad, "grid.q_max"));
    CHECK(contains(bad, "finite number"));

    CHECK(contains(parse_error("grid.n = 2.5\n"), "expected an integer"));
    CHECK(contains(parse_error("mc.seed = -3\n"), "unsigned"));
    CHECK(contains(parse_error("mc.antithetic = yes\n"), "true or false"));
    CHECK(contains(parse_error("solver.mode = newtonian\n"), "ultra, relativistic"));
    CHECK(contains(parse_error("ultra.times = \n"), "comma-separated"));
}

TEST_CASE("range violations name the offending key")
{
    CHECK(contains(parse_error("time.dt = -1\n"), "dt"));
    CHECK(contains(parse_error("grid.n = 1\n"), "n"));
    CHECK(contains(parse_error("solver.theta = 2\n"), "theta"));
    CHECK(contains(parse_error("mc.n_paths = 101\n"), "mc.n_paths"));
    CHECK(contains(parse_error("mc.n_paths = 0\n"), "mc.n_paths"));
    CHECK(contains(parse_error("iterate.T = 1e-9\n"), "iterate.T"));
    CHECK(contains(parse_error("ultra.times = 0.1,-0.2\n"), "ultra.times"));
    CHECK(contains(parse_error("ultra.q_min = 0\n"), "ultra.q_min"));

    // Odd path counts are fine once antithetic pairing is off.
    const RunConfig ok = parse_config_text("mc.n_paths = 101\nmc.antithetic = false\n", "x");
    CHECK(ok.mc.n_paths == 101);

    CHECK_THROWS_AS(parse_config("/nonexistent/vnfp.conf"), std::invalid_argument);
}

TEST_CASE("parsed values land in the typed configuration")
{
    const RunConfig cfg = parse_config_text(
        "[grid]\nq_max = 30 # trailing comment\nn = 123\ngrowth = 1.01\n"
        "[solver]\nmode = relativistic\ntheta = 1\nsigma = 0.25\n"
        "[mc]\nseed = 18446744073709551615\nantithetic = false\n"
        "[ultra]\ntimes = 0.5, 1.5 ,2.5\n",
        "inline");
    CHECK(cfg.sim.q_max == 30.0);
    CHECK(cfg.sim.n == 123);
    CHECK(cfg.sim.grid_growth == 1.01);
    CHECK(cfg.sim.mode == RadialMode::relativistic);
    CHECK(cfg.sim.theta == 1.0);
    CHECK(cfg.sim.sigma == 0.25);
    CHECK(cfg.mc.seed == 18446744073709551615ull);
    CHECK(cfg.mc.antithetic == false);
    REQUIRE(cfg.ultra.times.size() == 3);
    CHECK(cfg.ultra.times[1] == 1.5);
    CHECK(cfg.resolved.at("solver.mode") == "relativistic");
    CHECK(cfg.sim.f_in.eval(1.0) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("format_double round-trips bit for bit")
{
    const double samples[] = {0.0,       1.0 / 3.0, 0.1,    2e-308, 1.7976931348623157e308,
                              0.2,       20.0,      1e-17,  3.5,    6.02214076e23,
                              -1.5e-200, 123456789.123456789};
    for (double x : samples) {
        const std::string s = format_double(x);
        const double y = std::strtod(s.c_str(), nullptr);
        CHECK(std::bit_cast<std::uint64_t>(y) == std::bit_cast<std::uint64_t>(x));
    }
    CHECK(format_double(-0.0) == "-0");
}

TEST_CASE("diagnostics CSV round-trips bit for bit")
{
    SimConfig sim;
    sim.n = 50;
    sim.q_max = 10;
    sim.t_end = 0.05;
    sim.dt = 5e-3;
    sim.diagnostics_every = 2;
    const Trajectory traj = run_coupled(sim);
    REQUIRE(traj.diagnostics.size() >= 3);

    const fs::path dir = fresh_dir("roundtrip");
    emit_csv(traj, dir.string());

    const auto back = read_diagnostics_csv((dir / "diagnostics.csv").string());
    REQUIRE(back.size() == traj.diagnostics.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].t == traj.diagnostics[i].t);
        CHECK(back[i].mass == traj.diagnostics[i].mass);
        CHECK(back[i].l2 == traj.diagnostics[i].l2);
        CHECK(back[i].first_abs_moment == traj.diagnostics[i].first_abs_moment);
        CHECK(back[i].energy == traj.diagnostics[i].energy);
        CHECK(back[i].energy_residual == traj.diagnostics[i].energy_residual);
        CHECK(back[i].nonvanish == traj.diagnostics[i].nonvanish);
        CHECK(back[i].phi == traj.diagnostics[i].phi);
        CHECK(back[i].phidot == traj.diagnostics[i].phidot);
    }

    // Profiles list every snapshot against the true cell centers.
    std::ifstream p(dir / "profiles.csv");
    std::string header;
    std::getline(p, header);
    CHECK(header == "t,q,f");
    std::size_t rows = 0;
    for (std::string line; std::getline(p, line);)
        if (!line.empty())
            ++rows;
    CHECK(rows == traj.density_snapshots.size() * std::size_t(traj.grid.n));
    fs::remove_all(dir);
}

TEST_CASE("empty trajectories still produce headed files")
{
    Trajectory traj;
    traj.grid.n = 0;
    const fs::path dir = fresh_dir("empty");
    emit_csv(traj, dir.string());
    CHECK(read_diagnostics_csv((dir / "diagnostics.csv").string()).empty());
    CHECK_THROWS_AS(read_diagnostics_csv((dir / "profiles.csv").string()),
                    std::runtime_error);  // wrong header
    fs::remove_all(dir);
}

TEST_CASE("manifest records digest, version, and outputs")
{
    const fs::path dir = fresh_dir("manifest");
    const RunConfig cfg = default_config();
    const std::string t0 = timestamp_now();
    write_manifest(dir.string(), cfg, {"diagnostics.csv", "profiles.csv"}, t0, timestamp_now());

    std::ifstream in(dir / "manifest.json");
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    CHECK(j.at("config_digest").get<std::string>() == kDefaultDigest);
    CHECK(j.at("artifact_version").get<std::string>() == kArtifactVersion);
    const auto files = j.at("output_files").get<std::vector<std::string>>();
    REQUIRE(files.size() == 2);
    CHECK(files[0] == "diagnostics.csv");
    const std::string started = j.at("started_at").get<std::string>();
    REQUIRE(started.size() == 20);
    CHECK(started[4] == '-');
    CHECK(started[10] == 'T');
    CHECK(started.back() == 'Z');
    fs::remove_all(dir);
}

#ifdef VNFP_BIN
namespace {

int run_vnfp(const std::string& args)
{
    const std::string cmd = std::string(VNFP_BIN) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return (rc >= 0 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("the binary maps failures to the documented exit codes")
{
    const fs::path dir = fresh_dir("cli");
    const fs::path conf = dir / "bad.conf";
    std::ofstream(conf) << "no.such.key = 1\n";

    CHECK(run_vnfp("--definitely-not-a-flag") == 2);
    CHECK(run_vnfp("simulate --config " + conf.string() + " --out " + (dir / "o1").string()) ==
          2);

    std::ofstream(dir / "odd.conf") << "mc.n_paths = 7\n";
    CHECK(run_vnfp("mc --config " + (dir / "odd.conf").string() + " --out " +
                   (dir / "o2").string()) == 2);

    CHECK(run_vnfp("verify") == 0);
    fs::remove_all(dir);
}

TEST_CASE("the binary runs a tiny simulation end to end")
{
    const fs::path dir = fresh_dir("cli_run");
    const fs::path conf = dir / "tiny.conf";
    std::ofstream(conf) << "[grid]\nn = 60\nq_max = 10\n[time]\ndt = 0.005\nt_end = 0.05\n";
    const fs::path out = dir / "run";

    REQUIRE(run_vnfp("simulate --config " + conf.string() + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "diagnostics.csv"));
    CHECK(fs::exists(out / "profiles.csv"));
    CHECK(fs::exists(out / "manifest.json"));
    CHECK_FALSE(read_diagnostics_csv((out / "diagnostics.csv").string()).empty());
    fs::remove_all(dir);
}
#endif
