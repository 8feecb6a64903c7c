#include "vnfp/cli_io.hpp"

#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <limits>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "vnfp/quadrature.hpp"
#include "vnfp/sde_mc.hpp"
#include "vnfp/specialfn.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vnfp {

namespace {

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string mode_name(RadialMode m)
{
    return m == RadialMode::ultra ? "ultra" : "relativistic";
}

RadialProfile named_profile(const std::string& name)
{
    if (name == "exp")
        return {[](double q) { return std::exp(-q); }, 50.0};
    if (name == "gaussian")
        return {[](double q) { return std::exp(-q * q); }, 8.0};
    throw std::invalid_argument("density.profile: unknown profile '" + name + "'");
}

std::string join_doubles(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += ',';
        out += format_double(v[i]);
    }
    return out;
}

std::map<std::string, std::string> serialize(const RunConfig& cfg)
{
    std::map<std::string, std::string> m;
    m["grid.q_max"] = format_double(cfg.sim.q_max);
    m["grid.n"] = std::to_string(cfg.sim.n);
    m["grid.growth"] = format_double(cfg.sim.grid_growth);
    m["time.dt"] = format_double(cfg.sim.dt);
    m["time.t_end"] = format_double(cfg.sim.t_end);
    m["field.phi_in"] = format_double(cfg.sim.phi_in);
    m["field.psi_in"] = format_double(cfg.sim.psi_in);
    m["field.run"] = cfg.field_run;
    m["density.profile"] = cfg.sim.f_in_name;
    m["solver.mode"] = mode_name(cfg.sim.mode);
    m["solver.theta"] = format_double(cfg.sim.theta);
    m["solver.sigma"] = format_double(cfg.sim.sigma);
    m["diagnostics.every"] = std::to_string(cfg.sim.diagnostics_every);
    m["diagnostics.snapshot_every"] = std::to_string(cfg.sim.snapshot_every);
    m["diagnostics.nonvanish_eps"] = format_double(cfg.sim.nonvanish_eps);
    m["mc.n_paths"] = std::to_string(cfg.mc.n_paths);
    m["mc.dt"] = format_double(cfg.mc.dt);
    m["mc.seed"] = std::to_string(cfg.mc.seed);
    m["mc.antithetic"] = cfg.mc.antithetic ? "true" : "false";
    m["mc.q"] = format_double(cfg.mc.q);
    m["mc.t"] = format_double(cfg.mc.t);
    m["iterate.n_iter"] = std::to_string(cfg.iterate.n_iter);
    m["iterate.T"] = format_double(cfg.iterate.T);
    m["ultra.times"] = join_doubles(cfg.ultra.times);
    m["ultra.q_min"] = format_double(cfg.ultra.q_min);
    m["ultra.q_max"] = format_double(cfg.ultra.q_max);
    m["ultra.n_q"] = std::to_string(cfg.ultra.n_q);
    return m;
}

void finalize(RunConfig& cfg)
{
    cfg.sim.f_in = named_profile(cfg.sim.f_in_name);
    cfg.resolved = serialize(cfg);
    cfg.digest = config_digest(cfg.resolved);
}

/// Raw key -> (value, line) overrides plus typed extraction with
/// origin:line context on malformed values.
struct Resolver {
    std::string origin;
    std::map<std::string, std::pair<std::string, int>> kv;

    [[noreturn]] void fail(const std::string& key, int line, const std::string& msg) const
    {
        throw std::invalid_argument(origin + ":" + std::to_string(line) + ": " + key +
                                    ": " + msg);
    }

    const std::pair<std::string, int>* find(const std::string& key) const
    {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    }

    double parse_double(const std::string& key, const std::string& v, int line) const
    {
        const char* s = v.c_str();
        char* end = nullptr;
        const double x = std::strtod(s, &end);
        if (v.empty() || end != s + v.size() || !std::isfinite(x))
            fail(key, line, "expected a finite number, got '" + v + "'");
        return x;
    }

    void dbl(const std::string& key, double& out) const
    {
        if (const auto* e = find(key))
            out = parse_double(key, e->first, e->second);
    }

    void integer(const std::string& key, int& out) const
    {
        if (const auto* e = find(key)) {
            const char* s = e->first.c_str();
            char* end = nullptr;
            const long x = std::strtol(s, &end, 10);
            if (e->first.empty() || end != s + e->first.size() || x < INT_MIN || x > INT_MAX)
                fail(key, e->second, "expected an integer, got '" + e->first + "'");
            out = int(x);
        }
    }

    void i64(const std::string& key, std::int64_t& out) const
    {
        if (const auto* e = find(key)) {
            const char* s = e->first.c_str();
            char* end = nullptr;
            const long long x = std::strtoll(s, &end, 10);
            if (e->first.empty() || end != s + e->first.size())
                fail(key, e->second, "expected an integer, got '" + e->first + "'");
            out = x;
        }
    }

    void u64(const std::string& key, std::uint64_t& out) const
    {
        if (const auto* e = find(key)) {
            const std::string& v = e->first;
            const char* s = v.c_str();
            char* end = nullptr;
            const unsigned long long x = std::strtoull(s, &end, 10);
            if (v.empty() || v[0] == '-' || end != s + v.size())
                fail(key, e->second, "expected an unsigned integer, got '" + v + "'");
            out = x;
        }
    }

    void boolean(const std::string& key, bool& out) const
    {
        if (const auto* e = find(key)) {
            if (e->first == "true")
                out = true;
            else if (e->first == "false")
                out = false;
            else
                fail(key, e->second, "expected true or false, got '" + e->first + "'");
        }
    }

    void choice(const std::string& key, std::string& out,
                std::initializer_list<const char*> allowed) const
    {
        if (const auto* e = find(key)) {
            for (const char* a : allowed)
                if (e->first == a) {
                    out = a;
                    return;
                }
            std::string opts;
            for (const char* a : allowed)
                opts += std::string(opts.empty() ? "" : ", ") + a;
            fail(key, e->second, "expected one of {" + opts + "}, got '" + e->first + "'");
        }
    }

    void list(const std::string& key, std::vector<double>& out) const
    {
        if (const auto* e = find(key)) {
            std::vector<double> vals;
            std::stringstream ss(e->first);
            std::string item;
            while (std::getline(ss, item, ','))
                vals.push_back(parse_double(key, trim(item), e->second));
            if (vals.empty())
                fail(key, e->second, "expected a comma-separated list of numbers");
            out = std::move(vals);
        }
    }
};

void validate_aux(const RunConfig& cfg)
{
    if (cfg.mc.n_paths < 1)
        throw std::invalid_argument("mc.n_paths: must be >= 1");
    if (cfg.mc.antithetic && cfg.mc.n_paths % 2 != 0)
        throw std::invalid_argument("mc.n_paths: must be even with mc.antithetic = true");
    if (!(cfg.mc.dt > 0))
        throw std::invalid_argument("mc.dt: must be positive");
    if (!(cfg.mc.q > 0))
        throw std::invalid_argument("mc.q: must be positive");
    if (!(cfg.mc.t > 0))
        throw std::invalid_argument("mc.t: must be positive");
    if (cfg.iterate.n_iter < 1)
        throw std::invalid_argument("iterate.n_iter: must be >= 1");
    if (!(cfg.iterate.T >= cfg.sim.dt))
        throw std::invalid_argument("iterate.T: must be >= time.dt");
    for (double t : cfg.ultra.times)
        if (!(t > 0))
            throw std::invalid_argument("ultra.times: entries must be positive");
    if (!(cfg.ultra.q_min > 0))
        throw std::invalid_argument("ultra.q_min: must be positive");
    if (!(cfg.ultra.q_max > cfg.ultra.q_min))
        throw std::invalid_argument("ultra.q_max: must exceed ultra.q_min");
    if (cfg.ultra.n_q < 2)
        throw std::invalid_argument("ultra.n_q: must be >= 2");
}

}  // namespace

std::string format_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string config_digest(const std::map<std::string, std::string>& resolved)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    const auto feed = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
    };
    for (const auto& [k, v] : resolved) {  // std::map iterates sorted
        feed(k);
        feed("=");
        feed(v);
        feed("\n");
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig default_config()
{
    RunConfig cfg;
    finalize(cfg);
    return cfg;
}

RunConfig parse_config_text(const std::string& text, const std::string& origin)
{
    RunConfig cfg;
    const auto known = serialize(cfg);

    Resolver r;
    r.origin = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                            ": malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (!known.count(full))
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": unknown key '" + full + "'");
        if (r.kv.count(full))
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": duplicate key '" + full + "'");
        r.kv[full] = {val, lineno};
    }

    r.dbl("grid.q_max", cfg.sim.q_max);
    r.integer("grid.n", cfg.sim.n);
    r.dbl("grid.growth", cfg.sim.grid_growth);
    r.dbl("time.dt", cfg.sim.dt);
    r.dbl("time.t_end", cfg.sim.t_end);
    r.dbl("field.phi_in", cfg.sim.phi_in);
    r.dbl("field.psi_in", cfg.sim.psi_in);
    r.choice("field.run", cfg.field_run, {"driven", "free"});
    r.choice("density.profile", cfg.sim.f_in_name, {"exp", "gaussian"});
    std::string mode = mode_name(cfg.sim.mode);
    r.choice("solver.mode", mode, {"ultra", "relativistic"});
    cfg.sim.mode = mode == "ultra" ? RadialMode::ultra : RadialMode::relativistic;
    r.dbl("solver.theta", cfg.sim.theta);
    r.dbl("solver.sigma", cfg.sim.sigma);
    r.integer("diagnostics.every", cfg.sim.diagnostics_every);
    r.integer("diagnostics.snapshot_every", cfg.sim.snapshot_every);
    r.dbl("diagnostics.nonvanish_eps", cfg.sim.nonvanish_eps);
    r.i64("mc.n_paths", cfg.mc.n_paths);
    r.dbl("mc.dt", cfg.mc.dt);
    r.u64("mc.seed", cfg.mc.seed);
    r.boolean("mc.antithetic", cfg.mc.antithetic);
    r.dbl("mc.q", cfg.mc.q);
    r.dbl("mc.t", cfg.mc.t);
    r.integer("iterate.n_iter", cfg.iterate.n_iter);
    r.dbl("iterate.T", cfg.iterate.T);
    r.list("ultra.times", cfg.ultra.times);
    r.dbl("ultra.q_min", cfg.ultra.q_min);
    r.dbl("ultra.q_max", cfg.ultra.q_max);
    r.integer("ultra.n_q", cfg.ultra.n_q);

    cfg.sim.validate();
    validate_aux(cfg);
    finalize(cfg);
    return cfg;
}

RunConfig parse_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

void emit_csv(const Trajectory& traj, const std::string& dir)
{
    const std::string dpath = dir + "/diagnostics.csv";
    std::ofstream d(dpath);
    if (!d)
        throw std::runtime_error("emit_csv: cannot open " + dpath);
    d << "t,mass,l2,first_moment,energy,energy_residual,nonvanish_measure,phi,phidot\n";
    for (const auto& r : traj.diagnostics)
        d << format_double(r.t) << ',' << format_double(r.mass) << ','
          << format_double(r.l2) << ',' << format_double(r.first_abs_moment) << ','
          << format_double(r.energy) << ',' << format_double(r.energy_residual) << ','
          << format_double(r.nonvanish) << ',' << format_double(r.phi) << ','
          << format_double(r.phidot) << '\n';
    d.close();
    if (!d)
        throw std::runtime_error("emit_csv: write failed on " + dpath);

    const std::string ppath = dir + "/profiles.csv";
    std::ofstream p(ppath);
    if (!p)
        throw std::runtime_error("emit_csv: cannot open " + ppath);
    p << "t,q,f\n";
    for (const auto& snap : traj.density_snapshots)
        for (int j = 0; j < traj.grid.n; ++j)
            p << format_double(snap.t) << ',' << format_double(traj.grid.centers[j]) << ','
              << format_double(snap.values[j]) << '\n';
    p.close();
    if (!p)
        throw std::runtime_error("emit_csv: write failed on " + ppath);
}

std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_diagnostics_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) ||
        trim(line) != "t,mass,l2,first_moment,energy,energy_residual,nonvanish_measure,phi,phidot")
        throw std::runtime_error("read_diagnostics_csv: bad header in " + path);
    std::vector<DiagnosticsRecord> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        std::stringstream ss(line);
        std::string cell;
        double v[9];
        for (int i = 0; i < 9; ++i) {
            if (!std::getline(ss, cell, ','))
                throw std::runtime_error("read_diagnostics_csv: short row at " + path + ":" +
                                         std::to_string(lineno));
            const char* s = cell.c_str();
            char* end = nullptr;
            v[i] = std::strtod(s, &end);
            if (end != s + cell.size())
                throw std::runtime_error("read_diagnostics_csv: bad number at " + path + ":" +
                                         std::to_string(lineno));
        }
        DiagnosticsRecord r;
        r.t = v[0];
        r.mass = v[1];
        r.l2 = v[2];
        r.first_abs_moment = v[3];
        r.energy = v[4];
        r.energy_residual = v[5];
        r.nonvanish = v[6];
        r.phi = v[7];
        r.phidot = v[8];
        out.push_back(r);
    }
    return out;
}

std::string timestamp_now()
{
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void write_manifest(const std::string& dir, const RunConfig& cfg,
                    const std::vector<std::string>& output_files,
                    const std::string& started_at, const std::string& finished_at)
{
    nlohmann::json j;
    j["config_digest"] = cfg.digest;
    j["artifact_version"] = kArtifactVersion;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["output_files"] = output_files;
    const std::string path = dir + "/manifest.json";
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_manifest: cannot open " + path);
    out << j.dump(2) << '\n';
}

namespace {

void set_threads(int n)
{
#ifdef _OPENMP
    if (n > 0)
        omp_set_num_threads(n);
#else
    (void)n;
#endif
}

double interp_density(const RadialGrid& grid, const std::vector<double>& v, double q)
{
    if (q <= grid.centers.front())
        return v.front();
    if (q >= grid.centers.back())
        return v.back();
    int lo = 0, hi = grid.n - 1;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (grid.centers[mid] <= q ? lo : hi) = mid;
    }
    const double w = (q - grid.centers[lo]) / (grid.centers[hi] - grid.centers[lo]);
    return (1 - w) * v[lo] + w * v[hi];
}

int cmd_simulate(const RunConfig& cfg, const std::string& out)
{
    const std::string started = timestamp_now();
    const Trajectory traj = run_coupled(cfg.sim);
    emit_csv(traj, out);
    write_manifest(out, cfg, {"diagnostics.csv", "profiles.csv"}, started, timestamp_now());

    const auto& last = traj.diagnostics.back();
    std::cout << "config digest      " << cfg.digest << "\n"
              << "steps              " << traj.field.states.size() - 1 << "\n"
              << "final t            " << format_double(last.t) << "\n"
              << "mass drift (rel)   "
              << format_double(std::abs(last.mass - traj.mass0) / traj.mass0) << "\n"
              << "energy residual    " << format_double(energy_identity_residual(traj))
              << (cfg.sim.mode == RadialMode::ultra
                      ? "  (identity targets the relativistic operator)\n"
                      : "\n")
              << "phi(final)         " << format_double(last.phi) << "\n"
              << "phidot(final)      " << format_double(last.phidot) << "\n"
              << "tau(final)         " << format_double(traj.field.back().tau) << "\n"
              << "outputs in         " << out << "\n";
    return 0;
}

int cmd_iterate(const RunConfig& cfg, const std::string& out)
{
    const std::string started = timestamp_now();
    const FixedPointResult res =
        run_fixed_point(cfg.sim, cfg.iterate.n_iter, cfg.iterate.T);

    const std::string ipath = out + "/iterates.csv";
    std::ofstream f(ipath);
    if (!f)
        throw std::runtime_error("cannot open " + ipath);
    f << "iter,phi_diff,f_diff\n";
    for (std::size_t i = 0; i < res.phi_diffs.size(); ++i)
        f << i + 1 << ',' << format_double(res.phi_diffs[i]) << ','
          << format_double(res.f_diffs[i]) << '\n';
    f.close();

    emit_csv(res.iterates.back(), out);
    write_manifest(out, cfg, {"iterates.csv", "diagnostics.csv", "profiles.csv"}, started,
                   timestamp_now());

    std::cout << "config digest  " << cfg.digest << "\n";
    for (std::size_t i = 0; i < res.phi_diffs.size(); ++i)
        std::cout << "iterate " << i + 1 << "  sup|dphi| = " << format_double(res.phi_diffs[i])
                  << "  L2|df(T)| = " << format_double(res.f_diffs[i]) << "\n";
    const std::size_t k = res.phi_diffs.size();
    if (k >= 2 && res.phi_diffs[k - 1] > 1e-12 &&
        res.phi_diffs[k - 1] > 0.5 * res.phi_diffs[k - 2])
        std::cout << "note: successive differences stagnating above tolerance\n";
    std::cout << "outputs in     " << out << "\n";
    return 0;
}

int cmd_ultra_exact(const RunConfig& cfg, const std::string& out)
{
    const std::string started = timestamp_now();
    const RadialProfile g_in = cfg.sim.f_in;
    const std::string upath = out + "/ultra.csv";
    std::ofstream f(upath);
    if (!f)
        throw std::runtime_error("cannot open " + upath);
    f << "t,q,f\n";
    for (double t : cfg.ultra.times) {
        double peak = 0;
        for (int i = 0; i < cfg.ultra.n_q; ++i) {
            const double q = cfg.ultra.q_min *
                             std::pow(cfg.ultra.q_max / cfg.ultra.q_min,
                                      double(i) / (cfg.ultra.n_q - 1));
            const double val = ultra_solution(g_in, t, q);
            peak = std::max(peak, val);
            f << format_double(t) << ',' << format_double(q) << ',' << format_double(val)
              << '\n';
        }
        std::cout << "t = " << format_double(t) << "  max f = " << format_double(peak)
                  << "\n";
    }
    f.close();
    if (!f)
        throw std::runtime_error("write failed on " + upath);
    write_manifest(out, cfg, {"ultra.csv"}, started, timestamp_now());
    std::cout << "outputs in " << out << "\n";
    return 0;
}

int cmd_mc(const RunConfig& cfg, const std::string& out)
{
    const std::string started = timestamp_now();

    FieldTrajectory frozen;
    frozen.dt = cfg.mc.t;
    const double e2 = std::exp(2 * cfg.sim.phi_in);
    frozen.states.push_back({0, cfg.sim.phi_in, cfg.sim.psi_in, 0});
    frozen.states.push_back({cfg.mc.t, cfg.sim.phi_in, cfg.sim.psi_in, e2 * cfg.mc.t});
    frozen.sources = {0, 0};

    PathConfig pc;
    pc.n_paths = cfg.mc.n_paths;
    pc.dt = cfg.mc.dt;
    pc.seed = cfg.mc.seed;
    pc.antithetic = cfg.mc.antithetic;
    const Vec3 p0{cfg.mc.q, 0, 0};
    const McEstimate est =
        feynman_kac_estimate(cfg.sim.f_in.eval, p0, cfg.mc.t, frozen, pc, cfg.sim.mode);

    const RadialGrid grid = cfg.sim.grid_growth == 1.0
                                ? RadialGrid::uniform(cfg.sim.q_max, cfg.sim.n)
                                : RadialGrid::stretched(cfg.sim.q_max, cfg.sim.n,
                                                        cfg.sim.grid_growth);
    const DensityState f0 = sample_profile(grid, cfg.sim.f_in.eval);
    const DensityState fT =
        evolve_fixed_field(f0, FieldValue::make(cfg.sim.phi_in), grid, cfg.mc.t, cfg.sim.dt,
                           cfg.sim.theta, cfg.sim.mode);
    const double grid_val = interp_density(grid, fT.values, cfg.mc.q);

    const std::string mpath = out + "/mc.csv";
    std::ofstream f(mpath);
    if (!f)
        throw std::runtime_error("cannot open " + mpath);
    f << "q,t,mean,std_error,n_effective,grid_value\n";
    f << format_double(cfg.mc.q) << ',' << format_double(cfg.mc.t) << ','
      << format_double(est.mean) << ',' << format_double(est.std_error) << ','
      << est.n_effective << ',' << format_double(grid_val) << '\n';
    f.close();
    write_manifest(out, cfg, {"mc.csv"}, started, timestamp_now());

    const double gap = std::abs(est.mean - grid_val);
    std::cout << "config digest   " << cfg.digest << "\n"
              << "point           q = " << format_double(cfg.mc.q)
              << ", t = " << format_double(cfg.mc.t) << "\n"
              << "mc estimate     " << format_double(est.mean) << " +/- "
              << format_double(est.std_error) << "  (n = " << est.n_effective << ")\n"
              << "grid solution   " << format_double(grid_val) << "\n"
              << "gap / stderr    "
              << format_double(est.std_error > 0 ? gap / est.std_error : 0) << "\n"
              << "outputs in      " << out << "\n";
    return 0;
}

int cmd_field(const RunConfig& cfg, const std::string& out)
{
    const std::string started = timestamp_now();
    const RadialGrid grid = cfg.sim.grid_growth == 1.0
                                ? RadialGrid::uniform(cfg.sim.q_max, cfg.sim.n)
                                : RadialGrid::stretched(cfg.sim.q_max, cfg.sim.n,
                                                        cfg.sim.grid_growth);
    const DensityState f0 = sample_profile(grid, cfg.sim.f_in.eval);
    const bool driven = cfg.field_run == "driven";
    const auto src = [&](double, double ph) {
        return driven ? field_source(FieldValue::make(ph), f0, grid) : 0.0;
    };
    const FieldTrajectory traj =
        integrate_field(cfg.sim.phi_in, cfg.sim.psi_in, src, cfg.sim.t_end, cfg.sim.dt);

    const std::string fpath = out + "/field.csv";
    std::ofstream f(fpath);
    if (!f)
        throw std::runtime_error("cannot open " + fpath);
    f << "t,phi,phidot,tau,source\n";
    for (std::size_t i = 0; i < traj.states.size(); ++i)
        f << format_double(traj.states[i].t) << ',' << format_double(traj.states[i].phi)
          << ',' << format_double(traj.states[i].phidot) << ','
          << format_double(traj.states[i].tau) << ',' << format_double(traj.sources[i])
          << '\n';
    f.close();
    write_manifest(out, cfg, {"field.csv"}, started, timestamp_now());

    std::cout << "config digest  " << cfg.digest << "\n"
              << "kind           " << cfg.field_run << "\n"
              << "phi(final)     " << format_double(traj.back().phi) << "\n"
              << "phidot(final)  " << format_double(traj.back().phidot) << "\n"
              << "tau(final)     " << format_double(traj.back().tau) << "\n";
    if (driven) {
        const double mass = moments(f0, grid).mass;
        const double E0 = energy(f0, grid, traj.states.front());
        const FieldBoundsReport rep = check_field_bounds(traj, mass, E0);
        std::cout << "field bounds   " << (rep.ok ? "ok" : "violated") << "\n";
        if (rep.phidot_crossed_zero)
            std::cout << "phidot crosses zero at t0 = " << format_double(rep.t0) << "\n";
    }
    std::cout << "outputs in     " << out << "\n";
    return 0;
}

struct CheckLine {
    bool ok = true;
    void report(bool pass, const std::string& name, const std::string& detail)
    {
        std::cout << (pass ? "ok    " : "FAIL  ") << name
                  << (detail.empty() ? "" : "  (" + detail + ")") << "\n";
        ok = ok && pass;
    }
};

int cmd_verify(const RunConfig& cfg)
{
    CheckLine sheet;

    // Geometry sweep: closed-form bounds and the noise factorization.
    for (const auto& b : certify_bounds(10000, 42))
        sheet.report(b.ok, "geometry." + b.name,
                     "observed " + format_double(b.observed) + " vs limit " +
                         format_double(b.limit));

    // Bessel recurrence on scaled functions, central differences.
    {
        double worst = 0;
        for (int i = 0; i < 50; ++i) {
            const double x = 0.05 * std::pow(60.0 / 0.05, i / 49.0);
            const double h = 1e-5 * std::max(1.0, x);
            const double fd = (bessel_i_scaled(BesselOrder::i2, x + h) -
                               bessel_i_scaled(BesselOrder::i2, x - h)) /
                              (2 * h);
            const double rhs = bessel_i_scaled(BesselOrder::i1, x) -
                               (1 + 2 / x) * bessel_i_scaled(BesselOrder::i2, x);
            worst = std::max(worst, std::abs(fd - rhs));
        }
        sheet.report(worst <= 1e-9, "bessel.recurrence",
                     "max |FD - identity| = " + format_double(worst));
    }

    // Kernel mass: integral of H(tau,q,z) q dq recovers z.
    {
        double worst = 0;
        for (double tau : {0.1, 0.3, 1.0, 3.0, 10.0})
            for (double z : {0.2, 1.0, 5.0, 20.0}) {
                const double top = (std::sqrt(z) + 12 * std::sqrt(tau)) *
                                   (std::sqrt(z) + 12 * std::sqrt(tau));
                const auto r = integrate_adaptive(
                    [tau, z](double q) { return q * ultra_kernel(tau, q, z); }, 0, top,
                    1e-12, 1e-300);
                worst = std::max(worst, std::abs(r.value / z - 1));
            }
        sheet.report(worst <= 1e-8, "kernel.normalization",
                     "max rel defect = " + format_double(worst));
    }

    // Energy identity on a coarse relativistic run.
    {
        SimConfig quick;
        quick.mode = RadialMode::relativistic;
        quick.n = 500;
        quick.dt = 4e-3;
        quick.t_end = 2;
        const Trajectory traj = run_coupled(quick);
        const double rel = energy_identity_residual(traj) / traj.energy0;
        sheet.report(rel <= 1e-4, "energy.identity",
                     "relative residual = " + format_double(rel));
    }

    // Long-time profile: error / tau-tail ratio bounded across dyadic times.
    {
        FieldTrajectory half;
        half.dt = 1e-2;
        const int n = 1600;
        for (int k = 0; k <= n; ++k) {
            const double t = k * half.dt;
            half.states.push_back({t, -t / 2, -0.5, 1 - std::exp(-t)});
            half.sources.push_back(0);
        }
        const AsymptoticReport rep =
            verify_asymptotic_bound(cfg.sim.f_in, half, {2, 4, 8, 16});
        const double spread =
            rep.ratio_min > 0 ? rep.ratio_max / rep.ratio_min
                              : std::numeric_limits<double>::infinity();
        sheet.report(spread <= 10, "asymptotic.ratio",
                     "ratio in [" + format_double(rep.ratio_min) + ", " +
                         format_double(rep.ratio_max) + "]");
    }

    // Implicit scheme never expands L2 or L4.
    {
        RadialGrid grid = RadialGrid::uniform(40, 200);
        DensityState f = sample_profile(grid, [](double q) { return std::exp(-q); });
        const FieldValue fv = FieldValue::make(0);
        bool mono = true;
        double l2 = lq_norm(f, grid, 2), l4 = lq_norm(f, grid, 4);
        for (int k = 0; k < 100; ++k) {
            f = step_theta(f, fv, 1e-2, grid, 1.0, RadialMode::ultra);
            const double n2 = lq_norm(f, grid, 2), n4 = lq_norm(f, grid, 4);
            mono = mono && n2 <= l2 * (1 + 1e-12) && n4 <= l4 * (1 + 1e-12);
            l2 = n2;
            l4 = n4;
        }
        sheet.report(mono, "lgamma.nonexpansion", "L2 and L4 along 100 implicit steps");
    }

    std::cout << (sheet.ok ? "verification: PASS" : "verification: FAIL") << "\n";
    return sheet.ok ? 0 : 4;
}

}  // namespace

int run_cli(int argc, const char* const* argv)
{
    CLI::App app{"Spherically symmetric kinetic diffusion laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", preset, seed_str;
    int threads = 0;
    const auto add_common = [&](CLI::App* c) {
        c->add_option("--config", config_path, "configuration file (key = value)");
        c->add_option("--out", out_dir, "output directory (default: out)");
        c->add_option("--preset", preset, "named preset")
            ->check(CLI::IsMember({"reference"}));
        c->add_option("--seed", seed_str, "Monte Carlo seed override");
        c->add_option("--threads", threads, "worker thread count");
    };

    CLI::App* c_sim = app.add_subcommand("simulate", "self-consistent coupled run");
    CLI::App* c_it = app.add_subcommand("iterate", "constructive fixed-point iteration");
    CLI::App* c_ux = app.add_subcommand("ultra-exact", "exact ultra-relativistic profiles");
    CLI::App* c_mc = app.add_subcommand("mc", "Feynman-Kac point estimate");
    CLI::App* c_vf = app.add_subcommand("verify", "run the property suite");
    CLI::App* c_fd = app.add_subcommand("field", "field ODE runs (free or driven)");
    for (CLI::App* c : {c_sim, c_it, c_ux, c_mc, c_vf, c_fd})
        add_common(c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (!preset.empty() && !config_path.empty())
            throw std::invalid_argument("--preset and --config are mutually exclusive");
        RunConfig cfg =
            config_path.empty() ? default_config() : parse_config(config_path);
        if (!seed_str.empty()) {
            const char* s = seed_str.c_str();
            char* end = nullptr;
            const unsigned long long x = std::strtoull(s, &end, 10);
            if (seed_str[0] == '-' || end != s + seed_str.size())
                throw std::invalid_argument("--seed: expected an unsigned integer");
            cfg.mc.seed = x;
            cfg.resolved = serialize(cfg);
            cfg.digest = config_digest(cfg.resolved);
        }
        set_threads(threads);

        if (c_vf->parsed())
            return cmd_verify(cfg);

        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec)
            throw std::invalid_argument("--out: cannot create directory '" + out_dir +
                                        "': " + ec.message());
        if (c_sim->parsed())
            return cmd_simulate(cfg, out_dir);
        if (c_it->parsed())
            return cmd_iterate(cfg, out_dir);
        if (c_ux->parsed())
            return cmd_ultra_exact(cfg, out_dir);
        if (c_mc->parsed())
            return cmd_mc(cfg, out_dir);
        return cmd_field(cfg, out_dir);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace vnfp
