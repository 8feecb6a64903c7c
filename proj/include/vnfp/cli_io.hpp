#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vnfp/coupled.hpp"

namespace vnfp {

inline constexpr const char* kArtifactVersion = "1.0.0";

/// Feynman-Kac point-estimate settings ([mc] section).
struct McParams {
    std::int64_t n_paths = 200000;
    double dt = 1e-3;
    std::uint64_t seed = 1;
    bool antithetic = true;
    double q = 1.0;  // evaluation radius |p|
    double t = 0.2;  // evaluation time
};

/// Fixed-point iteration settings ([iterate] section).
struct IterateParams {
    int n_iter = 5;
    double T = 1.0;
};

/// Output grid for the exact ultra-relativistic profiles ([ultra] section).
struct UltraParams {
    std::vector<double> times{0.1, 0.2, 0.3, 0.4, 0.5};
    double q_min = 0.01;
    double q_max = 10.0;
    int n_q = 200;
};

/// Fully resolved configuration: typed values plus the canonical key=value
/// map they were resolved from. The digest is FNV-1a 64 over the sorted
/// canonical lines, so it is independent of key order in the source file and
/// identical for an empty file and one that spells out every default.
struct RunConfig {
    SimConfig sim;
    McParams mc;
    IterateParams iterate;
    UltraParams ultra;
    std::string field_run = "driven";  // "driven" (frozen initial density) or "free"
    std::map<std::string, std::string> resolved;
    std::string digest;
};

/// The reference preset: every key at its default.
RunConfig default_config();

/// Flat key = value format with [section] headers and # comments. Unknown or
/// duplicate keys and malformed lines raise std::invalid_argument with the
/// origin and line number; range violations name the offending key.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

std::string config_digest(const std::map<std::string, std::string>& resolved);

/// 17-significant-digit decimal form; strtod recovers the exact double.
std::string format_double(double x);

/// Writes dir/diagnostics.csv (one row per diagnostics record) and
/// dir/profiles.csv (t,q,f rows for every stored snapshot). I/O failures
/// raise std::runtime_error naming the path.
void emit_csv(const Trajectory& traj, const std::string& dir);

/// Parses a diagnostics.csv back into records (CSV fields only); verifies the
/// header. Round-trips emit_csv output bit-exactly.
std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::string& path);

std::string timestamp_now();

void write_manifest(const std::string& dir, const RunConfig& cfg,
                    const std::vector<std::string>& output_files,
                    const std::string& started_at, const std::string& finished_at);

/// Full command-line driver. Returns the process exit code: 0 success,
/// 2 configuration error, 3 numerical failure, 4 verification violation.
int run_cli(int argc, const char* const* argv);

}  // namespace vnfp
