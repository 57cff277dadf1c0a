#pragma once

#include <string>
#include <vector>

#include "plds/bifurcation.hpp"

namespace plds {

// System definition plus optional tolerance overrides, loaded from JSON:
// {"k1":…, "k2":…, "corners":[[x,y],…], "alpha":…, "beta":…, "tol":{…}}.
struct RunConfig {
    PwlCurve curve;
    SystemParams params;
    Tolerances tol;
    std::string raw;  // original JSON text, for command-specific sections
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

// write-temp-then-rename; throws ConfigError on filesystem failure.
void atomic_write(const std::string& path, const std::string& content);

std::string map_csv(const std::vector<MapSample>& samples);
std::vector<MapSample> parse_map_csv(const std::string& text);

struct ScanRow {
    double alpha = 0.0, beta = 0.0;
    int n_singular = 0, n_small = 0, n_big = 0;
    std::vector<std::string> flags;
};

std::string scan_csv(const BifurcationDiagram& diagram);
std::vector<ScanRow> parse_scan_csv(const std::string& text);

std::string verify_json(const VerifyReport& report);
VerifyReport verify_rows(const std::vector<ScanRow>& rows, int k);

std::string trajectory_csv(const SystemCache& sys, const SewnTrajectory& traj,
                           double max_dt = 0.01);

std::string analyze_json(const RunConfig& cfg);

struct PortraitOptions {
    std::vector<Vec2> seeds;  // empty: auto-seed around singular points
    int seed_density = 4;
    int max_crossings = 64;
    int width = 800, height = 600;
};

std::string render_svg(const RunConfig& cfg, const PortraitOptions& opts);

}  // namespace plds
