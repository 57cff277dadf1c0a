#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "plds/io.hpp"

using nlohmann::json;
using namespace plds;

namespace {

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content;
    else
        atomic_write(out_path, content);
}

double scale_of(const PwlCurve& curve) {
    double s = 1.0;
    for (const Vec2& c : curve.corners) s = std::max({s, std::fabs(c.x), std::fabs(c.y)});
    return s;
}

int run_map(const RunConfig& cfg, const json& section, const std::string& out_path) {
    Section sec;
    sec.corner_index = section.value("corner", 1);
    sec.side = section.value("side", std::string("below")) == "above" ? Section::Side::Above
                                                                     : Section::Side::Below;
    if (sec.corner_index < 1 || sec.corner_index > 2 * cfg.curve.k)
        throw Error(ErrorKind::ConfigError, "map corner index out of range");
    double scale = scale_of(cfg.curve);
    double s_lo = section.value("s_lo", 1e-3 * scale);
    double s_hi = section.value("s_hi", 10.0 * scale);
    int n = section.value("n", 50);
    auto sys = std::make_shared<const SystemCache>(cfg.curve, cfg.params, cfg.tol);
    ReturnMap rm = build_return_map(sys, sec, s_lo, s_hi, n);
    emit(out_path, map_csv(rm.samples()));
    return 0;
}

int run_scan(const RunConfig& cfg, const json& section, const std::string& out_path,
             int threads) {
    if (!section.contains("alpha") || !section.contains("beta"))
        throw Error(ErrorKind::ConfigError, "scan needs alpha/beta ranges in config");
    auto ar = section["alpha"], br = section["beta"];
    ScanOptions opts;
    opts.threads = threads;
    opts.samples_per_section = section.value("samples_per_section", opts.samples_per_section);
    opts.max_crossings = section.value("max_crossings", opts.max_crossings);
    BifurcationDiagram d = scan_diagram(
        cfg.curve, ar.at(0).get<double>(), ar.at(1).get<double>(), br.at(0).get<double>(),
        br.at(1).get<double>(), section.value("na", 25), section.value("nb", 25), opts);
    emit(out_path, scan_csv(d));
    VerifyReport rep = verify_bound(d, cfg.curve.k);
    std::cout << verify_json(rep);
    return rep.pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"piecewise linear Lienard system analyzer"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_path, in_path;
    int threads = 0, seed_density = 4;
    app.add_option("--config", config_path, "system definition JSON")->required();
    app.add_option("--out", out_path, "output file (default: stdout)");
    app.add_option("--threads", threads, "worker threads (0: all cores)")
        ->envname("PLDS_THREADS");
    app.add_option("--seed-density", seed_density, "portrait seeds per singular point");

    auto* c_analyze = app.add_subcommand("analyze", "singular points, alpha*, cycles");
    auto* c_portrait = app.add_subcommand("portrait", "phase portrait SVG");
    auto* c_map = app.add_subcommand("map", "return-map samples CSV");
    auto* c_scan = app.add_subcommand("scan", "parameter-plane scan CSV + verify JSON");
    auto* c_verify = app.add_subcommand("verify", "check a scan CSV against the cycle bound");
    c_verify->add_option("--in", in_path, "scan CSV to verify")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg = load_config(config_path);
        json raw = json::parse(cfg.raw);
        if (c_analyze->parsed()) {
            emit(out_path, analyze_json(cfg));
        } else if (c_portrait->parsed()) {
            PortraitOptions opts;
            opts.seed_density = seed_density;
            if (raw.contains("portrait") && raw["portrait"].contains("seeds"))
                for (const auto& s : raw["portrait"]["seeds"])
                    opts.seeds.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
            emit(out_path.empty() ? "portrait.svg" : out_path, render_svg(cfg, opts));
        } else if (c_map->parsed()) {
            return run_map(cfg, raw.value("map", json::object()), out_path);
        } else if (c_scan->parsed()) {
            return run_scan(cfg, raw.value("scan", json::object()), out_path, threads);
        } else if (c_verify->parsed()) {
            std::ifstream in(in_path);
            if (!in) throw Error(ErrorKind::ConfigError, "cannot read scan CSV: " + in_path);
            std::stringstream ss;
            ss << in.rdbuf();
            VerifyReport rep = verify_rows(parse_scan_csv(ss.str()), cfg.curve.k);
            emit(out_path, verify_json(rep));
            return rep.pass ? 0 : 4;
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::ConfigError || e.kind() == ErrorKind::BadRange ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
