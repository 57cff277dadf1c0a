#include "plds/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace plds {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

const char* kind_name(SingKind k) {
    switch (k) {
        case SingKind::StableFocus: return "StableFocus";
        case SingKind::StableNode: return "StableNode";
        case SingKind::UnstableFocus: return "UnstableFocus";
        case SingKind::UnstableNode: return "UnstableNode";
        case SingKind::Saddle: return "Saddle";
        case SingKind::SewedFocusStable: return "SewedFocusStable";
        case SingKind::SewedFocusUnstable: return "SewedFocusUnstable";
        case SingKind::SewedCenter: return "SewedCenter";
        case SingKind::SewedSaddleNode: return "SewedSaddleNode";
        case SingKind::EquilibriumSegment: return "EquilibriumSegment";
    }
    return "?";
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigError, std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    cfg.raw = json_text;
    try {
        std::vector<Vec2> corners;
        for (const auto& c : j.at("corners"))
            corners.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
        cfg.curve = build_curve(corners, j.at("k1").get<double>(), j.at("k2").get<double>());
        cfg.params.alpha = j.at("alpha").get<double>();
        cfg.params.beta = j.at("beta").get<double>();
        if (j.contains("tol")) {
            const auto& t = j["tol"];
            if (t.contains("crossing")) cfg.tol.crossing = t["crossing"].get<double>();
            if (t.contains("fixedpoint")) cfg.tol.fixedpoint = t["fixedpoint"].get<double>();
            if (t.contains("center")) cfg.tol.center = t["center"].get<double>();
            if (t.contains("corner")) cfg.tol.corner = t["corner"].get<double>();
        }
        if (cfg.tol.crossing <= 0 || cfg.tol.fixedpoint <= 0 || cfg.tol.center <= 0 ||
            cfg.tol.corner <= 0)
            throw Error(ErrorKind::ConfigError, "tolerances must be positive");
        if (!(cfg.params.alpha > 0.0) || !(cfg.params.beta > 0.0))
            throw Error(ErrorKind::ConfigError, "alpha and beta must be positive");
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigError, std::string("config schema: ") + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, "cannot read config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void atomic_write(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::ConfigError, "cannot write: " + tmp);
        out << content;
        if (!out.good()) throw Error(ErrorKind::ConfigError, "short write: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error(ErrorKind::ConfigError, "cannot rename into place: " + path);
}

std::string map_csv(const std::vector<MapSample>& samples) {
    std::string out = "S0,S0_bar,deriv,branch\n";
    for (const auto& s : samples) {
        if (!s.ok) continue;
        out += fmt(s.s0) + "," + fmt(s.s0_bar) + "," + fmt(s.deriv) + "," +
               (s.branch == Branch::Xi ? "xi" : "psi") + "\n";
    }
    return out;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(tok);
    return out;
}

}  // namespace

std::vector<MapSample> parse_map_csv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line) || line != "S0,S0_bar,deriv,branch")
        throw Error(ErrorKind::ConfigError, "map CSV header mismatch");
    std::vector<MapSample> out;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() != 4) throw Error(ErrorKind::ConfigError, "map CSV row has wrong arity");
        MapSample s;
        s.ok = true;
        s.s0 = std::stod(f[0]);
        s.s0_bar = std::stod(f[1]);
        s.deriv = std::stod(f[2]);
        if (f[3] == "xi")
            s.branch = Branch::Xi;
        else if (f[3] == "psi")
            s.branch = Branch::Psi;
        else
            throw Error(ErrorKind::ConfigError, "map CSV branch token: " + f[3]);
        out.push_back(s);
    }
    return out;
}

std::string scan_csv(const BifurcationDiagram& diagram) {
    std::string out = "alpha,beta,n_singular,n_small,n_big,flags\n";
    for (const CellReport& c : diagram.cells) {
        std::string flags;
        for (CellFlag f : c.flags) {
            if (!flags.empty()) flags += ';';
            flags += flag_name(f);
        }
        out += fmt(c.alpha) + "," + fmt(c.beta) + "," + std::to_string(c.n_singular) + "," +
               std::to_string(c.n_small) + "," + std::to_string(c.n_big) + "," + flags + "\n";
    }
    return out;
}

std::vector<ScanRow> parse_scan_csv(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    if (!std::getline(ss, line) || line != "alpha,beta,n_singular,n_small,n_big,flags")
        throw Error(ErrorKind::ConfigError, "scan CSV header mismatch");
    std::vector<ScanRow> rows;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        auto f = split(line, ',');
        if (f.size() < 5 || f.size() > 6)
            throw Error(ErrorKind::ConfigError, "scan CSV row has wrong arity");
        ScanRow r;
        r.alpha = std::stod(f[0]);
        r.beta = std::stod(f[1]);
        r.n_singular = std::stoi(f[2]);
        r.n_small = std::stoi(f[3]);
        r.n_big = std::stoi(f[4]);
        if (f.size() == 6 && !f[5].empty()) r.flags = split(f[5], ';');
        rows.push_back(r);
    }
    return rows;
}

std::string verify_json(const VerifyReport& report) {
    json j;
    j["pass"] = report.pass;
    j["max_total"] = report.max_total;
    j["bound"] = report.bound;
    j["max_small"] = report.max_small;
    j["max_big"] = report.max_big;
    j["violations"] = json::array();
    for (const auto& v : report.violations)
        j["violations"].push_back({{"alpha", v.alpha},
                                   {"beta", v.beta},
                                   {"n_small", v.n_small},
                                   {"n_big", v.n_big},
                                   {"reason", v.reason}});
    return j.dump(2) + "\n";
}

VerifyReport verify_rows(const std::vector<ScanRow>& rows, int k) {
    BifurcationDiagram d;
    for (const ScanRow& r : rows) {
        CellReport c;
        c.alpha = r.alpha;
        c.beta = r.beta;
        c.n_singular = r.n_singular;
        c.n_small = r.n_small;
        c.n_big = r.n_big;
        d.cells.push_back(c);
    }
    return verify_bound(d, k);
}

std::string trajectory_csv(const SystemCache& sys, const SewnTrajectory& traj, double max_dt) {
    std::string out = "arc_index,region,t_entry,x,y\n";
    double t0 = 0.0;
    for (size_t i = 0; i < traj.arcs.size(); ++i) {
        const Arc& a = traj.arcs[i];
        const RegionFlow& rf = sys.flow(a.region);
        int n = std::max(1, static_cast<int>(std::ceil(a.tau / max_dt)));
        for (int s = 0; s <= n; ++s) {
            double t = a.tau * s / n;
            Vec2 p = rf.flow(a.entry, t);
            out += std::to_string(i) + "," + std::to_string(a.region) + "," + fmt(t0 + t) + "," +
                   fmt(p.x) + "," + fmt(p.y) + "\n";
        }
        t0 += a.tau;
    }
    return out;
}

std::string analyze_json(const RunConfig& cfg) {
    json j;
    j["alpha"] = cfg.params.alpha;
    j["beta"] = cfg.params.beta;
    j["k"] = cfg.curve.k;
    j["interesting"] = cfg.curve.interesting;

    auto sings = find_singular_points(cfg.curve, cfg.params, cfg.tol);
    j["singular_points"] = json::array();
    for (const auto& s : sings) {
        json p;
        p["x"] = s.location.x;
        p["y"] = s.location.y;
        p["kind"] = kind_name(s.kind);
        p["region"] = s.region_index;
        if (s.corner_index > 0) p["corner"] = s.corner_index;
        if (s.eigen.type == EigenData::Type::ComplexPair) {
            p["sigma"] = s.eigen.sigma;
            p["omega"] = s.eigen.omega;
        } else {
            p["lambda1"] = s.eigen.l1;
            p["lambda2"] = s.eigen.l2;
        }
        if (s.segment_extent)
            p["segment_extent"] = {s.segment_extent->first, s.segment_extent->second};
        j["singular_points"].push_back(p);
    }

    try {
        j["alpha_star"] = alpha_star(cfg.curve.k1, cfg.curve.k2);
    } catch (const Error& e) {
        j["alpha_star"] = nullptr;
        j["alpha_star_error"] = e.what();
    }
    j["alpha_star_printed"] = alpha_star_printed(cfg.curve.k1, cfg.curve.k2);

    DiscriminantCurve disc = discriminant_curve(cfg.curve);
    j["on_discriminant"] = disc.on_curve(cfg.params);
    j["expected_singular_count"] = disc.expected_count(cfg.curve, cfg.params);

    CellReport cell = analyze_cell(cfg.curve, cfg.params);
    j["n_small"] = cell.n_small;
    j["n_big"] = cell.n_big;
    j["flags"] = json::array();
    for (CellFlag f : cell.flags) j["flags"].push_back(flag_name(f));
    j["cycles"] = json::array();
    for (const auto& c : cell.cycles) {
        json cj;
        cj["section_corner"] = c.section.corner_index;
        cj["s_fixed"] = c.s_fixed;
        cj["stability"] = c.stability == Stability::Stable
                              ? "stable"
                              : (c.stability == Stability::Unstable ? "unstable" : "semi-stable");
        cj["small"] = c.small;
        cj["period"] = c.period;
        cj["deriv"] = c.deriv;
        cj["regions"] = c.regions_spanned;
        j["cycles"].push_back(cj);
    }
    return j.dump(2) + "\n";
}

namespace {

struct Frame {
    double x_lo, x_hi, y_lo, y_hi;
    int w, h;
    static constexpr double margin = 40.0;

    double px(double x) const {
        return margin + (x - x_lo) / (x_hi - x_lo) * (w - 2 * margin);
    }
    double py(double y) const {
        return h - margin - (y - y_lo) / (y_hi - y_lo) * (h - 2 * margin);
    }
    bool contains(Vec2 p) const {
        return p.x >= x_lo && p.x <= x_hi && p.y >= y_lo && p.y <= y_hi;
    }
};

void polyline(std::string& svg, const Frame& fr, const std::vector<Vec2>& pts,
              const char* style) {
    if (pts.size() < 2) return;
    svg += "<polyline fill=\"none\" ";
    svg += style;
    svg += " points=\"";
    for (const Vec2& p : pts) svg += fmt3(fr.px(p.x)) + "," + fmt3(fr.py(p.y)) + " ";
    svg += "\"/>\n";
}

std::vector<Vec2> sample_traj(const SystemCache& sys, const SewnTrajectory& traj,
                              const Frame& fr) {
    std::vector<Vec2> pts;
    for (const Arc& a : traj.arcs) {
        const RegionFlow& rf = sys.flow(a.region);
        int n = std::max(2, static_cast<int>(std::ceil(a.tau / 0.02)));
        for (int s = 0; s <= n; ++s) {
            Vec2 p = rf.flow(a.entry, a.tau * s / n);
            if (fr.contains(p)) pts.push_back(p);
        }
    }
    return pts;
}

}  // namespace

std::string render_svg(const RunConfig& cfg, const PortraitOptions& opts) {
    const PwlCurve& curve = cfg.curve;
    SystemCache sys(curve, cfg.params, cfg.tol);
    auto sings = find_singular_points(curve, cfg.params, cfg.tol);

    double x_lo = curve.corners.front().x, x_hi = curve.corners.back().x;
    double y_lo = curve.corners.front().y, y_hi = y_lo;
    for (const Vec2& c : curve.corners) {
        y_lo = std::min(y_lo, c.y);
        y_hi = std::max(y_hi, c.y);
    }
    for (const auto& s : sings) {
        x_lo = std::min(x_lo, s.location.x);
        x_hi = std::max(x_hi, s.location.x);
        y_lo = std::min(y_lo, s.location.y);
        y_hi = std::max(y_hi, s.location.y);
    }
    double dx = std::max(1.0, x_hi - x_lo), dy = std::max(1.0, y_hi - y_lo);
    Frame fr{x_lo - 0.8 * dx, x_hi + 0.8 * dx, y_lo - 0.8 * dy, y_hi + 0.8 * dy, opts.width,
             opts.height};

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      std::to_string(fr.w) + "\" height=\"" + std::to_string(fr.h) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // isoclines: y = phi(x) and y = beta - alpha x
    {
        std::vector<Vec2> phi_pts, line_pts;
        for (int i = 0; i <= 200; ++i) {
            double x = fr.x_lo + (fr.x_hi - fr.x_lo) * i / 200.0;
            phi_pts.push_back({x, curve.phi(x)});
            line_pts.push_back({x, cfg.params.beta - cfg.params.alpha * x});
        }
        polyline(svg, fr, phi_pts, "stroke=\"#888888\" stroke-width=\"1.5\"");
        polyline(svg, fr, line_pts, "stroke=\"#bbbbbb\" stroke-width=\"1\"");
    }

    std::vector<Vec2> seeds = opts.seeds;
    if (seeds.empty()) {
        double r = 0.2 * std::min(dx, dy);
        for (const auto& s : sings)
            for (int i = 0; i < opts.seed_density; ++i) {
                double th = 2.0 * M_PI * i / opts.seed_density + 0.3;
                seeds.push_back({s.location.x + r * std::cos(th),
                                 s.location.y + r * std::sin(th)});
            }
        if (seeds.empty()) seeds.push_back({0.5 * (x_lo + x_hi), 0.5 * (y_lo + y_hi)});
    }

    auto trajs = phase_portrait(sys, seeds, opts.max_crossings);
    size_t failed = 0;
    for (const auto& t : trajs) {
        if (t.arcs.empty()) {
            ++failed;
            continue;
        }
        polyline(svg, fr, sample_traj(sys, t, fr), "stroke=\"#2060c0\" stroke-width=\"1\"");
    }
    if (failed * 10 > trajs.size())
        throw Error(ErrorKind::ToleranceExhausted, "more than 10% of trajectories failed");

    // detected cycles, drawn over the trajectories
    CellReport cell = analyze_cell(curve, cfg.params);
    for (const auto& c : cell.cycles) {
        Vec2 start = section_point(curve, c.section, c.s_fixed);
        try {
            SectionHit hit = sew_until_section(sys, start, c.section, opts.max_crossings);
            if (hit.hit)
                polyline(svg, fr, sample_traj(sys, hit.traj, fr),
                         c.stability == Stability::Stable
                             ? "stroke=\"#109030\" stroke-width=\"2.5\""
                             : "stroke=\"#c03030\" stroke-width=\"2.5\" stroke-dasharray=\"6,3\"");
        } catch (const Error&) {
        }
    }

    for (const auto& s : sings) {
        svg += "<circle cx=\"" + fmt3(fr.px(s.location.x)) + "\" cy=\"" +
               fmt3(fr.py(s.location.y)) + "\" r=\"4\" fill=\"" +
               (s.is_saddle() ? "#c03030" : "#202020") + "\"><title>";
        svg += kind_name(s.kind);
        svg += "</title></circle>\n";
        if (s.segment_extent) {
            std::vector<Vec2> seg = {{s.segment_extent->first,
                                      curve.phi(s.segment_extent->first)},
                                     {s.segment_extent->second,
                                      curve.phi(s.segment_extent->second)}};
            polyline(svg, fr, seg, "stroke=\"#e08020\" stroke-width=\"3\"");
        }
    }

    svg += "</svg>\n";
    return svg;
}

}  // namespace plds
