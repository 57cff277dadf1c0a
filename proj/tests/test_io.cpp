#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "doctest.h"
#include "plds/io.hpp"

using namespace plds;

namespace {

const char* kRefJson = R"({"k1":1,"k2":2,"corners":[[1,2],[2,0]],"alpha":2.5,"beta":4.5})";

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing: happy path and overrides") {
    RunConfig cfg = parse_config(kRefJson);
    CHECK(cfg.curve.k == 1);
    CHECK(cfg.params.alpha == doctest::Approx(2.5));
    CHECK(cfg.params.beta == doctest::Approx(4.5));
    CHECK(cfg.tol.crossing == doctest::Approx(1e-12));

    RunConfig with_tol = parse_config(
        R"({"k1":1,"k2":2,"corners":[[1,2],[2,0]],"alpha":1,"beta":2.5,
            "tol":{"crossing":1e-10,"center":1e-5}})");
    CHECK(with_tol.tol.crossing == doctest::Approx(1e-10));
    CHECK(with_tol.tol.center == doctest::Approx(1e-5));
    CHECK(with_tol.tol.fixedpoint == doctest::Approx(1e-10));  // default kept
}

TEST_CASE("config parsing: malformed input") {
    auto expect_config_error = [](const char* text) {
        try {
            parse_config(text);
            FAIL_CHECK("expected ConfigError for: " << text);
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ConfigError);
        }
    };
    expect_config_error("{not json");
    expect_config_error(R"({"k1":1,"k2":2,"corners":[[1,2],[2,0]],"alpha":2.5})");  // no beta
    expect_config_error(R"({"k1":1,"k2":2,"corners":[[1,2],[2,0]],"alpha":-1,"beta":2})");
    expect_config_error(R"({"k1":1,"k2":2,"corners":"oops","alpha":1,"beta":2})");
    expect_config_error(
        R"({"k1":1,"k2":2,"corners":[[1,2],[2,0]],"alpha":1,"beta":2,"tol":{"crossing":-1}})");
}

TEST_CASE("map CSV round-trips") {
    auto sys = std::make_shared<const SystemCache>(parse_config(kRefJson).curve,
                                                   SystemParams{2.5, 4.5});
    ReturnMap rm(sys, {1, Section::Side::Below}, 64);
    rm.sample_range(0.01, 5.0, 20);
    std::string text = map_csv(rm.samples());
    CHECK(text.rfind("S0,S0_bar,deriv,branch", 0) == 0);

    auto parsed = parse_map_csv(text);
    size_t n_ok = 0;
    for (const auto& m : rm.samples()) n_ok += m.ok;
    REQUIRE(parsed.size() == n_ok);
    size_t j = 0;
    for (const auto& m : rm.samples()) {
        if (!m.ok) continue;
        CHECK(parsed[j].s0 == m.s0);
        CHECK(parsed[j].s0_bar == m.s0_bar);
        CHECK(parsed[j].deriv == m.deriv);
        CHECK(parsed[j].branch == m.branch);
        ++j;
    }
}

TEST_CASE("scan CSV round-trips and verify report stays consistent") {
    RunConfig cfg = parse_config(kRefJson);
    BifurcationDiagram d = scan_diagram(cfg.curve, 1.5, 3.5, 3.5, 5.5, 4, 3, {});
    std::string text = scan_csv(d);
    auto rows = parse_scan_csv(text);
    REQUIRE(rows.size() == d.cells.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].alpha == d.cells[i].alpha);
        CHECK(rows[i].beta == d.cells[i].beta);
        CHECK(rows[i].n_singular == d.cells[i].n_singular);
        CHECK(rows[i].n_small == d.cells[i].n_small);
        CHECK(rows[i].n_big == d.cells[i].n_big);
        CHECK(rows[i].flags.size() == d.cells[i].flags.size());
    }

    VerifyReport direct = verify_bound(d, cfg.curve.k);
    VerifyReport via_rows = verify_rows(rows, cfg.curve.k);
    CHECK(direct.pass == via_rows.pass);
    CHECK(direct.max_total == via_rows.max_total);

    std::string j = verify_json(direct);
    CHECK(j.find("\"pass\"") != std::string::npos);
    CHECK(j.find("\"max_total\"") != std::string::npos);
}

TEST_CASE("forged scan rows are reported as violations") {
    std::vector<ScanRow> rows{{2.5, 4.5, 3, 99, 0, {}}};
    VerifyReport r = verify_rows(rows, 1);
    CHECK_FALSE(r.pass);
    REQUIRE(!r.violations.empty());
    CHECK(r.violations[0].alpha == doctest::Approx(2.5));
    std::string j = verify_json(r);
    CHECK(j.find("\"violations\"") != std::string::npos);
    CHECK(j.find("99") != std::string::npos);
}

TEST_CASE("atomic write replaces content completely") {
    std::string path = "plds_test_atomic.tmp";
    atomic_write(path, "first version, long content here\n");
    atomic_write(path, "second\n");
    CHECK(slurp(path) == "second\n");
    std::remove(path.c_str());
    CHECK_THROWS_AS(atomic_write("no_such_dir/x/y.txt", "z"), Error);
}

TEST_CASE("trajectory CSV is dense enough and well-formed") {
    RunConfig cfg = parse_config(kRefJson);
    SystemCache sys(cfg.curve, cfg.params);
    SewnTrajectory traj = sew_trajectory(sys, {1.0, 1.0}, 6);
    std::string text = trajectory_csv(sys, traj);
    CHECK(text.rfind("arc_index,region,t_entry,x,y", 0) == 0);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    double prev_t = -1.0;
    int rows = 0;
    while (std::getline(in, line)) {
        int arc, region;
        double t, x, y;
        REQUIRE(std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf", &arc, &region, &t, &x, &y) == 5);
        if (rows > 0) {
            CHECK(t >= prev_t);
            CHECK(t - prev_t <= 0.01 + 1e-12);
        }
        prev_t = t;
        ++rows;
    }
    CHECK(rows > 10);
}

TEST_CASE("analyze report carries the headline quantities") {
    RunConfig cfg = parse_config(R"({"k1":1,"k2":2,"corners":[[1,2],[2,0]],"alpha":3,"beta":5})");
    std::string j = analyze_json(cfg);
    CHECK(j.find("\"singular_points\"") != std::string::npos);
    CHECK(j.find("\"alpha_star\"") != std::string::npos);
    CHECK(j.find("SewedCenter") != std::string::npos);
}

TEST_CASE("portrait renders a well-formed SVG") {
    RunConfig cfg = parse_config(kRefJson);
    PortraitOptions opts;
    std::string svg = render_svg(cfg, opts);
    CHECK(svg.rfind("<svg", 0) != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    // Auto-seeding must produce at least one orbit polyline.
    CHECK(svg.find("<polyline") != std::string::npos);
    // Deterministic output for fixed inputs.
    CHECK(render_svg(cfg, opts) == svg);
}
