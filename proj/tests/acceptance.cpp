// Acceptance gate: one line per criterion, exit 0 only when all pass.
//
// Each criterion exercises the library end to end against independently
// derived anchors (closed forms, finite differences, a fixed-step
// Runge-Kutta oracle).  Timed criteria report their wall-clock cost.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "plds/bifurcation.hpp"
#include "plds/return_map.hpp"

using namespace plds;
using clk = std::chrono::steady_clock;

namespace {

PwlCurve ref_k1() { return build_curve({{1, 2}, {2, 0}}, 1, 2); }
PwlCurve ref_k2() { return build_curve({{1, 2}, {2, 0}, {3, 1}, {4, -1}}, 1, 2); }

int n_pass = 0, n_fail = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", idx, name, detail.c_str());
    std::fflush(stdout);
    (ok ? n_pass : n_fail)++;
}

double seconds_since(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

// --- 1: center value and identity return map ------------------------------

void criterion_center_identity() {
    auto t0 = clk::now();
    bool ok = true;
    std::string detail;

    double a_star = alpha_star(1.0, 2.0);
    if (std::fabs(a_star - 3.0) > 1e-9) ok = false;

    auto sys = std::make_shared<const SystemCache>(ref_k1(), SystemParams{3.0, 5.0});
    ReturnMap rm(sys, {1, Section::Side::Below}, 64);
    // Closed orbits fill the small-circuit annulus; sample inside it.
    rm.sample_range(1e-3, 1.8, 50);
    int checked = 0;
    double worst = 0.0;
    for (const MapSample& m : rm.samples()) {
        if (!m.ok) { ok = false; continue; }
        ++checked;
        double err = std::fabs(m.s0_bar - m.s0) / (1.0 + m.s0);
        worst = std::max(worst, err);
        if (err > 1e-6) ok = false;
    }
    if (checked != 50) ok = false;
    double dt = seconds_since(t0);
    if (dt >= 5.0) ok = false;
    detail = "alpha_star=" + std::to_string(a_star) + ", max |f(S)-S|/(1+S)=" +
             std::to_string(worst) + " over " + std::to_string(checked) + " samples, " +
             std::to_string(dt) + " s";
    report(1, "sewed-center identity", ok, detail);
}

// --- 2: segment-regime fixed point ----------------------------------------

void criterion_segment_fixed_point() {
    auto t0 = clk::now();
    bool ok = true;

    auto sys = std::make_shared<const SystemCache>(ref_k1(), SystemParams{2.0, 4.0});
    const RegionFlow& r1 = sys->flow(1);
    double sigma = r1.eigen.sigma, omega = r1.eigen.omega;
    // Closed form with the region's actual rotation rate (sqrt(2) here; the
    // often-quoted sqrt(3) belongs to the center value alpha = 3, not alpha = 2).
    double s_closed = equilibrium_segment_fixed_point(sigma, omega, 1.0, 2.0);
    double s_iter = 0.3;
    for (int i = 0; i < 400; ++i) s_iter = equilibrium_segment_map(s_iter, sigma, omega, 1.0, 2.0);

    ReturnMap rm(sys, {1, Section::Side::Below}, 64);
    double s_sim = 0.8;
    for (int i = 0; i < 200; ++i) {
        MapSample m = rm.eval(s_sim);
        if (!m.ok) { ok = false; break; }
        s_sim = m.s0_bar;
    }
    if (std::fabs(s_iter - s_closed) > 1e-9 * s_closed) ok = false;
    if (std::fabs(s_sim - s_closed) > 1e-6 * s_closed) ok = false;
    double dt = seconds_since(t0);
    if (dt >= 5.0) ok = false;
    char buf[160];
    std::snprintf(buf, sizeof buf, "sigma=%.3f omega=%.6f S*=%.9f simulated=%.9f, %.2f s",
                  sigma, omega, s_closed, s_sim, dt);
    report(2, "segment-regime fixed point", ok, buf);
}

// --- 3: analytic map derivative vs. finite differences --------------------

void criterion_map_derivative() {
    std::mt19937 rng(51);
    std::uniform_real_distribution<double> us(std::log(0.05), std::log(8.0));
    const double alphas[5] = {1.6, 2.2, 2.5, 2.8, 3.2};
    int tried = 0, good = 0, n_xi = 0, n_psi = 0;
    for (double alpha : alphas) {
        auto sys = std::make_shared<const SystemCache>(ref_k1(), SystemParams{alpha, alpha + 1.8});
        ReturnMap rm(sys, {1, Section::Side::Below}, 64);
        int here = 0, attempts = 0;
        while (here < 20 && ++attempts < 2000) {
            double s0 = std::exp(us(rng));
            double h = 1e-6 * s0;
            MapSample m = rm.eval(s0), lo = rm.eval(s0 - h), hi = rm.eval(s0 + h);
            if (!m.ok || !lo.ok || !hi.ok || lo.branch != hi.branch) continue;
            ++here, ++tried;
            (m.branch == Branch::Xi ? n_xi : n_psi)++;
            double fd = (hi.s0_bar - lo.s0_bar) / (2.0 * h);
            if (std::fabs(m.deriv - fd) <= 1e-6 * std::fabs(fd)) ++good;
        }
    }
    bool ok = tried == 100 && good >= 95 && n_xi > 0 && n_psi > 0;
    char buf[120];
    std::snprintf(buf, sizeof buf, "%d/%d within 1e-6, %d small-circuit / %d full-circuit",
                  good, tried, n_xi, n_psi);
    report(3, "map derivative vs. finite differences", ok, buf);
}

// --- 4: half-turn transition functions ------------------------------------

void criterion_half_turn() {
    bool ok = true;
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> usg(-3.0, -0.1), uw(0.3, 3.0);
    double worst_ratio = 0.0;
    for (int i = 0; i < 20; ++i) {
        double sigma = usg(rng), omega = uw(rng);
        double tau = M_PI / omega - 1e-6;
        double ratio = chi_fn(tau, sigma, omega) / zeta_fn(tau, sigma, omega);
        double err = std::fabs(ratio - std::exp(M_PI * sigma / omega));
        worst_ratio = std::max(worst_ratio, err);
        if (err > 1e-5) ok = false;
    }

    std::mt19937 rng2(43);
    std::uniform_real_distribution<double> ud(0.01, 0.4), uf(1.05, 1.9);
    PwlCurve c = ref_k1();
    int checked = 0;
    double worst_half = 0.0;
    while (checked < 50) {
        double delta0 = ud(rng2);
        double alpha = 3.0;
        double beta = 1.0 + (alpha + 1.0) * (1.0 - delta0);
        RegionFlow rf = region_system(c, {alpha, beta}, c.region(1));
        double sigma = rf.eigen.sigma, omega = rf.eigen.omega;
        double tau = uf(rng2) * M_PI / omega;
        double s0 = delta0 * zeta_fn(tau, sigma, omega);
        if (!(s0 > 0.0)) continue;
        HalfMapResult hm;
        try {
            hm = half_map_region(s0, sigma, omega, delta0);
        } catch (const Error&) {
            continue;
        }
        CrossEvent ev = boundary_crossing(rf, {1.0, 2.0 - s0}, -INFINITY, 1.0);
        if (ev.terminal != CrossEvent::Terminal::Crossed) { ok = false; break; }
        double s1_flow = ev.exit_point.y - 2.0;
        double err = std::fabs(hm.s1 - s1_flow) / std::max(1e-30, std::fabs(s1_flow));
        worst_half = std::max(worst_half, err);
        if (err > 1e-8) ok = false;
        if (std::fabs(hm.tau - ev.tau) > 1e-8 * ev.tau) ok = false;
        ++checked;
    }
    char buf[140];
    std::snprintf(buf, sizeof buf, "limit err <= %.2e on 20 pairs; half-turn rel err <= %.2e on %d",
                  worst_ratio, worst_half, checked);
    report(4, "half-turn transition functions", ok, buf);
}

// --- 5: first-order separatrix slopes -------------------------------------

void criterion_slope_asymptotics() {
    bool ok = true;
    std::string detail;
    for (double k2 : {2.0, 3.0}) {
        auto err = [&](double eps) {
            SeparatrixSlopes s = separatrix_slopes(k2, k2 - eps);
            return std::fabs(s.exact_alpha - s.firstorder_alpha);
        };
        double ratio = err(1e-2) / err(1e-3);
        if (!(ratio > 80.0 && ratio < 120.0)) ok = false;
        detail += (detail.empty() ? "" : ", ") + std::string("k2=") + std::to_string((int)k2) +
                  " ratio=" + std::to_string(ratio);
    }
    report(5, "quadratic slope-error decay", ok, detail);
}

// --- 6: section-segment ratio under line shifts ---------------------------

void criterion_shift_invariance() {
    auto rows = beta_invariance_check(ref_k1(), 2.5, {0.1, 0.05, 0.01});
    bool ok = rows.size() == 3;
    double worst = 0.0;
    for (size_t i = 1; ok && i < rows.size(); ++i) {
        double err = std::fabs(rows[i].ratio - rows[0].ratio) / std::fabs(rows[0].ratio);
        worst = std::max(worst, err);
        if (err > 1e-8) ok = false;
    }
    char buf[100];
    std::snprintf(buf, sizeof buf, "ratio spread %.2e across 3 shifts", worst);
    report(6, "shift invariance of the segment ratio", ok, buf);
}

// --- 7: cycle-count bound over parameter scans ----------------------------

void criterion_scan_bound() {
    auto t0 = clk::now();
    ScanOptions opts;
    opts.threads = 8;

    BifurcationDiagram d1 = scan_diagram(ref_k1(), 0.2, 4.0, 0.5, 6.0, 50, 50, opts);
    VerifyReport v1 = verify_bound(d1, 1);
    BifurcationDiagram d2 = scan_diagram(ref_k2(), 0.2, 4.0, 0.5, 5.0, 50, 50, opts);
    VerifyReport v2 = verify_bound(d2, 2);

    bool pairs_ok = true;
    for (const BifurcationDiagram* d : {&d1, &d2})
        for (const CellReport& cell : d->cells)
            for (const auto& [pair_lo, count] : cell.small_per_pair)
                if (count > 1) pairs_ok = false;

    double dt = seconds_since(t0);
    bool ok = v1.pass && v2.pass && v1.max_total <= 3 && v2.max_total <= 4 &&
              v1.violations.empty() && v2.violations.empty() && pairs_ok && dt < 300.0;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "max totals %d<=3 and %d<=4, %zu violations, per-pair bound %s, %.1f s",
                  v1.max_total, v2.max_total, v1.violations.size() + v2.violations.size(),
                  pairs_ok ? "holds" : "broken", dt);
    report(7, "cycle-count bound on 50x50 scans", ok, buf);
}

// --- 8: qualitative sequence along the rotation path ----------------------

void criterion_sequence() {
    PwlCurve c = ref_k1();
    ScanOptions opts;
    bool ok = true;
    std::string detail;

    CellReport focus = analyze_cell(c, {3.5, 5.5}, opts);
    if (focus.n_small + focus.n_big != 0) ok = false;
    detail += "a=3.5: " + std::to_string(focus.n_big) + " big";

    CellReport big = analyze_cell(c, {2.5, 4.5}, opts);
    bool big_ok = big.n_big == 1 && big.n_small == 0 && big.cycles.size() == 1 &&
                  big.cycles[0].stability == Stability::Stable;
    if (!big_ok) ok = false;
    detail += "; a=2.5: " + std::to_string(big.n_big) + " big stable";

    CellReport seg = analyze_cell(c, {2.0, 4.0}, opts);
    if (!(seg.flags.count(CellFlag::EquilibriumSegment) == 1 && seg.n_big == 1)) ok = false;
    detail += "; a=2: segment+" + std::to_string(seg.n_big) + " big";

    CellReport rot = analyze_cell(c, {1.99, 1.0 + 1.5 * 1.99}, opts);
    bool rot_ok = rot.n_singular == 3 && rot.n_small == 2 && rot.n_big == 1;
    int stable_foci = 0;
    auto sings = find_singular_points(c, {1.99, 1.0 + 1.5 * 1.99});
    for (const SingularPoint& s : sings)
        if (s.kind == SingKind::StableFocus) ++stable_foci;
    if (stable_foci != 2) rot_ok = false;
    for (const LimitCycle& cyc : rot.cycles)
        if (cyc.small && cyc.stability != Stability::Unstable) rot_ok = false;
    if (!rot_ok) ok = false;
    detail += "; a=1.99: " + std::to_string(rot.n_small) + " small unstable + " +
              std::to_string(rot.n_big) + " big, " + std::to_string(stable_foci) + " stable foci";

    report(8, "rotation-path qualitative sequence", ok, detail);
}

// --- 9: closed-form flows vs. Runge-Kutta ---------------------------------

Vec2 rk4_flow(const RegionFlow& rf, Vec2 p, double t, int steps) {
    double h = t / steps;
    for (int i = 0; i < steps; ++i) {
        Vec2 k1 = rf.field(p);
        Vec2 k2 = rf.field(p + 0.5 * h * k1);
        Vec2 k3 = rf.field(p + 0.5 * h * k2);
        Vec2 k4 = rf.field(p + h * k3);
        p = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return p;
}

void criterion_flow_oracle() {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> up(-2.0, 4.0), ut(0.1, 5.0);
    std::uniform_real_distribution<double> ua(0.2, 4.0), ub(0.5, 6.0);
    std::uniform_int_distribution<int> uregion(1, 3);
    PwlCurve c = ref_k1();
    bool ok = true;
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        RegionFlow rf = region_system(c, {ua(rng), ub(rng)}, c.region(uregion(rng)));
        Vec2 p{up(rng), up(rng)};
        double t = ut(rng);
        Vec2 exact = rf.flow(p, t);
        Vec2 numeric = rk4_flow(rf, p, t, 50000);
        double err = norm(exact - numeric) / (1.0 + norm(exact));
        worst = std::max(worst, err);
        if (err > 1e-8) ok = false;
    }
    char buf[100];
    std::snprintf(buf, sizeof buf, "max rel deviation %.2e over 200 systems", worst);
    report(9, "closed-form flow vs. integrator", ok, buf);
}

}  // namespace

int main() {
    criterion_center_identity();
    criterion_segment_fixed_point();
    criterion_map_derivative();
    criterion_half_turn();
    criterion_slope_asymptotics();
    criterion_shift_invariance();
    criterion_scan_bound();
    criterion_sequence();
    criterion_flow_oracle();
    std::printf("%d passed, %d failed\n", n_pass, n_fail);
    return n_fail == 0 ? 0 : 1;
}
