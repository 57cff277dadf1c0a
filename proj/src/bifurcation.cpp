#include "plds/bifurcation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace plds {

namespace {

// sigma/omega of an ascending (slope k1) / dropping (slope -k2) piece as a
// function of alpha; NaN when the piece is not a focus.
double sigma_over_omega_odd(double k1, double alpha) {
    double disc = 4.0 * (k1 + alpha) - (1.0 + k1) * (1.0 + k1);
    if (disc <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return -(1.0 + k1) / std::sqrt(disc);
}

double sigma_over_omega_even(double k2, double alpha) {
    double disc = 4.0 * (alpha - k2) - (k2 - 1.0) * (k2 - 1.0);
    if (disc <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (k2 - 1.0) / std::sqrt(disc);
}

}  // namespace

double alpha_star(double k1, double k2) {
    if (!(k2 > 1.0)) throw Error(ErrorKind::NoRoot, "no center: k2 must exceed 1");
    double lo = std::max((k2 + 1.0) * (k2 + 1.0) / 4.0, (k1 - 1.0) * (k1 - 1.0) / 4.0);
    lo *= 1.0 + 1e-9;
    lo += 1e-12;
    double hi = 1e3 * k2;
    auto h = [&](double a) {
        return sigma_over_omega_odd(k1, a) + sigma_over_omega_even(k2, a);
    };
    double hlo = h(lo), hhi = h(hi);
    if (!(hlo * hhi < 0.0))
        throw Error(ErrorKind::NoRoot, "center condition has no root in the focus window");
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        double m = 0.5 * (lo + hi);
        if (h(m) * hlo > 0.0)
            lo = m;
        else
            hi = m;
    }
    return 0.5 * (lo + hi);
}

double alpha_star_printed(double k1, double k2) {
    return (1.0 - k1 / k2) / (k2 - k1 + 2.0);
}

SeparatrixSlopes separatrix_slopes(double k2, double alpha) {
    // alpha == k2 is the degenerate edge; the slopes still have a limit there.
    if (alpha > k2) throw Error(ErrorKind::NotSaddle, "dropping piece is not a saddle");
    double eps = k2 - alpha;
    double tr = k2 - 1.0;
    double disc = tr * tr + 4.0 * eps;  // trace^2 - 4 det, det = alpha - k2
    double root = std::sqrt(disc);
    double lu = 0.5 * (tr + root), ls = 0.5 * (tr - root);
    SeparatrixSlopes out;
    out.exact_alpha = lu - k2;
    out.exact_omega = ls - k2;
    out.firstorder_alpha = -1.0 + eps / (k2 - 1.0);
    out.firstorder_omega = -k2 - eps / (k2 - 1.0);
    double nu = std::hypot(1.0, out.exact_alpha), ns = std::hypot(1.0, out.exact_omega);
    out.eigvec_unstable = {1.0 / nu, out.exact_alpha / nu};
    out.eigvec_stable = {1.0 / ns, out.exact_omega / ns};
    return out;
}

namespace {

// Time reversal of an affine strip flow; used to shoot trajectories backwards
// through the same crossing machinery.
RegionFlow reversed(const RegionFlow& rf) {
    RegionFlow r = rf;
    r.J = -1.0 * rf.J;
    r.b = -1.0 * rf.b;
    switch (rf.eigen.type) {
        case EigenData::Type::ComplexPair:
            r.eigen.sigma = -rf.eigen.sigma;
            break;
        case EigenData::Type::RealDistinct:
            r.eigen.l1 = -rf.eigen.l2;
            r.eigen.l2 = -rf.eigen.l1;
            break;
        case EigenData::Type::RealRepeated:
            r.eigen.l1 = -rf.eigen.l1;
            r.eigen.l2 = -rf.eigen.l2;
            break;
    }
    return r;
}

}  // namespace

std::vector<BetaInvarianceRow> beta_invariance_check(const PwlCurve& curve, double alpha,
                                                     const std::vector<double>& kappas) {
    if (curve.k < 1) throw Error(ErrorKind::GeometryError, "curve has no dropping section");
    const Vec2 c = curve.corners[0];
    const double beta0 = c.x * alpha + c.y;
    std::vector<BetaInvarianceRow> rows;
    for (double kappa : kappas) {
        if (!(kappa > 0.0)) throw Error(ErrorKind::BadSign, "kappa must be positive");
        SystemParams params{alpha, beta0 - kappa};
        SystemCache sys(curve, params);
        const RegionFlow& rf1 = sys.flow(1);
        if (rf1.eigen.type != EigenData::Type::ComplexPair || !rf1.equilibrium)
            throw Error(ErrorKind::GeometryError, "first strip is not a focus");
        BetaInvarianceRow row;
        row.kappa = kappa;
        row.delta0 = c.x - rf1.equilibrium->x;
        if (!(row.delta0 > 0.0))
            throw Error(ErrorKind::GeometryError, "equilibrium not behind the corner line");

        // Backward orbit from (x1, y1 - kappa): half-turn through strip 2
        // back to the line above the corner, then a region-I half-turn down
        // to the segment below the corner.
        Region r2 = curve.region(2);
        CrossEvent up = boundary_crossing(reversed(sys.flow(2)), {c.x, c.y - kappa}, r2.x_lo,
                                          r2.x_hi, sys.tol());
        if (up.terminal != CrossEvent::Terminal::Crossed || !up.left ||
            !(up.exit_point.y > c.y))
            throw Error(ErrorKind::GeometryError, "backward orbit misses the upper segment");
        row.s1_prime = up.exit_point.y - c.y;

        Region r1 = curve.region(1);
        CrossEvent down =
            boundary_crossing(reversed(rf1), up.exit_point, r1.x_lo, r1.x_hi, sys.tol());
        if (down.terminal != CrossEvent::Terminal::Crossed || down.left ||
            !(down.exit_point.y < c.y))
            throw Error(ErrorKind::GeometryError, "backward orbit misses the lower segment");
        row.s0_prime = c.y - down.exit_point.y;

        row.s1 =
            half_map_region(row.s0_prime, rf1.eigen.sigma, rf1.eigen.omega, row.delta0).s1;
        row.ratio = row.s1 / row.s1_prime;
        rows.push_back(row);
    }
    return rows;
}

std::optional<double> separatrix_gap(const SystemCache& sys, const SingularPoint& saddle) {
    if (!saddle.is_saddle()) throw Error(ErrorKind::NotSaddle, "gap needs a saddle");
    const PwlCurve& curve = sys.curve();
    int r = saddle.region_index;
    Region strip = curve.region(r);
    double k2 = curve.k2;
    double lu = std::max(saddle.eigen.l1, saddle.eigen.l2);
    double ls = std::min(saddle.eigen.l1, saddle.eigen.l2);
    // Both eigenlines have x-component 1; slopes lambda - k2.
    double dx = strip.x_lo - saddle.location.x;  // < 0
    Vec2 a{strip.x_lo, saddle.location.y + dx * (lu - k2)};
    Vec2 b{strip.x_lo, saddle.location.y + dx * (ls - k2)};

    SewnTrajectory traj = sew_trajectory(sys, a, 64);
    for (const Arc& arc : traj.arcs) {
        if (arc.region == r - 1 && std::fabs(arc.exit.x - strip.x_lo) <= 1e-9)
            return arc.exit.y - b.y;
    }
    return std::nullopt;
}

double find_separatrix_loop(const PwlCurve& curve, const BetaRule& beta_rule, double alpha_lo,
                            double alpha_hi, double tol_alpha) {
    auto gap_at = [&](double alpha) -> std::optional<double> {
        SystemParams params{alpha, beta_rule(alpha)};
        SystemCache sys(curve, params);
        auto sings = find_singular_points(curve, params, sys.tol());
        for (const auto& s : sings)
            if (s.is_saddle()) return separatrix_gap(sys, s);
        throw Error(ErrorKind::NotSaddle, "no saddle in bracket");
    };
    auto glo = gap_at(alpha_lo), ghi = gap_at(alpha_hi);
    if (!glo || !ghi || *glo * *ghi > 0.0)
        throw Error(ErrorKind::NoSignChange, "separatrix gap does not change sign on bracket");
    double lo = alpha_lo, hi = alpha_hi, sign_lo = *glo;
    while (hi - lo > tol_alpha) {
        double m = 0.5 * (lo + hi);
        auto gm = gap_at(m);
        if (!gm) throw Error(ErrorKind::NoSignChange, "gap undefined inside bracket");
        if (*gm * sign_lo > 0.0) {
            lo = m;
            sign_lo = *gm;
        } else {
            hi = m;
        }
    }
    return 0.5 * (lo + hi);
}

namespace {

double curve_scale(const PwlCurve& curve) {
    double s = 1.0;
    for (const Vec2& c : curve.corners) s = std::max({s, std::fabs(c.x), std::fabs(c.y)});
    return s;
}

bool same_cycle(const LimitCycle& a, const LimitCycle& b) {
    return a.regions_spanned == b.regions_spanned &&
           std::fabs(a.period - b.period) <= 1e-6 * (1.0 + std::fabs(a.period));
}

}  // namespace

CellReport analyze_cell(const PwlCurve& curve, const SystemParams& params,
                        const ScanOptions& opts) {
    CellReport rep;
    rep.alpha = params.alpha;
    rep.beta = params.beta;
    std::vector<SingularPoint> sings;
    try {
        sings = find_singular_points(curve, params);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::DegenerateLine) {
            rep.flags.insert(CellFlag::EquilibriumSegment);
            return rep;
        }
        throw;
    }
    rep.n_singular = static_cast<int>(sings.size());
    for (const auto& s : sings) {
        if (s.kind == SingKind::SewedCenter) rep.flags.insert(CellFlag::SewedCenter);
        if (s.kind == SingKind::EquilibriumSegment)
            rep.flags.insert(CellFlag::EquilibriumSegment);
    }

    auto sys = std::make_shared<const SystemCache>(curve, params);
    double scale = curve_scale(curve);
    bool any_ok = false;
    std::vector<Section> sections;
    for (int j = 1; j <= 2 * curve.k; ++j) {
        sections.push_back({j, Section::Side::Below});
        sections.push_back({j, Section::Side::Above});
    }
    for (const Section& section : sections) {
        ReturnMap rm(sys, section, opts.max_crossings);
        try {
            rm.sample_range(opts.s_min_rel * scale, opts.s_max_rel * scale,
                            opts.samples_per_section);
        } catch (const Error&) {
            continue;
        }
        for (const auto& s : rm.samples()) any_ok = any_ok || s.ok;
        if (rm.identity_flag()) rep.flags.insert(CellFlag::SewedCenter);
        for (const LimitCycle& c : find_limit_cycles(rm)) {
            bool dup = false;
            for (const auto& prev : rep.cycles) dup = dup || same_cycle(prev, c);
            if (!dup) rep.cycles.push_back(c);
        }
    }
    if (!any_ok) rep.flags.insert(CellFlag::NonReturning);

    for (const LimitCycle& c : rep.cycles) {
        if (c.small)
            ++rep.n_small;
        else
            ++rep.n_big;
        if (c.multiplicity_hint >= 2 || std::fabs(c.deriv - 1.0) <= 1e-4)
            rep.flags.insert(CellFlag::DoubleCycleNear);
        if (c.small && !c.regions_spanned.empty()) {
            int key = c.regions_spanned.front();
            bool found = false;
            for (auto& [pair, n] : rep.small_per_pair)
                if (pair == key) {
                    ++n;
                    found = true;
                }
            if (!found) rep.small_per_pair.push_back({key, 1});
        }
    }

    for (const auto& s : sings) {
        if (!s.is_saddle()) continue;
        try {
            auto g = separatrix_gap(*sys, s);
            if (g && std::fabs(*g) < 1e-3 * scale) rep.flags.insert(CellFlag::SeparatrixLoopNear);
        } catch (const Error&) {
        }
    }
    return rep;
}

BifurcationDiagram scan_diagram(const PwlCurve& curve, double alpha_lo, double alpha_hi,
                                double beta_lo, double beta_hi, int na, int nb,
                                const ScanOptions& opts) {
    if (na < 1 || nb < 1 || !(alpha_lo <= alpha_hi) || !(beta_lo <= beta_hi) ||
        (na > 1 && alpha_lo == alpha_hi) || (nb > 1 && beta_lo == beta_hi))
        throw Error(ErrorKind::BadRange, "scan grid must be non-empty with increasing ranges");
    BifurcationDiagram d;
    for (int i = 0; i < na; ++i)
        d.alpha_grid.push_back(na == 1 ? alpha_lo
                                       : alpha_lo + (alpha_hi - alpha_lo) * i / (na - 1));
    for (int j = 0; j < nb; ++j)
        d.beta_grid.push_back(nb == 1 ? beta_lo : beta_lo + (beta_hi - beta_lo) * j / (nb - 1));
    d.discriminant = discriminant_curve(curve);
    try {
        d.alpha_star_value = alpha_star(curve.k1, curve.k2);
    } catch (const Error&) {
        d.alpha_star_value = std::numeric_limits<double>::quiet_NaN();
    }

    d.cells.resize(static_cast<size_t>(na) * nb);
    std::atomic<size_t> next{0};
    int n_threads = opts.threads > 0 ? opts.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    auto worker = [&] {
        for (size_t idx; (idx = next.fetch_add(1)) < d.cells.size();) {
            int ia = static_cast<int>(idx % na), ib = static_cast<int>(idx / na);
            SystemParams params{d.alpha_grid[ia], d.beta_grid[ib]};
            try {
                d.cells[idx] = analyze_cell(curve, params, opts);
            } catch (const Error&) {
                d.cells[idx].alpha = params.alpha;
                d.cells[idx].beta = params.beta;
                d.cells[idx].flags.insert(CellFlag::NonReturning);
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return d;
}

VerifyReport verify_bound(const BifurcationDiagram& diagram, int k) {
    VerifyReport rep;
    rep.bound = k + 2;
    rep.pass = true;
    for (const CellReport& c : diagram.cells) {
        int total = c.n_small + c.n_big;
        rep.max_total = std::max(rep.max_total, total);
        rep.max_small = std::max(rep.max_small, c.n_small);
        rep.max_big = std::max(rep.max_big, c.n_big);
        auto violate = [&](const std::string& why) {
            rep.pass = false;
            rep.violations.push_back({c.alpha, c.beta, c.n_small, c.n_big, why});
        };
        if (total > k + 2) violate("total cycle count exceeds k+2");
        if (c.n_small > k + 1) violate("small cycle count exceeds k+1");
        if (c.n_big > 2) violate("big cycle count exceeds 2");
        for (const auto& [pair, n] : c.small_per_pair)
            if (n > 1) violate("more than one small cycle in one region pair");
    }
    return rep;
}

std::string flag_name(CellFlag f) {
    switch (f) {
        case CellFlag::SewedCenter: return "SewedCenter";
        case CellFlag::EquilibriumSegment: return "EquilibriumSegment";
        case CellFlag::SeparatrixLoopNear: return "SeparatrixLoopNear";
        case CellFlag::DoubleCycleNear: return "DoubleCycleNear";
        case CellFlag::NonReturning: return "NonReturning";
    }
    return "?";
}

}  // namespace plds
