#include "plds/sewing.hpp"

#include <cmath>

namespace plds {

double SewnTrajectory::total_time() const {
    double t = 0.0;
    for (const auto& a : arcs) t += a.tau;
    return t;
}

SystemCache::SystemCache(const PwlCurve& curve, const SystemParams& params, Tolerances tol)
    : curve_(curve), params_(params), tol_(tol) {
    flows_.reserve(curve_.num_regions());
    for (int i = 1; i <= curve_.num_regions(); ++i)
        flows_.push_back(region_system(curve_, params_, curve_.region(i)));
}

int SystemCache::region_at(Vec2 p) const {
    for (int j = 1; j <= 2 * curve_.k; ++j) {
        double xj = curve_.corners[j - 1].x;
        if (std::fabs(p.x - xj) <= 1e-9) {
            // On the sewing line: the field decides which strip is entered.
            double xdot = p.y - curve_.corners[j - 1].y;  // y - phi(x_j)
            if (std::fabs(xdot) <= 1e-12) return j % 2 == 0 ? j : j + 1;  // tie: even region
            return xdot > 0.0 ? j + 1 : j;
        }
    }
    return curve_.region_of(p.x).index;
}

namespace {

struct StepResult {
    Arc arc;
    CrossEvent::Terminal terminal;
    int next_region = 0;
};

// Orbits spiralling into a sewed singular point land ever closer to the
// corner; once the distance is at roundoff scale the crossing detector has
// nothing left to resolve, so declare convergence there.
bool at_sewed_equilibrium(const SystemCache& sys, Vec2 p) {
    const SystemParams& pr = sys.params();
    for (const Vec2& c : sys.curve().corners) {
        if (std::fabs(p.x - c.x) > 1e-11 * (1.0 + std::fabs(c.x)) ||
            std::fabs(p.y - c.y) > 1e-11 * (1.0 + std::fabs(c.y)))
            continue;
        if (std::fabs(pr.beta - pr.alpha * c.x - c.y) <= 1e-9 * (1.0 + std::fabs(pr.beta)))
            return true;
    }
    return false;
}

StepResult advance(const SystemCache& sys, Vec2 p, int region_index) {
    if (at_sewed_equilibrium(sys, p)) {
        StepResult r;
        r.arc = {region_index, p, p, 0.0};
        r.terminal = CrossEvent::Terminal::ConvergedToEquilibrium;
        return r;
    }
    const RegionFlow& rf = sys.flow(region_index);
    CrossEvent ev = boundary_crossing(rf, p, rf.region.x_lo, rf.region.x_hi, sys.tol());
    StepResult r;
    r.arc = {region_index, p, ev.exit_point, ev.tau};
    r.terminal = ev.terminal;
    if (ev.terminal == CrossEvent::Terminal::Crossed) {
        r.next_region = ev.left ? region_index - 1 : region_index + 1;
        if (ev.tangent) {
            // Corner tangency: continue into the strip the field points into,
            // ties toward the even region.
            r.next_region = sys.region_at(ev.exit_point);
        }
    }
    return r;
}

}  // namespace

SewnTrajectory sew_trajectory(const SystemCache& sys, Vec2 start, int max_crossings) {
    SewnTrajectory traj;
    int region = sys.region_at(start);
    traj.max_region = region;
    Vec2 p = start;
    for (int n = 0; n < max_crossings; ++n) {
        StepResult step = advance(sys, p, region);
        traj.arcs.push_back(step.arc);
        if (step.terminal == CrossEvent::Terminal::ConvergedToEquilibrium) {
            traj.terminal = SewnTrajectory::Terminal::ConvergedToEquilibrium;
            return traj;
        }
        if (step.terminal == CrossEvent::Terminal::Unbounded) {
            traj.terminal = SewnTrajectory::Terminal::Unbounded;
            return traj;
        }
        region = step.next_region;
        traj.max_region = std::max(traj.max_region, region);
        p = step.arc.exit;
        traj.terminal = SewnTrajectory::Terminal::Crossed;
    }
    traj.terminal = SewnTrajectory::Terminal::MaxCrossings;
    return traj;
}

double section_coordinate(const PwlCurve& curve, const Section& section, Vec2 p) {
    const Vec2& c = curve.corners[section.corner_index - 1];
    if (std::fabs(p.x - c.x) > 1e-9) throw Error(ErrorKind::OffSection, "point off the sewing line");
    double d = p.y - c.y;
    if (section.side == Section::Side::Below ? d > 1e-9 : d < -1e-9)
        throw Error(ErrorKind::OffSection, "point on the wrong side of the corner");
    return std::fabs(d);
}

Vec2 section_point(const PwlCurve& curve, const Section& section, double s) {
    const Vec2& c = curve.corners[section.corner_index - 1];
    return {c.x, section.side == Section::Side::Below ? c.y - s : c.y + s};
}

SectionHit sew_until_section(const SystemCache& sys, Vec2 start, const Section& section,
                             int max_crossings) {
    SectionHit hit;
    const Vec2& corner = sys.curve().corners[section.corner_index - 1];
    int region = sys.region_at(start);
    hit.traj.max_region = region;
    Vec2 p = start;
    for (int n = 0; n < max_crossings; ++n) {
        StepResult step = advance(sys, p, region);
        hit.traj.arcs.push_back(step.arc);
        if (step.terminal == CrossEvent::Terminal::ConvergedToEquilibrium) {
            hit.traj.terminal = SewnTrajectory::Terminal::ConvergedToEquilibrium;
            return hit;
        }
        if (step.terminal == CrossEvent::Terminal::Unbounded) {
            hit.traj.terminal = SewnTrajectory::Terminal::Unbounded;
            return hit;
        }
        Vec2 q = step.arc.exit;
        if (std::fabs(q.x - corner.x) <= 1e-9) {
            double d = q.y - corner.y;
            bool on_side = section.side == Section::Side::Below ? d < 0.0 : d > 0.0;
            if (on_side) {
                hit.traj.terminal = SewnTrajectory::Terminal::Crossed;
                hit.hit = true;
                hit.s = std::fabs(d);
                return hit;
            }
        }
        region = step.next_region;
        hit.traj.max_region = std::max(hit.traj.max_region, region);
        p = q;
    }
    hit.traj.terminal = SewnTrajectory::Terminal::MaxCrossings;
    return hit;
}

std::vector<SewnTrajectory> phase_portrait(const SystemCache& sys, const std::vector<Vec2>& seeds,
                                           int max_crossings) {
    std::vector<SewnTrajectory> out;
    out.reserve(seeds.size());
    for (const Vec2& seed : seeds) {
        try {
            out.push_back(sew_trajectory(sys, seed, max_crossings));
        } catch (const Error&) {
            out.push_back(SewnTrajectory{});  // per-seed failure, no global abort
        }
    }
    return out;
}

}  // namespace plds
