#pragma once

#include <vector>

#include "plds/linear_flow.hpp"

namespace plds {

// Vertical ray on the sewing line x = x_j, anchored at corner j.
// The S-coordinate is the distance |y - y_j| along the ray.
struct Section {
    enum class Side { Below, Above };

    int corner_index = 1;  // 1..2k
    Side side = Side::Below;
};

struct Arc {
    int region = 0;
    Vec2 entry;
    Vec2 exit;
    double tau = 0.0;
};

struct SewnTrajectory {
    enum class Terminal { Crossed, ConvergedToEquilibrium, Unbounded, MaxCrossings };

    std::vector<Arc> arcs;
    Terminal terminal = Terminal::MaxCrossings;
    int max_region = 0;

    double total_time() const;
};

// Per-strip flows cached for one (curve, params) pair.
class SystemCache {
  public:
    SystemCache(const PwlCurve& curve, const SystemParams& params, Tolerances tol = {});

    const PwlCurve& curve() const { return curve_; }
    const SystemParams& params() const { return params_; }
    const Tolerances& tol() const { return tol_; }
    const RegionFlow& flow(int region_index) const { return flows_[region_index - 1]; }

    // Region holding p; on a sewing line the field direction decides,
    // ties at a corner break toward the even region.
    int region_at(Vec2 p) const;

  private:
    PwlCurve curve_;
    SystemParams params_;
    Tolerances tol_;
    std::vector<RegionFlow> flows_;
};

SewnTrajectory sew_trajectory(const SystemCache& sys, Vec2 start, int max_crossings);

// Sews from `start` until a crossing lands on the section ray (start itself
// excluded); the landing point is the last arc's exit.
struct SectionHit {
    SewnTrajectory traj;
    bool hit = false;
    double s = 0.0;  // section coordinate of the landing point
};
SectionHit sew_until_section(const SystemCache& sys, Vec2 start, const Section& section,
                             int max_crossings);

double section_coordinate(const PwlCurve& curve, const Section& section, Vec2 p);
Vec2 section_point(const PwlCurve& curve, const Section& section, double s);

std::vector<SewnTrajectory> phase_portrait(const SystemCache& sys, const std::vector<Vec2>& seeds,
                                           int max_crossings);

}  // namespace plds
