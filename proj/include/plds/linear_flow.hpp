#pragma once

#include <optional>

#include "plds/core.hpp"
#include "plds/model.hpp"

namespace plds {

// Exact affine dynamics of one strip: p' = J p + b.
struct RegionFlow {
    Region region;
    Mat2 J;
    Vec2 b;
    std::optional<Vec2> equilibrium;  // absent when det(J) ~ 0 (equilibrium segment case)
    EigenData eigen;

    Vec2 field(Vec2 p) const { return J * p + b; }

    // Closed-form solution of the affine system; valid for any t (also negative)
    // and any p0, in or out of the strip.
    Vec2 flow(Vec2 p0, double t) const;
};

RegionFlow region_system(const PwlCurve& curve, const SystemParams& params, const Region& region);

inline Vec2 flow_state(const RegionFlow& rf, Vec2 p0, double t) { return rf.flow(p0, t); }

struct CrossEvent {
    enum class Terminal { Crossed, ConvergedToEquilibrium, Unbounded };

    double tau = 0.0;
    Vec2 exit_point;
    Terminal terminal = Terminal::Crossed;
    bool left = false;     // crossed the lower strip bound (x_lo) rather than x_hi
    bool tangent = false;  // |x_dot| < 1e-10 at the boundary
};

// First t > 0 with x(t) on a strip bound, by analytic sampling plus bisection.
// Throws ToleranceExhausted when a crossing cannot be bracketed.
CrossEvent boundary_crossing(const RegionFlow& rf, Vec2 p0, double x_lo, double x_hi,
                             const Tolerances& tol = {});

}  // namespace plds
