#include "plds/linear_flow.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace plds {

namespace {

// g1 = (exp(l t) - 1) / l, g2 = integral of s * exp(l s) over [0, t].
double g1_fn(double l, double t) {
    double lt = l * t;
    if (std::fabs(lt) < 1e-8) return t * (1.0 + 0.5 * lt + lt * lt / 6.0);
    return std::expm1(lt) / l;
}

double g2_fn(double l, double t) {
    double lt = l * t;
    if (std::fabs(lt) < 1e-4)
        return t * t * (0.5 + lt / 3.0 + lt * lt / 8.0 + lt * lt * lt / 30.0);
    return (t * std::exp(lt) - g1_fn(l, t)) / l;
}

struct Propagator {
    Mat2 E;  // exp(J t)
    Mat2 K;  // integral of exp(J s) over [0, t]
};

Propagator propagate(const Mat2& J, const EigenData& e, double t) {
    Propagator p;
    const Mat2 I = identity2();
    switch (e.type) {
        case EigenData::Type::ComplexPair: {
            double s = e.sigma, w = e.omega;
            Mat2 N = J + (-s) * I;  // eigen +/- i w
            double est = std::exp(s * t), cwt = std::cos(w * t), swt = std::sin(w * t);
            p.E = (est * cwt) * I + (est * swt / w) * N;
            double d = s * s + w * w;
            double ic = (est * (s * cwt + w * swt) - s) / d;   // int exp(ss) cos(ws)
            double is = (est * (s * swt - w * cwt) + w) / d;   // int exp(ss) sin(ws)
            p.K = ic * I + (is / w) * N;
            break;
        }
        case EigenData::Type::RealDistinct: {
            double l1 = e.l1, l2 = e.l2, dl = l1 - l2;
            Mat2 P1 = (1.0 / dl) * (J + (-l2) * I);
            Mat2 P2 = (-1.0 / dl) * (J + (-l1) * I);
            p.E = std::exp(l1 * t) * P1 + std::exp(l2 * t) * P2;
            p.K = g1_fn(l1, t) * P1 + g1_fn(l2, t) * P2;
            break;
        }
        case EigenData::Type::RealRepeated: {
            double l = e.l1;
            Mat2 N = J + (-l) * I;
            double elt = std::exp(l * t);
            p.E = elt * I + (elt * t) * N;
            p.K = g1_fn(l, t) * I + g2_fn(l, t) * N;
            break;
        }
    }
    return p;
}

EigenData eigen_of(const Mat2& J) {
    EigenData e;
    double tr = J.trace(), det = J.det();
    double disc = tr * tr - 4.0 * det;
    double scale = tr * tr + std::fabs(det) + 1.0;
    if (std::fabs(disc) <= 1e-12 * scale) {
        e.type = EigenData::Type::RealRepeated;
        e.l1 = e.l2 = 0.5 * tr;
    } else if (disc > 0.0) {
        e.type = EigenData::Type::RealDistinct;
        double root = std::sqrt(disc);
        e.l1 = 0.5 * (tr + root);
        e.l2 = 0.5 * (tr - root);
    } else {
        e.type = EigenData::Type::ComplexPair;
        e.sigma = 0.5 * tr;
        e.omega = 0.5 * std::sqrt(-disc);
    }
    return e;
}

}  // namespace

Vec2 RegionFlow::flow(Vec2 p0, double t) const {
    // p(t) = p0 + K(t) (J p0 + b); exact for the affine system, any det(J).
    Propagator pr = propagate(J, eigen, t);
    return p0 + pr.K * field(p0);
}

RegionFlow region_system(const PwlCurve& curve, const SystemParams& params, const Region& region) {
    RegionFlow rf;
    rf.region = region;
    double m = curve.slope(region.index);
    double c = curve.intercept(region.index);
    rf.J = {-m, 1.0, -params.alpha, -1.0};
    rf.b = {-c, params.beta};
    rf.eigen = eigen_of(rf.J);
    double det = rf.J.det();
    if (std::fabs(det) > 1e-12 * (1.0 + std::fabs(rf.J.trace()))) {
        // J eq = -b
        rf.equilibrium = Vec2{(-rf.J.d * rf.b.x + rf.J.b * rf.b.y) / det,
                              (rf.J.c * rf.b.x - rf.J.a * rf.b.y) / det};
    }
    return rf;
}

namespace {

double sampling_step(const RegionFlow& rf) {
    if (rf.eigen.type == EigenData::Type::ComplexPair)
        return M_PI / (4.0 * rf.eigen.omega);
    double rate = std::max(std::fabs(rf.eigen.l1), std::fabs(rf.eigen.l2));
    return 0.25 / std::max(rate, 1e-3);
}

}  // namespace

CrossEvent boundary_crossing(const RegionFlow& rf, Vec2 p0, double x_lo, double x_hi,
                             const Tolerances& tol) {
    CrossEvent ev;
    bool check_eq = rf.equilibrium && rf.equilibrium->x >= x_lo && rf.equilibrium->x <= x_hi;
    if (check_eq && norm(p0 - *rf.equilibrium) < 1e-13) {
        ev.terminal = CrossEvent::Terminal::ConvergedToEquilibrium;
        ev.exit_point = p0;
        return ev;
    }
    if (check_eq && rf.eigen.type == EigenData::Type::RealDistinct && rf.eigen.l1 > 0.0 &&
        rf.eigen.l2 < 0.0) {
        // Saddle in the strip: a start on the stable subspace converges under
        // the exact dynamics, but roundoff in the flow formula would seed the
        // unstable direction. Decompose the offset instead of marching.
        Vec2 u = p0 - *rf.equilibrium;
        Vec2 vu{rf.J.b, rf.eigen.l1 - rf.J.a};  // (J - l I) v = 0
        Vec2 vs{rf.J.b, rf.eigen.l2 - rf.J.a};
        double det = vu.x * vs.y - vu.y * vs.x;
        if (std::fabs(det) > 1e-300) {
            double cu = (u.x * vs.y - u.y * vs.x) / det;  // unstable component
            if (std::fabs(cu) * norm(vu) <= 1e-12 * norm(u)) {
                ev.terminal = CrossEvent::Terminal::ConvergedToEquilibrium;
                ev.exit_point = p0;
                return ev;
            }
        }
    }

    const double h = sampling_step(rf);
    const int sub = 4;
    const long max_steps = 2'000'000;

    // Entry points sit exactly on a sewing line; a bound only counts as a
    // crossing once the orbit has been seen strictly inside it.
    bool armed_hi = p0.x < x_hi - 10.0 * tol.crossing;
    bool armed_lo = p0.x > x_lo + 10.0 * tol.crossing;

    // Bisection between an inside time and a beyond time, then Newton polish.
    auto resolve = [&](double t_in, double t_out, double bound, bool left) {
        double t_lo = t_in, t_hi = t_out;
        Vec2 ph = rf.flow(p0, t_hi);
        for (int it = 0; it < 200 && std::fabs(ph.x - bound) > tol.crossing; ++it) {
            double tm = 0.5 * (t_lo + t_hi);
            Vec2 pm = rf.flow(p0, tm);
            bool beyond = left ? pm.x <= bound : pm.x >= bound;
            if (beyond) {
                t_hi = tm;
                ph = pm;
            } else {
                t_lo = tm;
            }
        }
        if (std::fabs(ph.x - bound) > 1e3 * tol.crossing)
            throw Error(ErrorKind::ToleranceExhausted,
                        "near-tangent boundary crossing at t ~ " + std::to_string(t_hi));
        // Newton polish; brings |x - bound| to roundoff unless tangent.
        for (int it = 0; it < 3; ++it) {
            double xdot = rf.field(ph).x;
            if (std::fabs(xdot) < 1e-10) break;
            t_hi -= (ph.x - bound) / xdot;
            ph = rf.flow(p0, t_hi);
        }
        ev.tau = std::max(t_hi, 0.0);
        ev.exit_point = {bound, ph.y};
        ev.left = left;
        ev.tangent = std::fabs(rf.field(ph).x) < 1e-10;
        ev.terminal = CrossEvent::Terminal::Crossed;
        return ev;
    };

    // A narrow excursion beyond a bound can fall between two samples that
    // are both inside. When x_dot flips sign toward a bound and the tangent
    // lines at the interval ends meet at or beyond it, refine the extremum
    // of x(t) and test it explicitly.
    auto extremum_check =
        [&](double t1, Vec2 p1, double d1, double t2, Vec2 p2, double d2, double bound,
            bool left) -> std::optional<CrossEvent> {
        double toward1 = left ? -d1 : d1, toward2 = left ? -d2 : d2;
        if (!(toward1 > 0.0 && toward2 < 0.0)) return std::nullopt;
        // Tangent-line intersection bounds the hump height for this arc shape.
        double denom = d1 - d2;
        if (std::fabs(denom) < 1e-300) return std::nullopt;
        double tx = (p2.x - p1.x + d1 * t1 - d2 * t2) / denom;
        double x_int = p1.x + d1 * (tx - t1);
        bool may_reach = left ? x_int <= bound + 1e3 * tol.crossing
                              : x_int >= bound - 1e3 * tol.crossing;
        if (!may_reach) return std::nullopt;
        // Locate the extremum: x_dot changes sign once on [t1, t2].
        double a = t1, b = t2;
        for (int it = 0; it < 80; ++it) {
            double tm = 0.5 * (a + b);
            double dm = rf.field(rf.flow(p0, tm)).x;
            if ((left ? -dm : dm) > 0.0)
                a = tm;
            else
                b = tm;
        }
        double t_ext = 0.5 * (a + b);
        Vec2 p_ext = rf.flow(p0, t_ext);
        double over = left ? bound - p_ext.x : p_ext.x - bound;
        if (over < -tol.crossing) return std::nullopt;  // hump stays inside
        if (over <= tol.crossing) {
            // Grazing touch: report a tangent crossing at the extremum.
            ev.tau = t_ext;
            ev.exit_point = {bound, p_ext.y};
            ev.left = left;
            ev.tangent = true;
            ev.terminal = CrossEvent::Terminal::Crossed;
            return ev;
        }
        return resolve(t1, t_ext, bound, left);
    };

    double t_prev = 0.0;
    double t_last = 0.0;
    Vec2 p_last = p0;
    double d_last = rf.field(p0).x;
    for (long step = 1; step <= max_steps; ++step) {
        for (int j = 1; j <= sub; ++j) {
            double t = t_prev + h * j / sub;
            Vec2 p = rf.flow(p0, t);
            double d = rf.field(p).x;
            if (p.x < x_hi - 10.0 * tol.crossing) armed_hi = true;
            if (p.x > x_lo + 10.0 * tol.crossing) armed_lo = true;
            double bound = 0.0;
            bool out = false, left = false;
            // An unarmed bound still counts once the orbit is clearly beyond
            // it: a grazing excursion can dip back out between samples.
            if (std::isfinite(x_hi) && p.x >= x_hi - tol.crossing &&
                (armed_hi || p.x > x_hi + 10.0 * tol.crossing)) {
                bound = x_hi;
                out = true;
            } else if (std::isfinite(x_lo) && p.x <= x_lo + tol.crossing &&
                       (armed_lo || p.x < x_lo - 10.0 * tol.crossing)) {
                bound = x_lo;
                out = true;
                left = true;
            }
            if (out) return resolve(t_last, t, bound, left);
            if (armed_hi && std::isfinite(x_hi)) {
                auto hit = extremum_check(t_last, p_last, d_last, t, p, d, x_hi, false);
                if (hit) return *hit;
            }
            if (armed_lo && std::isfinite(x_lo)) {
                auto hit = extremum_check(t_last, p_last, d_last, t, p, d, x_lo, true);
                if (hit) return *hit;
            }
            if (check_eq && norm(p - *rf.equilibrium) < 1e-13) {
                ev.terminal = CrossEvent::Terminal::ConvergedToEquilibrium;
                ev.tau = t;
                ev.exit_point = p;
                return ev;
            }
            if (norm(p) > 1e9) {
                ev.terminal = CrossEvent::Terminal::Unbounded;
                ev.tau = t;
                ev.exit_point = p;
                return ev;
            }
            t_last = t;
            p_last = p;
            d_last = d;
        }
        t_prev += h;
    }
    throw Error(ErrorKind::ToleranceExhausted, "no boundary crossing within step budget");
}

}  // namespace plds
