#include "plds/model.hpp"

#include <algorithm>
#include <cmath>

#include "plds/linear_flow.hpp"

namespace plds {

Region PwlCurve::region(int index) const {
    Region r;
    r.index = index;
    if (index > 1) r.x_lo = corners[index - 2].x;
    if (index < num_regions()) r.x_hi = corners[index - 1].x;
    return r;
}

Region PwlCurve::region_of(double x) const {
    // Corner ties resolve to the left strip.
    int idx = 1;
    for (int j = 0; j < 2 * k; ++j)
        if (x > corners[j].x) idx = j + 2;
    return region(idx);
}

double PwlCurve::intercept(int index) const {
    const Vec2& c = index == 1 ? corners.front() : corners[index - 2];
    return c.y - slope(index) * c.x;
}

double PwlCurve::phi(double x) const {
    int idx = region_of(x).index;
    return slope(idx) * x + intercept(idx);
}

PwlCurve build_curve(const std::vector<Vec2>& corners, double k1, double k2) {
    if (corners.empty() || corners.size() % 2 != 0)
        throw Error(ErrorKind::NonMonotone, "corner list must be non-empty and of even length");
    if (k1 <= 0.0 || k2 <= 0.0) throw Error(ErrorKind::BadSign, "k1 and k2 must be positive");

    PwlCurve curve;
    curve.corners = corners;
    curve.k1 = k1;
    curve.k2 = k2;
    curve.k = static_cast<int>(corners.size()) / 2;

    for (size_t j = 1; j < corners.size(); ++j) {
        if (!(corners[j].x > corners[j - 1].x))
            throw Error(ErrorKind::NonMonotone, "corner x-coordinates must be strictly increasing");
        double slope = (corners[j].y - corners[j - 1].y) / (corners[j].x - corners[j - 1].x);
        double want = (j % 2 == 1) ? -k2 : k1;  // odd gap: dropping section
        if (std::fabs(slope - want) > 1e-9 * (1.0 + std::fabs(want)))
            throw Error(ErrorKind::SlopeMismatch, "corner geometry inconsistent with k1/k2");
        if (j % 2 == 1 && !(corners[j - 1].y > corners[j].y))
            throw Error(ErrorKind::SlopeMismatch, "upper corner must lie above lower corner");
    }

    curve.interesting = k2 > 1.0 && (k1 - 1.0) * (k1 - 1.0) < 4.0 * k2;
    return curve;
}

std::pair<double, Region> eval_phi(const PwlCurve& curve, double x) {
    Region r = curve.region_of(x);
    return {curve.slope(r.index) * x + curve.intercept(r.index), r};
}

namespace {

EigenData classify_eigen(const Mat2& J) {
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

SingKind classify_regular(const Mat2& J, const EigenData& e) {
    if (J.det() < 0.0) return SingKind::Saddle;
    bool stable = J.trace() < 0.0;
    if (e.type == EigenData::Type::ComplexPair)
        return stable ? SingKind::StableFocus : SingKind::UnstableFocus;
    return stable ? SingKind::StableNode : SingKind::UnstableNode;
}

Mat2 piece_jacobian(const PwlCurve& curve, const SystemParams& params, int region_index) {
    return {-curve.slope(region_index), 1.0, -params.alpha, -1.0};
}

}  // namespace

std::vector<SingularPoint> find_singular_points(const PwlCurve& curve, const SystemParams& params,
                                                const Tolerances& tol) {
    const double alpha = params.alpha, beta = params.beta;
    const double corner_tol = tol.corner * (1.0 + std::fabs(beta));
    std::vector<SingularPoint> out;

    // Equilibrium segments: alpha = k2 with the zero isocline on a dropping section.
    bool alpha_degenerate = std::fabs(alpha - curve.k2) <= 1e-12 * (1.0 + curve.k2);
    std::vector<bool> segment_region(curve.num_regions() + 1, false);
    if (alpha_degenerate) {
        for (int i = 0; i < curve.k; ++i) {
            const Vec2& up = curve.corners[2 * i];
            double offset = beta - alpha * up.x - up.y;  // constant along the section
            if (std::fabs(offset) <= corner_tol) {
                SingularPoint sp;
                sp.region_index = 2 * i + 2;
                sp.kind = SingKind::EquilibriumSegment;
                sp.segment_extent = {up.x, curve.corners[2 * i + 1].x};
                sp.location = {0.5 * (up.x + curve.corners[2 * i + 1].x),
                               beta - alpha * 0.5 * (up.x + curve.corners[2 * i + 1].x)};
                sp.eigen = classify_eigen(piece_jacobian(curve, params, sp.region_index));
                out.push_back(sp);
                segment_region[sp.region_index] = true;
            } else if (std::fabs(offset) <= 1e3 * corner_tol) {
                throw Error(ErrorKind::DegenerateLine,
                            "alpha = k2 with ambiguous dropping-section coincidence");
            }
        }
    }

    // Sewed singular points on corners.
    std::vector<bool> corner_sewed(2 * curve.k + 1, false);
    for (int j = 1; j <= 2 * curve.k; ++j) {
        const Vec2& c = curve.corners[j - 1];
        if (std::fabs(beta - alpha * c.x - c.y) > corner_tol) continue;
        corner_sewed[j] = true;
        // A corner at the end of an equilibrium segment belongs to the segment.
        bool on_segment = segment_region[j % 2 == 1 ? j + 1 : j];
        if (on_segment) continue;
        SingularPoint sp;
        sp.location = c;
        sp.corner_index = j;
        sp.region_index = j;  // left strip
        Mat2 Jl = piece_jacobian(curve, params, j);
        Mat2 Jr = piece_jacobian(curve, params, j + 1);
        EigenData el = classify_eigen(Jl), er = classify_eigen(Jr);
        sp.eigen = el;
        if (alpha < curve.k2) {
            sp.kind = SingKind::SewedSaddleNode;
        } else if (el.type == EigenData::Type::ComplexPair &&
                   er.type == EigenData::Type::ComplexPair) {
            double s = el.sigma / el.omega + er.sigma / er.omega;
            if (std::fabs(s) <= 1e-9)
                sp.kind = SingKind::SewedCenter;
            else
                sp.kind = s < 0.0 ? SingKind::SewedFocusStable : SingKind::SewedFocusUnstable;
        } else {
            sp.kind = Jl.trace() + Jr.trace() < 0.0 ? SingKind::SewedFocusStable
                                                    : SingKind::SewedFocusUnstable;
        }
        out.push_back(sp);
    }

    // Regular per-piece equilibria.
    for (int idx = 1; idx <= curve.num_regions(); ++idx) {
        if (segment_region[idx]) continue;
        double m = curve.slope(idx);
        if (std::fabs(m + alpha) < 1e-14) continue;  // isocline parallel to the piece
        double x_eq = (beta - curve.intercept(idx)) / (m + alpha);
        Region r = curve.region(idx);
        if (x_eq < r.x_lo || x_eq > r.x_hi) continue;
        // Solutions at a sewed corner are already counted once.
        bool at_corner = false;
        for (int j = idx - 1; j <= idx; ++j) {
            if (j < 1 || j > 2 * curve.k) continue;
            if (corner_sewed[j] && std::fabs(x_eq - curve.corners[j - 1].x) <= 1e-9) at_corner = true;
        }
        if (at_corner) continue;
        SingularPoint sp;
        sp.location = {x_eq, beta - alpha * x_eq};
        sp.region_index = idx;
        Mat2 J = piece_jacobian(curve, params, idx);
        sp.eigen = classify_eigen(J);
        sp.kind = classify_regular(J, sp.eigen);
        out.push_back(sp);
    }

    std::sort(out.begin(), out.end(),
              [](const SingularPoint& a, const SingularPoint& b) { return a.location.x < b.location.x; });
    return out;
}

DiscriminantCurve discriminant_curve(const PwlCurve& curve) {
    DiscriminantCurve dc;
    for (int j = 1; j <= 2 * curve.k; ++j) {
        const Vec2& c = curve.corners[j - 1];
        dc.lines.push_back({j, c.x, c.y, curve.k2});
    }
    return dc;
}

int DiscriminantCurve::expected_count(const PwlCurve& curve, const SystemParams& params) const {
    // Zeros of the piecewise-linear residual r(x) = beta - alpha x - phi(x):
    // one per sign change across the corner-value sequence, padded with the
    // tail signs (+ on the far left, - on the far right). For alpha < k2 this
    // reduces to 1 + 2 * (number of dropping sections strictly crossed).
    int count = 0;
    double prev = 1.0;
    for (const auto& line : lines) {
        double r = params.beta - line.beta_at(params.alpha);
        if (r == 0.0) continue;  // corner coincidence: caller checks on_curve
        if (prev * r < 0.0) ++count;
        prev = r;
    }
    if (prev > 0.0) ++count;  // right tail is negative
    return count;
}

bool DiscriminantCurve::on_curve(const SystemParams& params, double tol_rel) const {
    for (const auto& line : lines)
        if (std::fabs(params.beta - line.beta_at(params.alpha)) <=
            tol_rel * (1.0 + std::fabs(params.beta)))
            return true;
    return false;
}

}  // namespace plds
