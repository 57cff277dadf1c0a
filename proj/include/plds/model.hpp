#pragma once

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "plds/core.hpp"

namespace plds {

// Strip region of the phase plane. Indices run 1..2k+1 left to right;
// odd regions carry ascending sections of phi, even regions dropping ones.
struct Region {
    int index = 1;
    double x_lo = -std::numeric_limits<double>::infinity();
    double x_hi = std::numeric_limits<double>::infinity();

    bool ascending() const { return index % 2 == 1; }
};

struct SystemParams {
    double alpha = 1.0;
    double beta = 1.0;
};

// Piecewise linear characteristic y = phi(x) with k dropping sections.
// Corners alternate upper (odd index) / lower (even index); ascending
// pieces have slope k1 > 0, dropping pieces slope -k2 < 0.
class PwlCurve {
  public:
    std::vector<Vec2> corners;
    double k1 = 1.0;
    double k2 = 1.0;
    int k = 0;
    bool interesting = false;  // k2 > 1 and (k1-1)^2 < 4 k2

    int num_regions() const { return 2 * k + 1; }

    Region region(int index) const;
    // Strip containing x; corner ties resolve to the left strip.
    Region region_of(double x) const;

    // Slope / intercept of the piece extended over region `index`.
    double slope(int index) const { return index % 2 == 1 ? k1 : -k2; }
    double intercept(int index) const;

    double phi(double x) const;
};

PwlCurve build_curve(const std::vector<Vec2>& corners, double k1, double k2);

std::pair<double, Region> eval_phi(const PwlCurve& curve, double x);

enum class SingKind {
    StableFocus,
    StableNode,
    UnstableFocus,
    UnstableNode,
    Saddle,
    SewedFocusStable,
    SewedFocusUnstable,
    SewedCenter,
    SewedSaddleNode,
    EquilibriumSegment,
};

struct EigenData {
    enum class Type { ComplexPair, RealDistinct, RealRepeated } type = Type::ComplexPair;
    double sigma = 0.0, omega = 0.0;  // ComplexPair
    double l1 = 0.0, l2 = 0.0;        // RealDistinct / RealRepeated (l1 == l2)
};

struct SingularPoint {
    Vec2 location;
    int region_index = 0;        // owning strip, or left strip for sewed points
    int corner_index = 0;        // >0 when the point sits on a sewing line
    SingKind kind = SingKind::StableFocus;
    EigenData eigen;
    std::optional<std::pair<double, double>> segment_extent;  // EquilibriumSegment only

    bool is_saddle() const { return kind == SingKind::Saddle; }
    bool is_sewed() const { return corner_index > 0; }
};

std::vector<SingularPoint> find_singular_points(const PwlCurve& curve, const SystemParams& params,
                                                const Tolerances& tol = {});

// Half-line beta = slope * alpha + intercept of the discriminant curve,
// one per corner, meaningful for alpha <= k2.
struct DiscriminantLine {
    int corner_index = 0;
    double slope = 0.0;      // x_j
    double intercept = 0.0;  // y_j
    double alpha_max = 0.0;  // k2

    double beta_at(double alpha) const { return slope * alpha + intercept; }
};

struct DiscriminantCurve {
    std::vector<DiscriminantLine> lines;

    // Expected number of singular points for parameters off the curve.
    int expected_count(const PwlCurve& curve, const SystemParams& params) const;
    // True when (alpha, beta) lies on one of the lines (corner coincidence).
    bool on_curve(const SystemParams& params, double tol_rel = 1e-9) const;
};

DiscriminantCurve discriminant_curve(const PwlCurve& curve);

}  // namespace plds
