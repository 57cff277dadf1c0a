#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "plds/return_map.hpp"

namespace plds {

// Root of sigma1/omega1 + sigma2/omega2 = 0 in alpha; at this value the sewed
// return map through a corner is the identity. Throws NoRoot when the focus
// conditions admit no center.
double alpha_star(double k1, double k2);

// The closed form printed alongside the center condition; kept for reporting,
// known to disagree with the focus-existence constraint.
double alpha_star_printed(double k1, double k2);

struct SeparatrixSlopes {
    double exact_alpha = 0.0;  // unstable-separatrix slope, lambda_u - k2
    double exact_omega = 0.0;  // stable-separatrix slope, lambda_s - k2
    double firstorder_alpha = 0.0;
    double firstorder_omega = 0.0;
    Vec2 eigvec_unstable;
    Vec2 eigvec_stable;
};

SeparatrixSlopes separatrix_slopes(double k2, double alpha);

struct BetaInvarianceRow {
    double kappa = 0.0;
    double delta0 = 0.0;   // region-I equilibrium depth
    double s0_prime = 0.0; // measured segment below the corner
    double s1 = 0.0;       // analytic region-I image of s0_prime
    double s1_prime = 0.0; // measured segment above the corner
    double ratio = 0.0;    // s1 / s1_prime
};

std::vector<BetaInvarianceRow> beta_invariance_check(const PwlCurve& curve, double alpha,
                                                     const std::vector<double>& kappas);

// Signed separatrix gap at the section left of the saddle's region; zero at a
// homoclinic loop. Returns nullopt when either branch fails to reach the section.
std::optional<double> separatrix_gap(const SystemCache& sys, const SingularPoint& saddle);

using BetaRule = std::function<double(double)>;

double find_separatrix_loop(const PwlCurve& curve, const BetaRule& beta_rule, double alpha_lo,
                            double alpha_hi, double tol_alpha = 1e-9);

enum class CellFlag {
    SewedCenter,
    EquilibriumSegment,
    SeparatrixLoopNear,
    DoubleCycleNear,
    NonReturning,
};

struct CellReport {
    double alpha = 0.0;
    double beta = 0.0;
    int n_singular = 0;
    int n_small = 0;
    int n_big = 0;
    std::set<CellFlag> flags;
    std::vector<LimitCycle> cycles;
    // Small-cycle count per adjacent-region pair (at most one can exist),
    // keyed by the lower region index.
    std::vector<std::pair<int, int>> small_per_pair;
};

struct ScanOptions {
    int samples_per_section = 60;
    double s_min_rel = 1e-4;
    double s_max_rel = 30.0;
    int max_crossings = 64;
    int threads = 0;  // 0: hardware concurrency
};

struct BifurcationDiagram {
    std::vector<double> alpha_grid;
    std::vector<double> beta_grid;
    std::vector<CellReport> cells;  // row-major: beta outer, alpha inner
    DiscriminantCurve discriminant;
    double alpha_star_value = 0.0;  // NaN when no center exists

    const CellReport& cell(int ia, int ib) const {
        return cells[static_cast<size_t>(ib) * alpha_grid.size() + ia];
    }
};

CellReport analyze_cell(const PwlCurve& curve, const SystemParams& params,
                        const ScanOptions& opts = {});

BifurcationDiagram scan_diagram(const PwlCurve& curve, double alpha_lo, double alpha_hi,
                                double beta_lo, double beta_hi, int na, int nb,
                                const ScanOptions& opts = {});

struct VerifyReport {
    bool pass = false;
    int max_total = 0;
    int bound = 0;
    int max_small = 0;
    int max_big = 0;
    struct Violation {
        double alpha, beta;
        int n_small, n_big;
        std::string reason;
    };
    std::vector<Violation> violations;
};

VerifyReport verify_bound(const BifurcationDiagram& diagram, int k);

std::string flag_name(CellFlag f);

}  // namespace plds
