#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "plds/sewing.hpp"

namespace plds {

// Half-turn transition functions for a focus at distance delta0 behind the
// boundary, S measured from the corner: S0 = delta0 * zeta(tau),
// S1 = delta0 * chi(tau).
double zeta_fn(double tau, double sigma, double omega);
double chi_fn(double tau, double sigma, double omega);

struct HalfMapResult {
    double s1 = 0.0;
    double tau = 0.0;
};

// Single-region half-turn map S0 (below corner) -> S1 (above corner).
// delta0 = 0 degenerates to S1 = S0 * exp(pi sigma / omega).
// Throws NoSolution when the orbit misses the half-turn (spirals into the
// focus instead of reaching the boundary again).
HalfMapResult half_map_region(double s0, double sigma, double omega, double delta0);

// Affine map of the equilibrium-segment regime; delta is the width of the
// dropping-section strip.
double equilibrium_segment_map(double s0, double sigma1, double omega1, double delta, double k2);
double equilibrium_segment_fixed_point(double sigma1, double omega1, double delta, double k2);

enum class Branch { Xi, Psi };

struct MapSample {
    double s0 = 0.0;
    double s0_bar = 0.0;
    double deriv = 0.0;
    Branch branch = Branch::Xi;
    bool ok = false;  // false: non-returning sample
    std::vector<int> regions;
    double period = 0.0;
};

// Analytic derivative of the return map along a recorded circuit:
// (S0/S0_bar) * exp(sum over arcs of trace(region) * tau).
double map_derivative(const SystemCache& sys, const SewnTrajectory& traj, double s0, double s0_bar);

class ReturnMap {
  public:
    ReturnMap(std::shared_ptr<const SystemCache> sys, Section section, int max_crossings = 64);

    const Section& section() const { return section_; }
    const SystemCache& sys() const { return *sys_; }
    const std::vector<MapSample>& samples() const { return samples_; }
    std::optional<double> s_star() const { return s_star_; }
    bool identity_flag() const { return identity_; }  // continuum of closed orbits

    // Evaluate the first-return map at one coordinate.
    MapSample eval(double s0) const;

    void sample_range(double s_lo, double s_hi, int n);  // log-spaced sampling

  private:
    std::shared_ptr<const SystemCache> sys_;
    Section section_;
    int max_crossings_;
    std::vector<MapSample> samples_;
    std::optional<double> s_star_;
    bool identity_ = false;

    void locate_s_star();
    friend ReturnMap build_return_map(std::shared_ptr<const SystemCache>, Section, double, double,
                                      int);
};

ReturnMap build_return_map(std::shared_ptr<const SystemCache> sys, Section section, double s_lo,
                           double s_hi, int n);

enum class Stability { Stable, Unstable, SemiStable };

struct LimitCycle {
    Section section;
    double s_fixed = 0.0;
    Stability stability = Stability::Stable;
    int multiplicity_hint = 1;
    bool small = false;  // spans at most two adjoining regions
    std::vector<int> regions_spanned;
    double period = 0.0;
    double deriv = 0.0;
};

std::vector<LimitCycle> find_limit_cycles(const ReturnMap& rm);

}  // namespace plds
