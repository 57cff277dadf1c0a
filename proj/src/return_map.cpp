#include "plds/return_map.hpp"

#include <algorithm>
#include <cmath>

namespace plds {

double zeta_fn(double tau, double sigma, double omega) {
    double wt = omega * tau;
    return (omega * std::cos(wt) - sigma * std::sin(wt) - omega * std::exp(-sigma * tau)) /
           std::sin(wt);
}

double chi_fn(double tau, double sigma, double omega) {
    double wt = omega * tau;
    return (omega * std::cos(wt) + sigma * std::sin(wt) - omega * std::exp(sigma * tau)) /
           std::sin(wt);
}

HalfMapResult half_map_region(double s0, double sigma, double omega, double delta0) {
    if (!(omega > 0.0)) throw Error(ErrorKind::BadSign, "omega must be positive");
    if (!(s0 > 0.0)) throw Error(ErrorKind::BadSign, "S0 must be positive");
    if (delta0 == 0.0) return {s0 * std::exp(M_PI * sigma / omega), M_PI / omega};

    // zeta is positive on part of (pi/omega, 2 pi/omega); the first boundary
    // return sits on the branch falling from +inf, so bracket the first
    // down-crossing of the target there.
    const double target = s0 / delta0;
    const double t_lo = M_PI / omega, t_hi = 2.0 * M_PI / omega;
    const int n_scan = 256;
    double prev_t = t_lo + (t_hi - t_lo) * 1e-9;
    double prev_z = zeta_fn(prev_t, sigma, omega);
    double a = 0.0, b = 0.0;
    bool found = false;
    for (int i = 1; i <= n_scan; ++i) {
        double t = t_lo + (t_hi - t_lo) * (1e-9 + (1.0 - 2e-9) * i / n_scan);
        double z = zeta_fn(t, sigma, omega);
        if (prev_z > target && z <= target) {
            a = prev_t;
            b = t;
            found = true;
            break;
        }
        prev_t = t;
        prev_z = z;
    }
    if (!found)
        throw Error(ErrorKind::NoSolution, "S0 below the range of delta0 * zeta: orbit misses the half-turn");
    for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
        double m = 0.5 * (a + b);
        if (zeta_fn(m, sigma, omega) > target)
            a = m;
        else
            b = m;
    }
    double tau = 0.5 * (a + b);
    return {delta0 * chi_fn(tau, sigma, omega), tau};
}

double equilibrium_segment_map(double s0, double sigma1, double omega1, double delta, double k2) {
    double q = std::exp(M_PI * sigma1 / omega1);
    return s0 * q * q + delta * (k2 - 1.0) * (1.0 + q);
}

double equilibrium_segment_fixed_point(double sigma1, double omega1, double delta, double k2) {
    double q = std::exp(M_PI * sigma1 / omega1);
    return delta * (k2 - 1.0) * (1.0 + q) / (1.0 - q * q);
}

double map_derivative(const SystemCache& sys, const SewnTrajectory& traj, double s0,
                      double s0_bar) {
    if (traj.arcs.empty()) throw Error(ErrorKind::OpenTrajectory, "empty trajectory");
    double weighted = 0.0;
    for (const Arc& a : traj.arcs) weighted += sys.flow(a.region).J.trace() * a.tau;
    return s0 / s0_bar * std::exp(weighted);
}

ReturnMap::ReturnMap(std::shared_ptr<const SystemCache> sys, Section section, int max_crossings)
    : sys_(std::move(sys)), section_(section), max_crossings_(max_crossings) {}

MapSample ReturnMap::eval(double s0) const {
    MapSample sample;
    sample.s0 = s0;
    Vec2 start = section_point(sys_->curve(), section_, s0);
    SectionHit hit;
    try {
        hit = sew_until_section(*sys_, start, section_, max_crossings_);
    } catch (const Error&) {
        return sample;  // ok = false
    }
    if (!hit.hit) return sample;
    sample.ok = true;
    sample.s0_bar = hit.s;
    sample.period = hit.traj.total_time();
    sample.branch = hit.traj.max_region <= 2 * sys_->curve().k ? Branch::Xi : Branch::Psi;
    for (const Arc& a : hit.traj.arcs)
        if (sample.regions.empty() || sample.regions.back() != a.region)
            sample.regions.push_back(a.region);
    sample.deriv = map_derivative(*sys_, hit.traj, s0, hit.s);
    return sample;
}

void ReturnMap::sample_range(double s_lo, double s_hi, int n) {
    if (n < 2 || !(s_lo > 0.0) || !(s_hi > s_lo))
        throw Error(ErrorKind::BadRange, "return-map range must be positive with n >= 2");
    samples_.clear();
    double r = std::log(s_hi / s_lo);
    for (int i = 0; i < n; ++i)
        samples_.push_back(eval(s_lo * std::exp(r * i / (n - 1))));
    locate_s_star();

    // The continuum of closed orbits around a sewed center fills only the
    // small-circuit annulus; full circuits outside it still contract.
    identity_ = true;
    int n_xi = 0;
    for (const auto& s : samples_) {
        if (!s.ok || s.branch != Branch::Xi) continue;
        ++n_xi;
        if (std::fabs(s.s0_bar - s.s0) > sys_->tol().center * (1.0 + s.s0)) identity_ = false;
    }
    if (n_xi == 0) identity_ = false;
}

void ReturnMap::locate_s_star() {
    s_star_.reset();
    for (size_t i = 1; i < samples_.size(); ++i) {
        const MapSample& a = samples_[i - 1];
        const MapSample& b = samples_[i];
        if (!a.ok || !b.ok || a.branch == b.branch) continue;
        double lo = a.s0, hi = b.s0;
        Branch lo_branch = a.branch;
        while (hi - lo > 1e-10 * (1.0 + hi)) {
            double m = 0.5 * (lo + hi);
            MapSample ms = eval(m);
            if (!ms.ok) break;
            if (ms.branch == lo_branch)
                lo = m;
            else
                hi = m;
        }
        s_star_ = 0.5 * (lo + hi);
        return;
    }
}

ReturnMap build_return_map(std::shared_ptr<const SystemCache> sys, Section section, double s_lo,
                           double s_hi, int n) {
    ReturnMap rm(std::move(sys), section);
    rm.sample_range(s_lo, s_hi, n);
    return rm;
}

namespace {

LimitCycle cycle_from_sample(const Section& section, const MapSample& s) {
    LimitCycle c;
    c.section = section;
    c.s_fixed = s.s0;
    c.deriv = s.deriv;
    c.period = s.period;
    std::vector<int> regs = s.regions;
    std::sort(regs.begin(), regs.end());
    regs.erase(std::unique(regs.begin(), regs.end()), regs.end());
    c.regions_spanned = regs;
    c.small = regs.size() <= 2;
    if (std::fabs(s.deriv - 1.0) <= 1e-4) {
        c.multiplicity_hint = 2;
        c.stability = Stability::SemiStable;
    } else {
        c.stability = s.deriv < 1.0 ? Stability::Stable : Stability::Unstable;
    }
    return c;
}

}  // namespace

std::vector<LimitCycle> find_limit_cycles(const ReturnMap& rm) {
    std::vector<LimitCycle> cycles;
    if (rm.identity_flag()) return cycles;  // continuum of closed orbits
    const auto& samples = rm.samples();
    const double tol_id = rm.sys().tol().center;
    auto g_of = [](const MapSample& s) { return s.s0_bar - s.s0; };
    auto noise = [&](const MapSample& s) {
        return std::fabs(g_of(s)) <= tol_id * (1.0 + s.s0);
    };

    // Samples whose deviation from the bisectrix is resolvable; sign changes
    // are meaningful only between those.
    std::vector<size_t> sig;
    for (size_t i = 0; i < samples.size(); ++i)
        if (samples[i].ok && !noise(samples[i])) sig.push_back(i);

    for (size_t t = 1; t < sig.size(); ++t) {
        const MapSample& a = samples[sig[t - 1]];
        const MapSample& b = samples[sig[t]];
        if (sig[t] - sig[t - 1] > 1 && [&] {
                // a non-returning gap between the endpoints breaks the bracket
                for (size_t i = sig[t - 1] + 1; i < sig[t]; ++i)
                    if (!samples[i].ok) return true;
                return false;
            }())
            continue;
        double ga = g_of(a), gb = g_of(b);
        if (ga * gb >= 0.0) continue;
        double lo = a.s0, hi = b.s0;
        MapSample end_lo = a, end_hi = b;
        bool broke = false;
        for (int it = 0; it < 200 && hi - lo > 1e-11 * (1.0 + hi); ++it) {
            double m = 0.5 * (lo + hi);
            MapSample ms = rm.eval(m);
            if (!ms.ok) {
                broke = true;
                break;
            }
            if (g_of(end_lo) * g_of(ms) <= 0.0) {
                hi = m;
                end_hi = ms;
            } else {
                lo = m;
                end_lo = ms;
            }
        }
        // A separatrix discontinuity also flips the sign. A genuine fixed
        // point has the map continuous across the converged bracket: both
        // endpoint circuits take the same branch through the same regions.
        if (broke || !end_lo.ok || !end_hi.ok) continue;
        if (end_lo.branch != end_hi.branch || end_lo.regions != end_hi.regions) continue;
        MapSample best =
            std::fabs(g_of(end_lo)) <= std::fabs(g_of(end_hi)) ? end_lo : end_hi;
        cycles.push_back(cycle_from_sample(rm.section(), best));
    }

    // Tangency pass: an interior |g| minimum between same-sign resolvable
    // neighbours, with the map nearly tangent to the bisectrix.
    for (size_t i = 1; i + 1 < samples.size(); ++i) {
        const MapSample& a = samples[i - 1];
        const MapSample& b = samples[i];
        const MapSample& c = samples[i + 1];
        if (!a.ok || !b.ok || !c.ok || noise(a) || noise(c)) continue;
        double ga = g_of(a), gb = g_of(b), gc = g_of(c);
        if (ga * gc <= 0.0) continue;
        if (std::fabs(gb) >= std::fabs(ga) || std::fabs(gb) >= std::fabs(gc)) continue;
        if (std::fabs(b.deriv - 1.0) > 1e-4 || std::fabs(gb) > 1e-7 * (1.0 + b.s0)) continue;
        bool dup = false;
        for (const auto& prev : cycles)
            dup = dup || std::fabs(prev.s_fixed - b.s0) <= 1e-6 * (1.0 + b.s0);
        if (dup) continue;
        LimitCycle cyc = cycle_from_sample(rm.section(), b);
        cyc.multiplicity_hint = 2;
        cyc.stability = Stability::SemiStable;
        cycles.push_back(cyc);
    }
    return cycles;
}

}  // namespace plds
