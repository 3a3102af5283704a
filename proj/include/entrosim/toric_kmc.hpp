#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entrosim/lattice.hpp"
#include "entrosim/rng.hpp"
#include "entrosim/toric_static.hpp"

namespace entrosim {

// Per-link jump rates. The resonance argument leaves exactly three channels:
// a link flip is a pair creation if both adjacent stabilizers are clean, an
// annihilation if both are defective, a hop otherwise.
//   creation     = gamma0 * p0_flat^2
//   diffusion    = gamma0 * p0_conf * p0_flat
//   annihilation = gamma0           (optionally * p0_conf^2, see rate_table)
// with p0_flat = (1-e^{-beta eps})/(1-e^{-beta eps M}) and p0_conf the J
// analogue. On the saturated plateau these reduce to gamma0/M^2, gamma0/M,
// gamma0.
struct RateTable {
    double creation;
    double diffusion;
    double annihilation;
};

// p(0|flat): probability that a reservoir in the shallow potential sits in its
// ground state. Equals 1/w_plus.
double ground_fraction_flat(const ToricParams& p);
// p(0|confined): same for the steep potential; 1/w_minus.
double ground_fraction_confined(const ToricParams& p);

// exact_annihilation multiplies the annihilation rate by p(0,0|confined) =
// p0_conf^2 instead of keeping the bare gamma0. Off by default.
RateTable rate_table(const ToricParams& p, bool exact_annihilation = false);

enum class LinkEvent { Creation, DiffusionTo1, DiffusionTo2, Annihilation };

enum class SectorMode { Both, XOnly, ZOnly };

// Defect configuration of one error sector plus everything the Gillespie loop
// needs in O(1) per event: per-class link buckets (0/1/2 defective endpoints
// stored as three contiguous segments of a permutation array) and the
// accumulated homology crossing parities.
class SectorTracker {
public:
    SectorTracker(const TorusLattice& lat, Sector sector);

    Sector sector() const { return sector_; }
    int link_class(Link l) const { return link_class_[l]; }

    // bucket counts: creation links, hop links, annihilation links
    std::array<std::int64_t, 3> class_counts() const;
    Link pick_in_class(int cls, double u) const;

    // flip both endpoint stabilizers of l and update buckets and parities
    void apply_flip(Link l);

    bool occupied(int stabilizer) const { return occupied_[stabilizer] != 0; }
    std::int64_t defect_count() const { return defect_count_; }
    std::array<std::uint8_t, 2> parity() const { return parity_; }
    bool vacuum() const { return defect_count_ == 0; }
    bool parity_nontrivial() const { return parity_[0] || parity_[1]; }

    // full recount of classes and buckets; used by consistency tests
    bool consistent() const;

    const TorusLattice& lattice() const { return *lat_; }

private:
    void move_link(Link l, int from, int to);

    const TorusLattice* lat_;
    Sector sector_;
    std::vector<std::uint8_t> occupied_;
    std::vector<std::int8_t> link_class_;
    std::vector<Link> order_;           // links partitioned by class
    std::vector<std::uint32_t> pos_;    // inverse permutation
    std::uint32_t b1_, b2_;             // segment boundaries
    std::array<std::uint8_t, 2> parity_{0, 0};
    std::int64_t defect_count_ = 0;
};

LinkEvent classify_link_event(const SectorTracker& state, Link l);

struct TrajectoryOutcome {
    double failure_time;
    Sector failure_sector;
    std::uint8_t homology_class;  // bit 0: x winding, bit 1: y winding
    std::uint64_t n_creation;
    std::uint64_t n_diffusion;
    std::uint64_t n_annihilation;
    std::uint64_t seed;
    bool censored;
};

struct KmcEvent {
    Sector sector;
    LinkEvent type;
    Link link;
    double time;
};

// Continuous-time Gillespie process over one or both sectors. Event cost is
// O(1) independent of L and M: classes are sampled by aggregate rate, links
// uniformly inside their bucket segment.
class KmcEngine {
public:
    KmcEngine(const TorusLattice& lat, const RateTable& rates, std::uint64_t seed,
              SectorMode mode = SectorMode::Both);

    // advance one event; returns nullopt if the event would land past t_cap
    // (time is then clamped to t_cap)
    std::optional<KmcEvent> step(double t_cap);

    double time() const { return time_; }
    const SectorTracker& tracker(Sector s) const { return trackers_[static_cast<int>(s)]; }
    SectorTracker& tracker(Sector s) { return trackers_[static_cast<int>(s)]; }

    // set after an annihilation closes a nontrivially wound chain
    bool failed() const { return failed_; }
    Sector failure_sector() const { return failure_sector_; }

    double total_rate() const;
    std::uint64_t events(LinkEvent t) const { return counts_[static_cast<int>(t)]; }

private:
    double sector_rate(const SectorTracker& t) const;
    bool sector_active(Sector s) const;

    std::vector<SectorTracker> trackers_;
    RateTable rates_;
    Rng rng_;
    SectorMode mode_;
    double time_ = 0.0;
    bool failed_ = false;
    Sector failure_sector_ = Sector::X;
    std::array<std::uint64_t, 4> counts_{0, 0, 0, 0};
};

// Run until the first time a sector returns to vacuum carrying a nontrivial
// winding parity; censored at t_max. Deterministic in (p, seed, mode).
TrajectoryOutcome run_trajectory(const ToricParams& p, std::uint64_t seed, double t_max,
                                 SectorMode mode = SectorMode::Both);
TrajectoryOutcome run_trajectory(const TorusLattice& lat, const RateTable& rates,
                                 std::uint64_t seed, double t_max,
                                 SectorMode mode = SectorMode::Both);

// Time-averaged defect count per plaquette over [t_burn, t_burn + t_meas] of a
// single-sector run; failures do not stop the clock.
double steady_state_density(const ToricParams& p, std::uint64_t seed, double t_burn,
                            double t_meas);

// Exact sector Markov chain over (even defect subset, winding parity pair),
// small tori only. Shared by the mean-first-passage oracle and tests.
struct SectorGenerator {
    int L;
    std::vector<std::uint32_t> states;       // state = mask * 4 + parity
    std::vector<std::int32_t> state_index;   // inverse map, -1 where invalid
    std::vector<double> matrix;              // row-major n x n, rows sum to 0

    int n() const { return static_cast<int>(states.size()); }
    bool absorbing(std::uint32_t state) const { return (state >> 2) == 0 && (state & 3u) != 0; }
};

SectorGenerator build_sector_generator(const ToricParams& p);

// Mean first passage time from (vacuum, trivial) to (vacuum, nontrivial) by a
// dense linear solve on the generator above. L in {2, 3}.
double exact_lifetime_small(const ToricParams& p);

// Stationary defect density of the sector chain (parities traced out),
// computed from the exact generator. Oracle for steady_state_density.
double exact_stationary_density_small(const ToricParams& p);

struct LifetimePoint {
    int L;
    long M;
    double mean;        // mean of min(T, t_max); lower bound when censored
    double ci_lo;       // bootstrap 95% CI of the mean
    double ci_hi;
    long n_trajectories;
    long n_censored;
    double expected_defects;  // L^2 p0_flat/(1+p0_flat): regime diagnostic
    std::string regime;       // "defect_rare", "finite_density", "crossover"
};

struct ExponentFit {
    double exponent;
    double ci_lo;
    double ci_hi;
    bool reliable;  // false when censoring or sample size voids the fit
};

struct ScalingReport {
    std::vector<LifetimePoint> points;
    std::vector<std::pair<int, ExponentFit>> alpha_M;   // per fixed L, fit over M grid
    std::vector<std::pair<long, ExponentFit>> alpha_L;  // per fixed M, fit over L grid
    long trajectories;
    double t_max;
    std::uint64_t seed;
};

// Lifetime means over the (L_grid x M_grid) product with bootstrap CIs, plus
// log-log exponent fits in M at fixed L and in L at fixed M.
ScalingReport lifetime_scaling_suite(const ToricParams& p_template,
                                     const std::vector<int>& L_grid,
                                     const std::vector<long>& M_grid, long trajectories,
                                     double t_max, std::uint64_t seed, int workers = 0);

}  // namespace entrosim
