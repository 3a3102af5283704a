#include "entrosim/toric_kmc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "entrosim/stats.hpp"

namespace entrosim {

double ground_fraction_flat(const ToricParams& p) {
    const auto w = bath_weights(p.chain());
    return 1.0 / w.w_plus;
}

double ground_fraction_confined(const ToricParams& p) {
    const auto w = bath_weights(p.chain());
    return 1.0 / w.w_minus;
}

RateTable rate_table(const ToricParams& p, bool exact_annihilation) {
    p.validate();
    const double p0f = ground_fraction_flat(p);
    const double p0c = ground_fraction_confined(p);
    RateTable r;
    r.creation = p.gamma0 * p0f * p0f;
    r.diffusion = p.gamma0 * p0c * p0f;
    r.annihilation = exact_annihilation ? p.gamma0 * p0c * p0c : p.gamma0;
    return r;
}

// ---------------------------------------------------------------------------
// SectorTracker

SectorTracker::SectorTracker(const TorusLattice& lat, Sector sector)
    : lat_(&lat), sector_(sector) {
    const auto n_links = static_cast<std::size_t>(lat.links());
    occupied_.assign(static_cast<std::size_t>(lat.stabilizers(sector)), 0);
    link_class_.assign(n_links, 0);
    order_.resize(n_links);
    pos_.resize(n_links);
    for (std::size_t i = 0; i < n_links; ++i) {
        order_[i] = static_cast<Link>(i);
        pos_[i] = static_cast<std::uint32_t>(i);
    }
    b1_ = static_cast<std::uint32_t>(n_links);  // all links start as creation links
    b2_ = static_cast<std::uint32_t>(n_links);
}

std::array<std::int64_t, 3> SectorTracker::class_counts() const {
    const auto n = static_cast<std::int64_t>(order_.size());
    return {static_cast<std::int64_t>(b1_), static_cast<std::int64_t>(b2_) - b1_, n - b2_};
}

Link SectorTracker::pick_in_class(int cls, double u) const {
    std::uint32_t begin = 0, end = 0;
    switch (cls) {
        case 0: begin = 0; end = b1_; break;
        case 1: begin = b1_; end = b2_; break;
        default: begin = b2_; end = static_cast<std::uint32_t>(order_.size()); break;
    }
    const std::uint32_t len = end - begin;
    std::uint32_t k = static_cast<std::uint32_t>(u * static_cast<double>(len));
    if (k >= len) k = len - 1;
    return order_[begin + k];
}

void SectorTracker::move_link(Link l, int from, int to) {
    const std::uint32_t i = pos_[l];
    std::uint32_t target = i;
    if (from == 0 && to == 1) target = --b1_;
    else if (from == 1 && to == 0) target = b1_++;
    else if (from == 1 && to == 2) target = --b2_;
    else if (from == 2 && to == 1) target = b2_++;
    const Link other = order_[target];
    order_[target] = l;
    order_[i] = other;
    pos_[l] = target;
    pos_[other] = i;
    link_class_[l] = static_cast<std::int8_t>(to);
}

void SectorTracker::apply_flip(Link l) {
    const auto stabs = lat_->stabilizers_of_link(sector_, l);
    for (const int s : stabs) {
        const bool now = occupied_[static_cast<std::size_t>(s)] == 0;
        occupied_[static_cast<std::size_t>(s)] = now ? 1 : 0;
        defect_count_ += now ? 1 : -1;
        const int delta = now ? 1 : -1;
        for (const Link m : lat_->links_of_stabilizer(sector_, s)) {
            const int from = link_class_[m];
            move_link(m, from, from + delta);
        }
    }
    const auto mask = lat_->cut_mask(sector_, l);
    parity_[0] ^= mask & 1u;
    parity_[1] ^= (mask >> 1) & 1u;
}

bool SectorTracker::consistent() const {
    const auto n = static_cast<std::uint32_t>(order_.size());
    std::int64_t count = 0;
    for (const auto o : occupied_) count += o;
    if (count != defect_count_) return false;
    for (std::uint32_t i = 0; i < n; ++i) {
        const Link l = order_[i];
        if (pos_[l] != i) return false;
        const auto stabs = lat_->stabilizers_of_link(sector_, l);
        const int cls = occupied_[static_cast<std::size_t>(stabs[0])] +
                        occupied_[static_cast<std::size_t>(stabs[1])];
        if (cls != link_class_[l]) return false;
        const int bucket = i < b1_ ? 0 : (i < b2_ ? 1 : 2);
        if (bucket != cls) return false;
    }
    return true;
}

LinkEvent classify_link_event(const SectorTracker& state, Link l) {
    state.lattice().check_link(l);
    const auto stabs = state.lattice().stabilizers_of_link(state.sector(), l);
    const bool o1 = state.occupied(stabs[0]);
    const bool o2 = state.occupied(stabs[1]);
    if (!o1 && !o2) return LinkEvent::Creation;
    if (o1 && o2) return LinkEvent::Annihilation;
    return o1 ? LinkEvent::DiffusionTo2 : LinkEvent::DiffusionTo1;
}

// ---------------------------------------------------------------------------
// KmcEngine

KmcEngine::KmcEngine(const TorusLattice& lat, const RateTable& rates, std::uint64_t seed,
                     SectorMode mode)
    : rates_(rates), rng_(seed), mode_(mode) {
    trackers_.emplace_back(lat, Sector::X);
    trackers_.emplace_back(lat, Sector::Z);
}

bool KmcEngine::sector_active(Sector s) const {
    if (mode_ == SectorMode::Both) return true;
    return (mode_ == SectorMode::XOnly) == (s == Sector::X);
}

double KmcEngine::sector_rate(const SectorTracker& t) const {
    const auto c = t.class_counts();
    return static_cast<double>(c[0]) * rates_.creation +
           static_cast<double>(c[1]) * rates_.diffusion +
           static_cast<double>(c[2]) * rates_.annihilation;
}

double KmcEngine::total_rate() const {
    double r = 0.0;
    for (const auto& t : trackers_)
        if (sector_active(t.sector())) r += sector_rate(t);
    return r;
}

std::optional<KmcEvent> KmcEngine::step(double t_cap) {
    const double rx = sector_active(Sector::X) ? sector_rate(trackers_[0]) : 0.0;
    const double rz = sector_active(Sector::Z) ? sector_rate(trackers_[1]) : 0.0;
    const double total = rx + rz;
    const double dt = rng_.exponential(total);
    if (time_ + dt > t_cap) {
        time_ = t_cap;
        return std::nullopt;
    }
    time_ += dt;

    Sector sec;
    if (mode_ == SectorMode::Both)
        sec = rng_.uniform() * total < rx ? Sector::X : Sector::Z;
    else
        sec = mode_ == SectorMode::XOnly ? Sector::X : Sector::Z;
    auto& tracker = trackers_[static_cast<int>(sec)];

    const auto c = tracker.class_counts();
    const std::array<double, 3> class_rates = {static_cast<double>(c[0]) * rates_.creation,
                                               static_cast<double>(c[1]) * rates_.diffusion,
                                               static_cast<double>(c[2]) * rates_.annihilation};
    double v = rng_.uniform() * (class_rates[0] + class_rates[1] + class_rates[2]);
    int cls = 2;
    for (int k = 0; k < 2; ++k) {
        if (v < class_rates[k] && c[k] > 0) {
            cls = k;
            break;
        }
        v -= class_rates[k];
    }
    if (c[cls] == 0) cls = c[0] > 0 ? 0 : (c[1] > 0 ? 1 : 2);  // rounding guard

    const Link l = tracker.pick_in_class(cls, rng_.uniform());
    const LinkEvent type = classify_link_event(tracker, l);
    tracker.apply_flip(l);
    counts_[static_cast<int>(type)] += 1;

    if (type == LinkEvent::Annihilation && tracker.vacuum() && tracker.parity_nontrivial() &&
        !failed_) {
        failed_ = true;
        failure_sector_ = sec;
    }
    return KmcEvent{sec, type, l, time_};
}

// ---------------------------------------------------------------------------
// trajectory drivers

TrajectoryOutcome run_trajectory(const TorusLattice& lat, const RateTable& rates,
                                 std::uint64_t seed, double t_max, SectorMode mode) {
    if (!(t_max > 0.0)) throw std::invalid_argument("run_trajectory: t_max must be positive");
    KmcEngine engine(lat, rates, seed, mode);
    TrajectoryOutcome out{};
    out.seed = seed;
    while (true) {
        const auto ev = engine.step(t_max);
        if (!ev) {
            out.failure_time = t_max;
            out.failure_sector = Sector::X;
            out.homology_class = 0;
            out.censored = true;
            break;
        }
        if (engine.failed()) {
            const auto& t = engine.tracker(engine.failure_sector());
            out.failure_time = engine.time();
            out.failure_sector = engine.failure_sector();
            out.homology_class =
                static_cast<std::uint8_t>(t.parity()[0] | (t.parity()[1] << 1));
            out.censored = false;
            break;
        }
    }
    out.n_creation = engine.events(LinkEvent::Creation);
    out.n_diffusion =
        engine.events(LinkEvent::DiffusionTo1) + engine.events(LinkEvent::DiffusionTo2);
    out.n_annihilation = engine.events(LinkEvent::Annihilation);
    return out;
}

TrajectoryOutcome run_trajectory(const ToricParams& p, std::uint64_t seed, double t_max,
                                 SectorMode mode) {
    p.validate();
    const TorusLattice lat(p.L);
    return run_trajectory(lat, rate_table(p), seed, t_max, mode);
}

double steady_state_density(const ToricParams& p, std::uint64_t seed, double t_burn,
                            double t_meas) {
    p.validate();
    if (!(t_burn > 0.0) || !(t_meas > 0.0))
        throw std::invalid_argument("steady_state_density: t_burn and t_meas must be positive");
    const TorusLattice lat(p.L);
    KmcEngine engine(lat, rate_table(p), seed, SectorMode::XOnly);
    while (engine.time() < t_burn)
        if (!engine.step(t_burn)) break;

    const double t_end = t_burn + t_meas;
    double acc = 0.0;
    double t_prev = engine.time();
    while (true) {
        const auto n = static_cast<double>(engine.tracker(Sector::X).defect_count());
        const auto ev = engine.step(t_end);
        acc += n * (engine.time() - t_prev);
        t_prev = engine.time();
        if (!ev) break;
    }
    return acc / (t_meas * static_cast<double>(lat.plaquettes()));
}

// ---------------------------------------------------------------------------
// exact small-torus oracle

SectorGenerator build_sector_generator(const ToricParams& p) {
    p.validate();
    if (p.L > 3) throw std::invalid_argument("build_sector_generator: state space cap is L <= 3");
    const TorusLattice lat(p.L);
    const int n_plaq = lat.plaquettes();
    const std::uint32_t n_masks = 1u << n_plaq;

    SectorGenerator g;
    g.L = p.L;
    g.state_index.assign(static_cast<std::size_t>(n_masks) * 4, -1);
    for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
        if (std::popcount(mask) % 2 != 0) continue;
        for (std::uint32_t par = 0; par < 4; ++par) {
            const std::uint32_t state = (mask << 2) | par;
            g.state_index[state] = static_cast<std::int32_t>(g.states.size());
            g.states.push_back(state);
        }
    }

    const auto rates = rate_table(p);
    const int n = g.n();
    g.matrix.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        const std::uint32_t state = g.states[static_cast<std::size_t>(i)];
        if (g.absorbing(state)) continue;  // absorbing rows stay zero
        const std::uint32_t mask = state >> 2;
        const std::uint32_t par = state & 3u;
        for (Link l = 0; l < static_cast<Link>(lat.links()); ++l) {
            const auto stabs = lat.stabilizers_of_link(Sector::X, l);
            const int occ = ((mask >> stabs[0]) & 1u) + ((mask >> stabs[1]) & 1u);
            const double rate =
                occ == 0 ? rates.creation : (occ == 2 ? rates.annihilation : rates.diffusion);
            const std::uint32_t mask2 = mask ^ (1u << stabs[0]) ^ (1u << stabs[1]);
            const std::uint32_t par2 = par ^ lat.cut_mask(Sector::X, l);
            const int j = g.state_index[(mask2 << 2) | par2];
            g.matrix[static_cast<std::size_t>(i) * n + j] += rate;
            g.matrix[static_cast<std::size_t>(i) * n + i] -= rate;
        }
    }
    return g;
}

namespace {

// dense Ax = b with partial pivoting; destroys a and b
std::vector<double> solve_dense(std::vector<double>& a, std::vector<double>& b, int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = std::abs(a[static_cast<std::size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(a[static_cast<std::size_t>(r) * n + col]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) throw std::runtime_error("solve_dense: singular matrix");
        if (piv != col) {
            for (int k = col; k < n; ++k)
                std::swap(a[static_cast<std::size_t>(piv) * n + k],
                          a[static_cast<std::size_t>(col) * n + k]);
            std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
        }
        const double d = a[static_cast<std::size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = a[static_cast<std::size_t>(r) * n + col] / d;
            if (f == 0.0) continue;
            a[static_cast<std::size_t>(r) * n + col] = 0.0;
            for (int k = col + 1; k < n; ++k)
                a[static_cast<std::size_t>(r) * n + k] -= f * a[static_cast<std::size_t>(col) * n + k];
            b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
        }
    }
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int r = n - 1; r >= 0; --r) {
        double s = b[static_cast<std::size_t>(r)];
        for (int k = r + 1; k < n; ++k)
            s -= a[static_cast<std::size_t>(r) * n + k] * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(r)] = s / a[static_cast<std::size_t>(r) * n + r];
    }
    return x;
}

}  // namespace

double exact_lifetime_small(const ToricParams& p) {
    const auto g = build_sector_generator(p);
    const int n = g.n();

    std::vector<int> transient;
    std::vector<int> tindex(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        if (!g.absorbing(g.states[static_cast<std::size_t>(i)])) {
            tindex[static_cast<std::size_t>(i)] = static_cast<int>(transient.size());
            transient.push_back(i);
        }
    }
    const int m = static_cast<int>(transient.size());

    // (-Q_TT) tau = 1
    std::vector<double> a(static_cast<std::size_t>(m) * m, 0.0);
    std::vector<double> b(static_cast<std::size_t>(m), 1.0);
    for (int r = 0; r < m; ++r) {
        const int i = transient[static_cast<std::size_t>(r)];
        for (int j = 0; j < n; ++j) {
            const int c = tindex[static_cast<std::size_t>(j)];
            if (c < 0) continue;
            a[static_cast<std::size_t>(r) * m + c] = -g.matrix[static_cast<std::size_t>(i) * n + j];
        }
    }
    auto tau = solve_dense(a, b, m);

    const int start = g.state_index[0];  // vacuum, trivial parity
    return tau[static_cast<std::size_t>(tindex[static_cast<std::size_t>(start)])];
}

double exact_stationary_density_small(const ToricParams& p) {
    p.validate();
    if (p.L > 3) throw std::invalid_argument("exact_stationary_density_small: L <= 3");
    const TorusLattice lat(p.L);
    const int n_plaq = lat.plaquettes();
    const std::uint32_t n_masks = 1u << n_plaq;

    // parity-free chain over even defect subsets
    std::vector<std::uint32_t> masks;
    std::vector<std::int32_t> idx(n_masks, -1);
    for (std::uint32_t mask = 0; mask < n_masks; ++mask) {
        if (std::popcount(mask) % 2 == 0) {
            idx[mask] = static_cast<std::int32_t>(masks.size());
            masks.push_back(mask);
        }
    }
    const int n = static_cast<int>(masks.size());
    const auto rates = rate_table(p);
    std::vector<double> q(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        const std::uint32_t mask = masks[static_cast<std::size_t>(i)];
        for (Link l = 0; l < static_cast<Link>(lat.links()); ++l) {
            const auto stabs = lat.stabilizers_of_link(Sector::X, l);
            const int occ = ((mask >> stabs[0]) & 1u) + ((mask >> stabs[1]) & 1u);
            const double rate =
                occ == 0 ? rates.creation : (occ == 2 ? rates.annihilation : rates.diffusion);
            const int j = idx[mask ^ (1u << stabs[0]) ^ (1u << stabs[1])];
            q[static_cast<std::size_t>(i) * n + j] += rate;
            q[static_cast<std::size_t>(i) * n + i] -= rate;
        }
    }
    // pi Q = 0 with sum pi = 1: solve Q^T pi = 0, one redundant row swapped for
    // the normalization
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    std::vector<double> b(static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            a[static_cast<std::size_t>(r) * n + c] =
                r == n - 1 ? 1.0 : q[static_cast<std::size_t>(c) * n + static_cast<std::size_t>(r)];
    b[static_cast<std::size_t>(n - 1)] = 1.0;
    auto pi = solve_dense(a, b, n);

    double mean_defects = 0.0;
    for (int i = 0; i < n; ++i)
        mean_defects += pi[static_cast<std::size_t>(i)] *
                        static_cast<double>(std::popcount(masks[static_cast<std::size_t>(i)]));
    return mean_defects / static_cast<double>(n_plaq);
}

// ---------------------------------------------------------------------------
// scaling suite

namespace {

struct PointSummary {
    std::vector<double> samples;
    long censored = 0;
};

PointSummary run_point(const ToricParams& p, long trajectories, double t_max,
                       std::uint64_t master, std::uint64_t point_key, int workers) {
    const TorusLattice lat(p.L);
    const auto rates = rate_table(p);
    PointSummary s;
    s.samples.assign(static_cast<std::size_t>(trajectories), 0.0);
    std::vector<std::uint8_t> censored(static_cast<std::size_t>(trajectories), 0);

    const int n_workers = workers > 0
                              ? workers
                              : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto body = [&](long begin, long end) {
        for (long t = begin; t < end; ++t) {
            const auto out = run_trajectory(
                lat, rates, stream_seed(master, point_key, static_cast<std::uint64_t>(t)), t_max);
            s.samples[static_cast<std::size_t>(t)] = out.failure_time;
            censored[static_cast<std::size_t>(t)] = out.censored ? 1 : 0;
        }
    };
    if (n_workers <= 1 || trajectories < 2) {
        body(0, trajectories);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (trajectories + n_workers - 1) / n_workers;
        for (int w = 0; w < n_workers; ++w) {
            const long begin = w * chunk;
            const long end = std::min(trajectories, begin + chunk);
            if (begin < end) pool.emplace_back(body, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    for (const auto c : censored) s.censored += c;
    return s;
}

}  // namespace

ScalingReport lifetime_scaling_suite(const ToricParams& p_template, const std::vector<int>& L_grid,
                                     const std::vector<long>& M_grid, long trajectories,
                                     double t_max, std::uint64_t seed, int workers) {
    if (L_grid.empty() || M_grid.empty())
        throw std::invalid_argument("lifetime_scaling_suite: empty grid");
    if (trajectories < 1)
        throw std::invalid_argument("lifetime_scaling_suite: trajectories must be >= 1");

    ScalingReport rep;
    rep.trajectories = trajectories;
    rep.t_max = t_max;
    rep.seed = seed;

    std::vector<PointSummary> summaries;
    for (const int L : L_grid) {
        for (const long M : M_grid) {
            ToricParams p = p_template;
            p.L = L;
            p.M = M;
            p.validate();
            const double key_vals[2] = {static_cast<double>(L), static_cast<double>(M)};
            const std::uint64_t key = hash_doubles(key_vals, 2);
            auto s = run_point(p, trajectories, t_max, seed, key, workers);

            LifetimePoint pt;
            pt.L = L;
            pt.M = M;
            pt.n_trajectories = trajectories;
            pt.n_censored = s.censored;
            const auto mc = bootstrap_mean_ci(s.samples, 400, stream_seed(seed, key, 1u << 20));
            pt.mean = mc.mean;
            pt.ci_lo = mc.ci_lo;
            pt.ci_hi = mc.ci_hi;
            const double p0f = ground_fraction_flat(p);
            pt.expected_defects =
                static_cast<double>(L) * L * (p0f / (1.0 + p0f));
            pt.regime = pt.expected_defects <= 0.5
                            ? "defect_rare"
                            : (pt.expected_defects >= 2.0 ? "finite_density" : "crossover");
            rep.points.push_back(pt);
            summaries.push_back(std::move(s));
        }
    }

    auto point_at = [&](int L, long M) -> std::size_t {
        for (std::size_t i = 0; i < rep.points.size(); ++i)
            if (rep.points[i].L == L && rep.points[i].M == M) return i;
        throw std::logic_error("lifetime_scaling_suite: missing point");
    };

    auto fit_over = [&](const std::vector<double>& xs, const std::vector<std::size_t>& ids,
                        std::uint64_t fit_seed) {
        ExponentFit f{0.0, 0.0, 0.0, false};
        if (ids.size() < 3) return f;
        bool usable = true;
        std::vector<std::vector<double>> samples;
        for (const auto id : ids) {
            if (rep.points[id].n_censored * 2 > rep.points[id].n_trajectories) usable = false;
            samples.push_back(summaries[id].samples);
        }
        if (!usable) return f;
        const auto fr = fit_power_law_resampled(xs, samples, 400, fit_seed);
        f.exponent = fr.exponent;
        f.ci_lo = fr.ci_lo;
        f.ci_hi = fr.ci_hi;
        f.reliable = true;
        return f;
    };

    if (M_grid.size() >= 3) {
        for (const int L : L_grid) {
            std::vector<double> xs;
            std::vector<std::size_t> ids;
            for (const long M : M_grid) {
                xs.push_back(static_cast<double>(M));
                ids.push_back(point_at(L, M));
            }
            rep.alpha_M.emplace_back(L, fit_over(xs, ids, stream_seed(seed, 77, L)));
        }
    }
    if (L_grid.size() >= 3) {
        for (const long M : M_grid) {
            std::vector<double> xs;
            std::vector<std::size_t> ids;
            for (const int L : L_grid) {
                xs.push_back(static_cast<double>(L));
                ids.push_back(point_at(L, M));
            }
            rep.alpha_L.emplace_back(M, fit_over(xs, ids, stream_seed(seed, 78, static_cast<std::uint64_t>(M))));
        }
    }
    return rep;
}

}  // namespace entrosim
