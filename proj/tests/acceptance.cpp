// Acceptance suite: one checked criterion per line, selectable by id.
// Exit code = number of failed criteria.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "entrosim/bkt.hpp"
#include "entrosim/ising.hpp"
#include "entrosim/rng.hpp"
#include "entrosim/stats.hpp"
#include "entrosim/sweep.hpp"
#include "entrosim/toric_kmc.hpp"
#include "entrosim/toric_static.hpp"

using namespace entrosim;

namespace {

struct Result {
    std::string id;
    bool pass;
    std::string detail;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] =
            lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

// --------------------------------------------------------------------------
// C1: transfer-matrix correlator vs exhaustive enumeration

Result c1() {
    Rng rng(20240601);
    double worst = 0.0;
    for (int draw = 0; draw < 50; ++draw) {
        const double beta = 0.1 + 2.0 * rng.uniform();
        const double eps = 0.05 + 1.5 * rng.uniform();
        const double J = 0.2 + 3.0 * rng.uniform();
        const double jp = rng.uniform();
        for (long M = 1; M <= 4; ++M) {
            const ChainParams p{beta, eps, J, M, jp};
            for (int L = 2; L <= 8; ++L) {
                for (int r = 0; r <= L; ++r) {
                    const double a = finite_chain_correlator(p, L, r);
                    const double b = brute_force_correlator(p, L, r);
                    const double err =
                        std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
                    worst = std::max(worst, err);
                }
            }
        }
    }
    return {"C1", worst <= 1e-12,
            "ising oracle equivalence, max rel err " + fmt(worst) + " (tol 1e-12; relative "
            "floor 1 for near-cancelling correlators)"};
}

// --------------------------------------------------------------------------
// C2: three-regime correlation length scan at M=50, eps=1e-3, J=50

Result c2() {
    const ChainParams p{1.0, 1e-3, 50.0, 50};
    const auto rows = xi_scan(p, log_spaced(1e-3, 1e3, 601));

    // (a) one decade of temperature with xi within 5% of M/2 = 25
    bool plateau_found = false;
    double plateau_lo = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        bool ok = true;
        std::size_t j = i;
        for (; j < rows.size(); ++j) {
            if (rows[j].inv_beta <= rows[i].inv_beta / 10.0) break;
            if (std::abs(rows[j].xi - 25.0) > 0.05 * 25.0) {
                ok = false;
                break;
            }
        }
        if (ok && j < rows.size() && rows[j].inv_beta <= rows[i].inv_beta / 10.0) {
            plateau_found = true;
            plateau_lo = rows[i].inv_beta / 10.0;
            break;
        }
    }

    // (b) best local log-log slope of xi vs 1/beta in the growth window
    double best_slope = 0.0;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const double beta_i = 1.0 / rows[i].inv_beta;
        const double be = beta_i * p.eps;
        if (be > 1.0 || be * static_cast<double>(p.M) < 2.0 || beta_i * p.J < 10.0) continue;
        if (rows[i].xi <= 0.0 || rows[i + 1].xi <= 0.0) continue;
        const double slope = (std::log(rows[i + 1].xi) - std::log(rows[i].xi)) /
                             (std::log(rows[i + 1].inv_beta) - std::log(rows[i].inv_beta));
        best_slope = std::max(best_slope, slope);
    }
    const bool growth_ok = std::abs(best_slope - 1.0) <= 0.05;

    // (c) xi < 1 deep in breakdown: beta J < 0.02 lies beyond the stated scan
    // range (its smallest beta gives beta J = 0.05), so probe an extension
    const auto probe = xi_scan(p, log_spaced(1e-4, 3.9e-4, 16));
    bool breakdown_ok = true;
    double worst_bd = 0.0;
    for (const auto& row : probe) {
        worst_bd = std::max(worst_bd, row.xi);
        if (row.xi >= 1.0) breakdown_ok = false;
    }

    const bool pass = plateau_found && growth_ok && breakdown_ok;
    std::string detail = "three-regime scan (M=50): plateau decade ";
    detail += plateau_found ? "found (down to 1/beta=" + fmt(plateau_lo) + ")" : "MISSING";
    detail += "; growth slope best " + fmt(best_slope) + " vs required 1.00+-0.05" +
              std::string(growth_ok ? "" : " [exact transfer matrix caps this at ~0.935 for "
                                           "M=50: the eps- and M-cutoff corrections never "
                                           "both vanish inside the scan range]");
    detail += "; breakdown xi<1 at betaJ<0.02 " +
              std::string(breakdown_ok ? "holds" : "FAILS") + " (max xi " + fmt(worst_bd) +
              ", probed on a 1/beta in [2564,10000] extension of the stated range)";
    return {"C2", pass, detail};
}

// --------------------------------------------------------------------------
// C3: direct-coupling extension

Result c3() {
    Rng rng(77);
    bool monotone = true;
    for (int i = 0; i < 20; ++i) {
        const double beta = 0.5 + 1.5 * rng.uniform();
        const double eps = 0.05 + 0.5 * rng.uniform();
        const double J = eps + 0.5 + 2.0 * rng.uniform();
        const long M = 1 + static_cast<long>(rng.below(6));
        const double jp = 0.1 + rng.uniform();
        const ChainParams lo{beta, eps, J, M, jp};
        const ChainParams hi{beta, eps, J, M, jp + 0.25};
        if (!(correlation_length(hi) > correlation_length(lo))) monotone = false;
    }

    bool divergent = true;
    double xi_prev = 0.0, xi_max = 0.0;
    for (const double beta : {2.0, 6.0, 10.0, 14.0, 16.0}) {
        const double xi = correlation_length({beta, 0.1, 1.0, 4, 0.5});
        if (!(xi > xi_prev)) divergent = false;
        xi_prev = xi;
        xi_max = std::max(xi_max, xi);
    }
    const bool exceeds = xi_max > 1e6;

    const double xi_plateau = correlation_length({0.5, 1e-3, 50.0, 50, 0.0});
    const bool plateau_ok = std::abs(xi_plateau - 25.0) <= 0.05 * 25.0;

    const bool pass = monotone && divergent && exceeds && plateau_ok;
    return {"C3", pass,
            std::string("J' extension: xi strictly increasing in J' at 20 points ") +
                (monotone ? "ok" : "FAIL") + "; xi grows with beta at J'=0.5 to " +
                fmt(xi_max) + (exceeds ? " (>1e6)" : " (<=1e6 FAIL)") +
                "; J'=0 plateau value " + fmt(xi_plateau) + (plateau_ok ? " ok" : " FAIL")};
}

// --------------------------------------------------------------------------
// C4: constrained sampler, beta_eff identity, bath threshold

Result c4() {
    bool sampler_ok = true;
    std::string ddetail;
    for (const long M : {1L, 8L, 50L}) {
        const ToricParams p{1.0, 1e-3, 50.0, M, 8, 1.0};
        const double q = defect_probability(p);
        const double target = conditional_defect_marginal(q, 64);
        Rng rng(stream_seed(42, static_cast<std::uint64_t>(M)));
        const long n = 100000;
        std::vector<double> per_sample(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) {
            const auto s = sample_stabilizers(p, rng);
            long d = 0;
            for (const auto e : s.plaquette) d += e < 0;
            for (const auto e : s.vertex) d += e < 0;
            per_sample[static_cast<std::size_t>(i)] = static_cast<double>(d) / 128.0;
        }
        const double emp = mean(per_sample);
        const double se = sample_stddev(per_sample) / std::sqrt(static_cast<double>(n));
        const bool ok = std::abs(emp - target) <= 3.0 * se;
        sampler_ok = sampler_ok && ok;
        ddetail += " M=" + std::to_string(M) + ": emp " + fmt(emp) + " vs exact target " +
                   fmt(target) + " (" + fmt(std::abs(emp - target) / se) + " sigma" +
                   (std::abs(target - q) > 3.0 * se
                        ? ", parity correction shifts it off plain q=" + fmt(q)
                        : "") +
                   ")" + (ok ? "" : " FAIL");
    }

    Rng rng(4242);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const ToricParams p{0.05 + 4.0 * rng.uniform(), 0.01 + rng.uniform(),
                            0.5 + 5.0 * rng.uniform(), 1 + static_cast<long>(rng.below(200)), 4,
                            1.0};
        const double diff = std::abs(beta_eff(p) - 0.5 * log_lambda_ratio(p.chain()));
        worst = std::max(worst, diff / std::max(1.0, std::abs(beta_eff(p))));
    }
    const bool identity_ok = worst <= 1e-12;

    const auto thr = bath_threshold(250);
    const bool threshold_ok = thr.M_required == 250 && thr.m_qubits == 8;

    const bool pass = sampler_ok && identity_ok && threshold_ok;
    return {"C4", pass,
            "toric static: sampler vs parity-conditioned marginal:" + ddetail +
                "; beta_eff identity max rel dev " + fmt(worst) + (identity_ok ? "" : " FAIL") +
                "; N=250 -> m=" + std::to_string(thr.m_qubits) + (threshold_ok ? "" : " FAIL")};
}

// --------------------------------------------------------------------------
// C5: kinetic Monte Carlo vs exact mean first passage on L = 2

Result c5() {
    bool pass = true;
    std::string detail = "L=2 lifetime vs exact solve:";
    for (const long M : {1L, 2L, 4L, 8L}) {
        const ToricParams p{1.0, 1e-3, 50.0, M, 2, 1.0};
        const double exact = exact_lifetime_small(p);
        const long n = 10000;
        std::vector<double> t(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i)
            t[static_cast<std::size_t>(i)] =
                run_trajectory(p, stream_seed(505, static_cast<std::uint64_t>(M),
                                              static_cast<std::uint64_t>(i)),
                               1e12, SectorMode::XOnly)
                    .failure_time;
        const double m = mean(t);
        const double se = sample_stddev(t) / std::sqrt(static_cast<double>(n));
        const double pull = std::abs(m - exact) / se;
        const bool ok = pull <= 3.0;
        pass = pass && ok;
        detail += " M=" + std::to_string(M) + ": kmc " + fmt(m) + " exact " + fmt(exact) +
                  " (" + fmt(pull) + " sigma)" + (ok ? "" : " FAIL");
    }
    return {"C5", pass, detail};
}

// --------------------------------------------------------------------------
// C6: defect-rare lifetime scaling

Result c6() {
    const ToricParams tmpl{1.0, 1e-3, 50.0, 1, 2, 1.0};

    const auto repM =
        lifetime_scaling_suite(tmpl, {4}, {16, 32, 64, 128}, 3000, 1e7, 606, 0);
    const auto& fitM = repM.alpha_M.at(0).second;
    const bool alpha_ok = fitM.reliable && std::abs(fitM.exponent - 2.0) <= 0.3;

    const auto repL = lifetime_scaling_suite(tmpl, {4, 6, 8}, {64}, 1500, 1e7, 607, 0);
    bool decreasing = true;
    double t4 = 0.0, t8 = 0.0;
    for (std::size_t i = 1; i < repL.points.size(); ++i)
        if (!(repL.points[i].mean < repL.points[i - 1].mean)) decreasing = false;
    if (!repL.points.empty()) {
        t4 = repL.points.front().mean;
        t8 = repL.points.back().mean;
    }

    const bool pass = alpha_ok && decreasing;
    std::string detail = "defect-rare: alpha_M at L=4 over M in {16..128} = " +
                         fmt(fitM.exponent) + " [CI " + fmt(fitM.ci_lo) + ", " +
                         fmt(fitM.ci_hi) + "] vs required 2.0+-0.3";
    if (!alpha_ok)
        detail += " [measured dynamics pays an extra ~1/M contact-escape factor per winding, "
                  "pushing the exponent toward 3]";
    detail += "; lifetime decreasing over L in {4,6,8} at M=64: " +
              std::string(decreasing ? "yes" : "NO") + " (tau(4)=" + fmt(t4) +
              ", tau(8)=" + fmt(t8) + ")";
    return {"C6", pass, detail};
}

// --------------------------------------------------------------------------
// C7: finite-density regime

Result c7() {
    const ToricParams tmpl{1.0, 1e-3, 50.0, 1, 2, 1.0};

    // (a) lifetimes at M=4, L in {16,24,32}: failure requires a full vacuum
    // return, which at finite defect density never happens on simulable scales
    const auto repA = lifetime_scaling_suite(tmpl, {16, 24, 32}, {4}, 40, 2000.0, 707, 0);
    bool evaluable = true;
    long censored = 0, total = 0;
    for (const auto& pt : repA.points) {
        censored += pt.n_censored;
        total += pt.n_trajectories;
        if (pt.n_censored * 2 > pt.n_trajectories) evaluable = false;
    }
    bool overlap = true;
    for (std::size_t i = 0; i + 1 < repA.points.size() && evaluable; ++i) {
        const auto& a = repA.points[i];
        const auto& b = repA.points[i + 1];
        if (a.ci_hi < b.ci_lo || b.ci_hi < a.ci_lo) overlap = false;
    }
    const bool a_ok = evaluable && overlap;

    // (b) steady-state density exponent in M
    std::vector<double> Ms = {8.0, 16.0, 32.0, 64.0};
    std::vector<double> dens;
    for (const double M : Ms) {
        ToricParams p = tmpl;
        p.L = 16;
        p.M = static_cast<long>(M);
        dens.push_back(steady_state_density(p, stream_seed(708, static_cast<std::uint64_t>(M)),
                                            500.0, 20000.0));
    }
    const auto dfit = fit_power_law(Ms, dens, 400, 709);
    const bool b_ok = std::abs(dfit.exponent - (-2.0)) <= 0.3;

    // (c) finite-density lifetime exponent, loose tolerance per the
    // nonuniversal-prefactor caveat
    const auto repC = lifetime_scaling_suite(tmpl, {16}, {4, 8, 16}, 40, 2000.0, 710, 0);
    const auto& fitC = repC.alpha_M.at(0).second;
    const bool c_ok = fitC.reliable && std::abs(fitC.exponent - 3.0) <= 0.5;

    const bool pass = a_ok && b_ok && c_ok;
    std::string detail = "finite-density: lifetimes at M=4, L in {16,24,32}: ";
    detail += evaluable ? (overlap ? "L-independent within CIs" : "CIs do NOT overlap")
                        : "NOT EVALUABLE [" + std::to_string(censored) + "/" +
                              std::to_string(total) +
                              " censored at t_max=2000: a vacuum return at defect density "
                              "~1/(M+1) is exponentially rare in L^2, so the winding "
                              "criterion never triggers]";
    detail += "; density exponent " + fmt(dfit.exponent) + " [CI " + fmt(dfit.ci_lo) + ", " +
              fmt(dfit.ci_hi) + "] vs required -2.0+-0.3";
    if (!b_ok)
        detail += " [the jump process is reversible with per-defect weight p0_flat ~ 1/M, so "
                  "the true steady density scales as M^-1, matching the Gibbs marginal]";
    detail += "; finite-density alpha_M " +
              (fitC.reliable ? fmt(fitC.exponent) : std::string("not evaluable (censored)")) +
              " vs 3.0+-0.5";
    return {"C7", pass, detail};
}

// --------------------------------------------------------------------------
// C8: BKT correlation-length enhancement exponent

Result c8() {
    bool pass = true;
    std::string detail = "xi enhancement:";
    for (const double K0 : {0.3, 0.45, 0.55}) {
        const double nu = 1.0 / (2.0 - std::numbers::pi * K0);
        // y0 = 1e-4 keeps the whole shift inside the linearized window
        const BktParams base{K0, 1.0, std::log(1e4) / K0, 1};
        const auto t1 = integrate_flow(base, 200.0);
        for (const long M : {10L, 100L}) {
            BktParams p = base;
            p.M = M;
            const auto tM = integrate_flow(p, 200.0);
            if (!t1.l_star || !tM.l_star) {
                pass = false;
                detail += " K0=" + fmt(K0) + " M=" + std::to_string(M) + ": no proliferation FAIL";
                continue;
            }
            const double measured = (*tM.l_star - *t1.l_star) / std::log(static_cast<double>(M));
            const bool ok = std::abs(measured / nu - 1.0) <= 0.10;
            pass = pass && ok;
            detail += " K0=" + fmt(K0) + ",M=" + std::to_string(M) + ": " + fmt(measured) +
                      " vs nu " + fmt(nu) + (ok ? "" : " FAIL");
        }
    }
    return {"C8", pass, detail};
}

// --------------------------------------------------------------------------
// C9: finite-size coherence crossover

Result c9() {
    const BktParams tmpl{0.3, 1.0, 10.0, 1};

    bool monotone = true;
    double prev = 1e300;
    std::string mdetail;
    for (const long M : {1L, 4L, 16L, 64L}) {
        BktParams p = tmpl;
        p.M = M;
        const auto res = crossover_beta(p, 100.0);
        if (!(res.beta_c < prev)) monotone = false;
        prev = res.beta_c;
        mdetail += " beta_c(M=" + std::to_string(M) + ")=" + fmt(res.beta_c);
    }

    BktParams p4 = tmpl;
    p4.M = 4;
    std::vector<double> b_implied;
    std::string tdetail;
    for (const double L : {1e2, 1e3, 1e4}) {
        const auto res = crossover_beta(p4, L);
        b_implied.push_back(res.b_implied);
        tdetail += " L=" + fmt(L) + ": beta_c " + fmt(res.beta_c) + " (closed-form est " +
                   fmt(res.beta_c_estimate) + ", b_implied " + fmt(res.b_implied) + ")";
    }
    const double bmean = mean(b_implied);
    double spread = 0.0;
    for (const double b : b_implied) spread = std::max(spread, std::abs(b / bmean - 1.0));
    const bool trend_ok = spread <= 0.20;

    const bool pass = monotone && trend_ok;
    return {"C9", pass,
            "crossover: beta_c monotone decreasing in M at L=100: " +
                std::string(monotone ? "yes" : "NO") + " (" + mdetail + "); 1/ln^2 trend at M=4:" +
                tdetail + "; b spread " + fmt(100.0 * spread) + "% vs allowed 20%" +
                (trend_ok ? "" : " FAIL")};
}

// --------------------------------------------------------------------------
// C10: byte-identical sweep output for any worker count

Result c10() {
    SweepSpec spec;
    spec.model = SweepModel::ToricKmc;
    spec.grids = {{"beta", {1.0}},          {"eps", {1e-3}}, {"J", {50.0}},
                  {"M", {8.0, 16.0, 32.0}}, {"L", {3.0}},    {"gamma0", {1.0}}};
    spec.trajectories = 200;
    spec.t_max = 1e9;
    spec.master_seed = 1010;

    std::string first;
    bool identical = true;
    long rows = 0;
    for (const int workers : {1, 4, 16}) {
        spec.workers = workers;
        const auto r = compute_sweep_rows(spec);
        std::string blob = r.header + "\n";
        for (const auto& row : r.rows) blob += row + "\n";
        rows = static_cast<long>(r.rows.size());
        if (first.empty())
            first = blob;
        else if (blob != first)
            identical = false;
    }
    const bool pass = identical && rows == 600;
    return {"C10", pass,
            "determinism: workers {1,4,16} " +
                std::string(identical ? "byte-identical" : "DIFFER") + ", " +
                std::to_string(rows) + " rows (expected 600)"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Result()>>> table = {
        {"c1", c1}, {"c2", c2}, {"c3", c3}, {"c4", c4},  {"c5", c5},
        {"c6", c6}, {"c7", c7}, {"c8", c8}, {"c9", c9}, {"c10", c10},
    };
    std::string which = argc > 1 ? argv[1] : "all";
    std::transform(which.begin(), which.end(), which.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

    int failures = 0;
    bool ran = false;
    for (const auto& [id, fn] : table) {
        if (which != "all" && which != id) continue;
        ran = true;
        const auto r = fn();
        std::printf("[%s] %s: %s\n", r.pass ? "PASS" : "FAIL", r.id.c_str(), r.detail.c_str());
        std::fflush(stdout);
        failures += !r.pass;
    }
    if (!ran) {
        std::fprintf(stderr, "unknown criterion '%s' (use c1..c10 or all)\n", which.c_str());
        return 64;
    }
    return failures;
}
