#include "entrosim/bkt.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace entrosim {

namespace {

constexpr double kPi = std::numbers::pi;

struct FlowState {
    double u;  // K^{-1}
    double y;
};

FlowState derivs(const FlowState& s) {
    return {4.0 * kPi * kPi * kPi * s.y * s.y, (2.0 - kPi / s.u) * s.y};
}

// one Cash-Karp step of size h; fills the 5th-order result and the 4th/5th
// error estimate
void ck_step(const FlowState& s, double h, FlowState& out5, FlowState& err) {
    const FlowState k1 = derivs(s);
    const FlowState k2 = derivs({s.u + h * (0.2 * k1.u), s.y + h * (0.2 * k1.y)});
    const FlowState k3 = derivs({s.u + h * (3.0 / 40 * k1.u + 9.0 / 40 * k2.u),
                                 s.y + h * (3.0 / 40 * k1.y + 9.0 / 40 * k2.y)});
    const FlowState k4 =
        derivs({s.u + h * (0.3 * k1.u - 0.9 * k2.u + 1.2 * k3.u),
                s.y + h * (0.3 * k1.y - 0.9 * k2.y + 1.2 * k3.y)});
    const FlowState k5 = derivs(
        {s.u + h * (-11.0 / 54 * k1.u + 2.5 * k2.u - 70.0 / 27 * k3.u + 35.0 / 27 * k4.u),
         s.y + h * (-11.0 / 54 * k1.y + 2.5 * k2.y - 70.0 / 27 * k3.y + 35.0 / 27 * k4.y)});
    const FlowState k6 =
        derivs({s.u + h * (1631.0 / 55296 * k1.u + 175.0 / 512 * k2.u + 575.0 / 13824 * k3.u +
                           44275.0 / 110592 * k4.u + 253.0 / 4096 * k5.u),
                s.y + h * (1631.0 / 55296 * k1.y + 175.0 / 512 * k2.y + 575.0 / 13824 * k3.y +
                           44275.0 / 110592 * k4.y + 253.0 / 4096 * k5.y)});

    auto comb5 = [&](double a1, double a3, double a4, double a6, double b1, double b3, double b4,
                     double b6) {
        out5.u = s.u + h * (a1 * k1.u + a3 * k3.u + a4 * k4.u + a6 * k6.u);
        out5.y = s.y + h * (b1 * k1.y + b3 * k3.y + b4 * k4.y + b6 * k6.y);
    };
    comb5(37.0 / 378, 250.0 / 621, 125.0 / 594, 512.0 / 1771, 37.0 / 378, 250.0 / 621,
          125.0 / 594, 512.0 / 1771);
    const double u4 = s.u + h * (2825.0 / 27648 * k1.u + 18575.0 / 48384 * k3.u +
                                 13525.0 / 55296 * k4.u + 277.0 / 14336 * k5.u + 0.25 * k6.u);
    const double y4 = s.y + h * (2825.0 / 27648 * k1.y + 18575.0 / 48384 * k3.y +
                                 13525.0 / 55296 * k4.y + 277.0 / 14336 * k5.y + 0.25 * k6.y);
    err.u = out5.u - u4;
    err.y = out5.y - y4;
}

double error_norm(const FlowState& s, const FlowState& err, double tol) {
    const double eu = std::abs(err.u) / (tol * (1.0 + std::abs(s.u)));
    const double ey = std::abs(err.y) / (tol * (1.0 + std::abs(s.y)));
    return std::max(eu, ey);
}

}  // namespace

void BktParams::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("BktParams: beta must be positive and finite");
    if (!(Jxy > 0.0) || !std::isfinite(Jxy))
        throw std::invalid_argument("BktParams: Jxy must be positive and finite");
    if (!(E_c > 0.0)) throw std::invalid_argument("BktParams: E_c must be positive");
    if (M < 1) throw std::invalid_argument("BktParams: M must be >= 1");
    if (!(y_star > 0.0) || !std::isfinite(y_star))
        throw std::invalid_argument("BktParams: y_star must be positive and finite");
    if (!(a > 0.0) || !std::isfinite(a))
        throw std::invalid_argument("BktParams: a must be positive and finite");
}

double BktParams::y0() const { return std::exp(-beta * E_c); }
double BktParams::y_eff() const { return y0() / static_cast<double>(M); }

RgTrajectory integrate_flow(const BktParams& p, double l_max, double tol) {
    p.validate();
    if (!(l_max > 0.0)) throw std::invalid_argument("integrate_flow: l_max must be positive");

    RgTrajectory traj;
    FlowState s{1.0 / p.K0(), p.y_eff()};
    double l = 0.0;
    traj.points.push_back({l, 1.0 / s.u, s.y});

    if (s.y >= p.y_star) {
        traj.l_star = 0.0;
        traj.termination = FlowTermination::Proliferated;
        return traj;
    }
    if (s.y == 0.0) {  // fixed line: nothing flows
        traj.points.push_back({l_max, 1.0 / s.u, s.y});
        traj.termination = FlowTermination::ReachedLMax;
        return traj;
    }

    const double h_max = 0.5;
    double h = std::min(h_max, l_max / 16.0);
    while (l < l_max) {
        h = std::min(h, l_max - l);
        if (h < 1e-14 * std::max(1.0, l)) {
            traj.termination = FlowTermination::StepUnderflow;
            return traj;
        }
        FlowState next{}, err{};
        ck_step(s, h, next, err);
        const double en = error_norm(s, err, tol);
        if (en > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(en, -0.25));
            continue;
        }
        if (next.y >= p.y_star) {
            // refine the crossing inside [l, l+h] by bisection on the substep
            double lo = 0.0, hi = h;
            for (int it = 0; it < 200 && (hi - lo) > 1e-15 * std::max(1.0, l); ++it) {
                const double mid = 0.5 * (lo + hi);
                FlowState probe{}, perr{};
                ck_step(s, mid, probe, perr);
                (probe.y >= p.y_star ? hi : lo) = mid;
            }
            FlowState at_star{}, aerr{};
            ck_step(s, hi, at_star, aerr);
            l += hi;
            traj.points.push_back({l, 1.0 / at_star.u, at_star.y});
            traj.l_star = l;
            traj.termination = FlowTermination::Proliferated;
            return traj;
        }
        l += h;
        s = next;
        traj.points.push_back({l, 1.0 / s.u, s.y});
        const double grow = en == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(en, -0.2));
        h = std::min(h_max, h * grow);
    }
    traj.termination = FlowTermination::ReachedLMax;
    return traj;
}

std::optional<double> bkt_correlation_length(const BktParams& p, double l_max, double tol) {
    const auto traj = integrate_flow(p, l_max, tol);
    if (traj.termination == FlowTermination::StepUnderflow)
        throw std::runtime_error("bkt_correlation_length: integrator step underflow");
    if (!traj.l_star) return std::nullopt;
    return p.a * std::exp(*traj.l_star);
}

double nu_eff(double K0) {
    if (!(K0 >= 0.0)) throw std::invalid_argument("nu_eff: K0 must be >= 0");
    if (K0 >= 2.0 / kPi)
        throw std::domain_error("nu_eff: undefined for K0 >= 2/pi (ordered side)");
    return 1.0 / (2.0 - kPi * K0);
}

double nu_eff(const BktParams& p) {
    p.validate();
    return nu_eff(p.K0());
}

VortexKinetics vortex_kinetics(const BktParams& p, double D0) {
    p.validate();
    if (!(D0 > 0.0)) throw std::invalid_argument("vortex_kinetics: D0 must be positive");
    const double d_eff = D0 / static_cast<double>(p.M);
    return {d_eff, p.y_eff() * d_eff};
}

namespace {

std::optional<double> l_star_at(const BktParams& p_template, double beta, double l_max,
                                double tol = 1e-10) {
    BktParams p = p_template;
    p.beta = beta;
    const auto traj = integrate_flow(p, l_max, tol);
    return traj.l_star;
}

}  // namespace

double find_beta_bkt(const BktParams& p_template, double beta_lo, double beta_hi, double beta_tol,
                     double l_max) {
    if (!(beta_lo > 0.0) || !(beta_hi > beta_lo))
        throw std::invalid_argument("find_beta_bkt: need 0 < beta_lo < beta_hi");
    const bool lo_prolif = l_star_at(p_template, beta_lo, l_max).has_value();
    const bool hi_prolif = l_star_at(p_template, beta_hi, l_max).has_value();
    if (!lo_prolif || hi_prolif)
        throw std::invalid_argument(
            "find_beta_bkt: interval does not bracket the proliferation boundary");
    double lo = beta_lo, hi = beta_hi;
    while (hi - lo > beta_tol * std::max(1.0, lo)) {
        const double mid = 0.5 * (lo + hi);
        (l_star_at(p_template, mid, l_max).has_value() ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

// solve l_star(beta) = target on the disordered side by bisection;
// l_star increases monotonically toward the transition
double beta_for_lstar(const BktParams& p_template, double beta_bkt, double target,
                      double l_max = 400.0) {
    double lo = beta_bkt * 1e-3;
    auto ls_lo = l_star_at(p_template, lo, l_max);
    int guard = 0;
    while ((!ls_lo || *ls_lo > target) && guard++ < 60) {
        lo *= 0.5;
        ls_lo = l_star_at(p_template, lo, l_max);
    }
    if (!ls_lo || *ls_lo > target)
        throw std::runtime_error("beta_for_lstar: no lower bracket for the requested scale");
    double hi = beta_bkt;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto ls = l_star_at(p_template, mid, l_max);
        if (ls && *ls < target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-13 * std::max(1.0, lo)) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

CoherenceFit fit_coherence_amplitude(const BktParams& p_template, double beta_bkt,
                                     double lstar_min, double lstar_max, int points) {
    if (points < 2) throw std::invalid_argument("fit_coherence_amplitude: need >= 2 points");
    if (!(lstar_max > lstar_min) || !(lstar_min > 0.0))
        throw std::invalid_argument("fit_coherence_amplitude: bad l_star window");
    BktParams p1 = p_template;
    p1.M = 1;

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < points; ++i) {
        const double target =
            lstar_min + (lstar_max - lstar_min) * static_cast<double>(i) / (points - 1);
        const double beta = beta_for_lstar(p1, beta_bkt, target);
        const double x = 1.0 / std::sqrt(beta_bkt / beta - 1.0);
        const double y = target + std::log(p1.a);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(points);
    const double det = n * sxx - sx * sx;
    return {(n * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det, points};
}

CrossoverResult crossover_beta(const BktParams& p_template, double L, std::optional<double> b_fit) {
    p_template.validate();
    if (!(L > 1.0)) throw std::invalid_argument("crossover_beta: need L > 1");

    BktParams bare = p_template;
    bare.M = 1;
    // bracket the bare transition around K0 = 2/pi
    double beta_lo = (2.0 / kPi) / p_template.Jxy * 0.2;
    double beta_hi = (2.0 / kPi) / p_template.Jxy * 4.0;
    for (int it = 0; it < 40 && !l_star_at(bare, beta_lo, 400.0); ++it) beta_lo *= 0.5;
    for (int it = 0; it < 40 && l_star_at(bare, beta_hi, 400.0); ++it) beta_hi *= 2.0;
    const double beta_bkt = find_beta_bkt(bare, beta_lo, beta_hi);

    CrossoverResult out{};
    out.beta_bkt = beta_bkt;

    const double target = std::log(L / p_template.a);
    out.beta_c = beta_for_lstar(p_template, beta_bkt, target);

    const double K0c = out.beta_c * p_template.Jxy;
    if (K0c >= 2.0 / kPi)
        throw std::domain_error(
            "crossover_beta: K0(beta_c) >= 2/pi, outside the linearized-onset domain");
    out.nu_at_c = nu_eff(K0c);

    const double lnM = std::log(static_cast<double>(p_template.M));
    const double denom = std::log(L) - out.nu_at_c * lnM;
    if (!(denom > 0.0))
        throw std::domain_error("crossover_beta: requires ln L > nu_eff ln M");

    out.b = b_fit ? *b_fit
                  : fit_coherence_amplitude(p_template, beta_bkt, std::max(2.0, 0.5 * target),
                                            std::max(4.0, 1.2 * target))
                        .b;
    out.beta_c_estimate = beta_bkt / (1.0 + (out.b / denom) * (out.b / denom));
    out.b_implied = std::sqrt(beta_bkt / out.beta_c - 1.0) * denom;
    return out;
}

}  // namespace entrosim
