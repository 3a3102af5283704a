#pragma once

#include <optional>
#include <vector>

namespace entrosim {

// XY model with an M-state reservoir on every plaquette that collapses to one
// microstate on nonzero vorticity. The reservoir only enters the flow through
// the renormalized initial fugacity y(0) = e^{-beta E_c}/M.
struct BktParams {
    double beta;
    double Jxy;    // stiffness energy
    double E_c;    // vortex core energy
    long M;
    double y_star = 1.0;  // proliferation threshold
    double a = 1.0;       // lattice constant

    void validate() const;
    double K0() const { return beta * Jxy; }
    double y0() const;     // bare fugacity e^{-beta E_c}
    double y_eff() const;  // y0 / M
};

enum class FlowTermination { Proliferated, ReachedLMax, StepUnderflow };

struct RgPoint {
    double l;
    double K;
    double y;
};

struct RgTrajectory {
    std::vector<RgPoint> points;
    std::optional<double> l_star;  // scale where y first reaches y_star
    FlowTermination termination;
};

// Cash-Karp RK45 on dK^{-1}/dl = 4 pi^3 y^2, dy/dl = (2 - pi K) y from
// (K0, y_eff). Stops at y = y_star (l_star refined to the local tolerance) or
// at l_max.
RgTrajectory integrate_flow(const BktParams& p, double l_max, double tol = 1e-10);

// a e^{l_star}; nullopt marks "no proliferation before l_max" (ordered side at
// this resolution).
std::optional<double> bkt_correlation_length(const BktParams& p, double l_max = 80.0,
                                             double tol = 1e-10);

// 1/(2 - pi K0); defined on the disordered side K0 < 2/pi only.
double nu_eff(double K0);
double nu_eff(const BktParams& p);

struct VortexKinetics {
    double D_eff;             // D0 / M
    double gamma_slip_scale;  // y_eff * D_eff, prefactor left at 1
};

VortexKinetics vortex_kinetics(const BktParams& p, double D0);

// Proliferation/no-proliferation boundary in beta at fixed (Jxy, E_c, M),
// bisected to beta_tol within [beta_lo, beta_hi].
double find_beta_bkt(const BktParams& p_template, double beta_lo, double beta_hi,
                     double beta_tol = 1e-10, double l_max = 400.0);

struct CoherenceFit {
    double b;          // slope of ln xi vs 1/sqrt(beta_bkt/beta - 1)
    double intercept;
    int points;
};

// Fit ln xi0 = b/sqrt(beta_bkt/beta - 1) + c on the M = 1 flow over a window
// of l_star values on the disordered side.
CoherenceFit fit_coherence_amplitude(const BktParams& p_template, double beta_bkt,
                                     double lstar_min, double lstar_max, int points = 12);

struct CrossoverResult {
    double beta_bkt;        // bare (M = 1) transition scale
    double beta_c;          // numeric solution of xi_M(beta_c) = L
    double beta_c_estimate; // closed-form 1/ln^2 estimate with the fitted b
    double b;
    double nu_at_c;         // nu_eff evaluated at K0(beta_c)
    double b_implied;       // sqrt(beta_bkt/beta_c - 1) * (ln L - nu ln M)
};

// Finite-size coherence crossover: beta_c from bisection on xi(beta) = L, plus
// the closed-form estimate beta_bkt / (1 + (b/(ln L - nu ln M))^2).
// b may be supplied; otherwise it is fitted from the M = 1 flow.
CrossoverResult crossover_beta(const BktParams& p_template, double L,
                               std::optional<double> b_fit = std::nullopt);

}  // namespace entrosim
