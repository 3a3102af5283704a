#include "entrosim/ising.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace entrosim {

namespace {

// sum_{n=0}^{M-1} e^{-x n} = expm1(-x M)/expm1(-x), stable from denormal x up
// to arguments where e^{-x} underflows (saturates to 1).
double geometric_sum(double x, long M) {
    if (M == 1) return 1.0;
    const double den = std::expm1(-x);
    if (den == 0.0) return static_cast<double>(M);
    return std::expm1(-x * static_cast<double>(M)) / den;
}

double ipow(double t, int n) {
    double acc = 1.0;
    for (int i = 0; i < n; ++i) acc *= t;
    return acc;
}

}  // namespace

void ChainParams::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("ChainParams: beta must be positive and finite");
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw std::invalid_argument("ChainParams: eps must be positive and finite");
    if (!(J > 0.0) || !std::isfinite(J))
        throw std::invalid_argument("ChainParams: J must be positive and finite");
    if (M < 1) throw std::invalid_argument("ChainParams: M must be >= 1");
    if (!(Jprime >= 0.0) || !std::isfinite(Jprime))
        throw std::invalid_argument("ChainParams: Jprime must be >= 0 and finite");
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::InverseMelting: return "inverse_melting";
        case Regime::SaturatedPlateau: return "saturated_plateau";
        case Regime::Breakdown: return "breakdown";
        case Regime::Unclassified: return "unclassified";
    }
    return "unclassified";
}

BathWeights bath_weights(const ChainParams& p) {
    p.validate();
    return {geometric_sum(p.beta * p.eps, p.M), geometric_sum(p.beta * p.J, p.M)};
}

double log_lambda_ratio(const ChainParams& p) {
    const auto w = bath_weights(p);
    return std::log(w.w_plus) - std::log(w.w_minus) + 2.0 * p.beta * p.Jprime;
}

double lambda_ratio(const ChainParams& p) { return std::exp(log_lambda_ratio(p)); }

double correlation_length(const ChainParams& p) {
    const double ll = log_lambda_ratio(p);
    if (ll <= 0.0) return 0.0;
    // ln((lambda+1)/(lambda-1)) = log1p(2/(lambda-1)) with lambda-1 = expm1(ll)
    const double decay = std::log1p(2.0 / std::expm1(ll));
    if (decay == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / decay;
}

double finite_chain_correlator(const ChainParams& p, int L, int r) {
    p.validate();
    if (L < 2) throw std::invalid_argument("finite_chain_correlator: L must be >= 2");
    if (r < 0 || r > L)
        throw std::invalid_argument("finite_chain_correlator: need 0 <= r <= L, got r=" +
                                    std::to_string(r));
    const auto w = bath_weights(p);
    // bond factors w+ e^{+beta J'} and w- e^{-beta J'}; the eigenvalue ratio
    // t below only ever sees the bounded combination w- e^{-2 beta J'}
    const double wm = w.w_minus * std::exp(-2.0 * p.beta * p.Jprime);
    const double t = (w.w_plus - wm) / (w.w_plus + wm);
    return (ipow(t, r) + ipow(t, L - r)) / (1.0 + ipow(t, L));
}

double brute_force_correlator(const ChainParams& p, int L, int r) {
    p.validate();
    if (L < 2 || L > 12) throw std::invalid_argument("brute_force_correlator: need 2 <= L <= 12");
    if (p.M > 6) throw std::invalid_argument("brute_force_correlator: need M <= 6");
    if (r < 0 || r > L) throw std::invalid_argument("brute_force_correlator: need 0 <= r <= L");

    const double step_plus = std::exp(-p.beta * p.eps);
    const double step_minus = std::exp(-p.beta * p.J);
    const double bond_plus = std::exp(p.beta * p.Jprime);
    const double bond_minus = std::exp(-p.beta * p.Jprime);

    double num = 0.0, den = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << L); ++mask) {
        double weight = 1.0;
        for (int i = 0; i < L; ++i) {
            const int si = (mask >> i) & 1u ? 1 : -1;
            const int sj = (mask >> ((i + 1) % L)) & 1u ? 1 : -1;
            const bool satisfied = si * sj == 1;
            // explicit reservoir sum, term by term
            double bath = 0.0, term = 1.0;
            const double step = satisfied ? step_plus : step_minus;
            for (long n = 0; n < p.M; ++n) {
                bath += term;
                term *= step;
            }
            weight *= bath * (satisfied ? bond_plus : bond_minus);
        }
        const int s0 = (mask & 1u) ? 1 : -1;
        const int sr = (mask >> (r % L)) & 1u ? 1 : -1;
        num += weight * s0 * sr;
        den += weight;
    }
    return num / den;
}

RegimeLabel classify_regime(const ChainParams& p) {
    p.validate();
    if (p.Jprime != 0.0)
        throw std::invalid_argument("classify_regime: reservoir regimes are defined at Jprime=0");
    const double be = p.beta * p.eps;
    const double beM = be * static_cast<double>(p.M);
    const double bJ = p.beta * p.J;
    Regime r = Regime::Unclassified;
    if (bJ <= 0.1)
        r = Regime::Breakdown;
    else if (be <= 0.1 && beM >= 10.0 && bJ >= 10.0)
        r = Regime::InverseMelting;
    else if (beM <= 0.1 && bJ >= 10.0)
        r = Regime::SaturatedPlateau;
    return {r, be, beM, bJ};
}

std::vector<XiScanRow> xi_scan(const ChainParams& p, const std::vector<double>& beta_grid) {
    p.validate();
    if (beta_grid.size() >= 2) {
        const bool inc = beta_grid[1] > beta_grid[0];
        for (std::size_t i = 1; i < beta_grid.size(); ++i) {
            const bool step_inc = beta_grid[i] > beta_grid[i - 1];
            if (step_inc != inc || beta_grid[i] == beta_grid[i - 1])
                throw std::invalid_argument("xi_scan: beta grid must be strictly monotone");
        }
    }
    std::vector<XiScanRow> rows;
    rows.reserve(beta_grid.size());
    for (double beta : beta_grid) {
        ChainParams q = p;
        q.beta = beta;
        ChainParams bare = q;
        bare.Jprime = 0.0;
        rows.push_back({1.0 / beta, correlation_length(q), classify_regime(bare).regime});
    }
    return rows;
}

}  // namespace entrosim
