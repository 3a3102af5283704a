#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace entrosim {

// Ferromagnetic chain where every bond carries an M-state reservoir: a
// satisfied bond leaves the reservoir in a shallow potential (level spacing
// eps), a broken bond confines it with spacing J. Jprime is an optional direct
// bond coupling on top of the reservoir term.
struct ChainParams {
    double beta;
    double eps;
    double J;
    long M;
    double Jprime = 0.0;

    void validate() const;
};

// Per-bond reservoir partition sums for the two bond signs,
// w_plus = sum_{n<M} e^{-beta*eps*n}, w_minus likewise with J. Both in [1, M].
struct BathWeights {
    double w_plus;
    double w_minus;
};

enum class Regime { InverseMelting, SaturatedPlateau, Breakdown, Unclassified };

struct RegimeLabel {
    Regime regime;
    double beta_eps;
    double beta_eps_M;
    double beta_J;
};

const char* regime_name(Regime r);

BathWeights bath_weights(const ChainParams& p);

// log of lambda' = (w+/w-) * e^{2 beta Jprime}; safe for arguments far beyond
// double overflow of lambda itself
double log_lambda_ratio(const ChainParams& p);
double lambda_ratio(const ChainParams& p);

// xi = 1 / ln((lambda+1)/(lambda-1)) for lambda > 1, else 0 (no decay scale).
double correlation_length(const ChainParams& p);

// Two-eigenvalue ring correlator <Z_i Z_{i+r}> on a closed chain of length L.
double finite_chain_correlator(const ChainParams& p, int L, int r);

// Independent oracle: full 2^L configuration sum with per-bond reservoir sums
// accumulated term by term. Limits keep the enumeration tractable.
double brute_force_correlator(const ChainParams& p, int L, int r);

// Threshold factors of 10 around the asymptotic inequalities; crossover zones
// come back Unclassified. Requires Jprime == 0.
RegimeLabel classify_regime(const ChainParams& p);

struct XiScanRow {
    double inv_beta;
    double xi;
    Regime regime;
};

// One row per beta in grid (grid must be strictly monotone); regime labels use
// the Jprime = 0 reservoir diagnostics.
std::vector<XiScanRow> xi_scan(const ChainParams& p, const std::vector<double>& beta_grid);

}  // namespace entrosim
