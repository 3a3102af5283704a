#pragma once

#include <cstdint>
#include <vector>

#include "entrosim/ising.hpp"
#include "entrosim/lattice.hpp"
#include "entrosim/rng.hpp"

namespace entrosim {

// Toric code with one M-state reservoir per stabilizer. gamma0 is the bare
// jump rate used by the kinetic module.
struct ToricParams {
    double beta;
    double eps;
    double J;
    long M;
    int L;
    double gamma0 = 1.0;

    void validate() const;
    ChainParams chain() const { return {beta, eps, J, M, 0.0}; }
};

// One eigenvalue per plaquette and vertex; both global products are +1.
struct StabilizerSample {
    std::vector<std::int8_t> plaquette;
    std::vector<std::int8_t> vertex;
};

// <B_p> = (w+ - w-)/(w+ + w-); (M-1)/(M+1) on the saturated plateau.
double stabilizer_expectation(const ToricParams& p);

// Gibbs factorization over stabilizers: <W(R)> = <B_p>^area, evaluated in log
// space. area is abstract (no region enumeration), bounded by L^2.
double wilson_loop(const ToricParams& p, long area);

// Effective inverse temperature of the equivalent plain-code thermal state,
// beta_eff = (1/2) ln[(1-e^{-beta eps M})(1-e^{-beta J}) /
//                     ((1-e^{-beta eps})(1-e^{-beta J M}))]
double beta_eff(const ToricParams& p);

struct BathThreshold {
    long M_required;
    int m_qubits;
};

// Smallest M with sqrt(N) e^{-beta_eff} <= 1 on the plateau (M >= N), and the
// qubit count ceil(log2 M) of one reservoir.
BathThreshold bath_threshold(long N);

// Probability that a single stabilizer is violated, w-/(w+ + w-).
double defect_probability(const ToricParams& p);

// Exact single-stabilizer defect marginal under the even-parity constraint on
// N sites; the rejection sampler below targets exactly this.
double conditional_defect_marginal(double q, long N);

// Independent Bernoulli(q) eigenvalues per sector, rejection-resampled until
// the sector parity is even. Expected attempts per sector <= 2 for q <= 1/2.
StabilizerSample sample_stabilizers(const ToricParams& p, Rng& rng);

}  // namespace entrosim
