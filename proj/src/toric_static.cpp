#include "entrosim/toric_static.hpp"

#include <cmath>
#include <stdexcept>

namespace entrosim {

void ToricParams::validate() const {
    chain().validate();
    if (L < 2) throw std::invalid_argument("ToricParams: L must be >= 2");
    if (!(gamma0 > 0.0) || !std::isfinite(gamma0))
        throw std::invalid_argument("ToricParams: gamma0 must be positive and finite");
}

double stabilizer_expectation(const ToricParams& p) {
    p.validate();
    const auto w = bath_weights(p.chain());
    return (w.w_plus - w.w_minus) / (w.w_plus + w.w_minus);
}

double wilson_loop(const ToricParams& p, long area) {
    p.validate();
    if (area < 0 || area > static_cast<long>(p.L) * p.L)
        throw std::invalid_argument("wilson_loop: area must lie in [0, L^2]");
    if (area == 0) return 1.0;
    const double s = stabilizer_expectation(p);
    if (s == 0.0) return 0.0;
    return std::exp(static_cast<double>(area) * std::log(s));
}

double beta_eff(const ToricParams& p) {
    p.validate();
    const double be = p.beta * p.eps, bj = p.beta * p.J;
    const double Md = static_cast<double>(p.M);
    // each factor as log(-expm1(-x)); x > 0 keeps every argument in (0,1]
    const double log_num = std::log(-std::expm1(-be * Md)) + std::log(-std::expm1(-bj));
    const double log_den = std::log(-std::expm1(-be)) + std::log(-std::expm1(-bj * Md));
    return 0.5 * (log_num - log_den);
}

BathThreshold bath_threshold(long N) {
    if (N < 1) throw std::invalid_argument("bath_threshold: N must be >= 1");
    const long M = N;
    int m = 0;
    while ((1L << m) < M) ++m;
    return {M, m};
}

double defect_probability(const ToricParams& p) {
    p.validate();
    const auto w = bath_weights(p.chain());
    return w.w_minus / (w.w_plus + w.w_minus);
}

double conditional_defect_marginal(double q, long N) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("conditional_defect_marginal: bad q");
    if (N < 1) throw std::invalid_argument("conditional_defect_marginal: N must be >= 1");
    const double r = 1.0 - 2.0 * q;
    const double even_rest = 0.5 * (1.0 + std::pow(r, static_cast<double>(N - 1)));
    const double num = q * (1.0 - even_rest);
    const double den = num + (1.0 - q) * even_rest;
    return num / den;
}

namespace {

void fill_even_sector(std::vector<std::int8_t>& out, int n, double q, Rng& rng) {
    out.resize(static_cast<std::size_t>(n));
    while (true) {
        int defects = 0;
        for (int i = 0; i < n; ++i) {
            const bool violated = rng.bernoulli(q);
            out[static_cast<std::size_t>(i)] = violated ? -1 : 1;
            defects += violated;
        }
        if (defects % 2 == 0) return;
    }
}

}  // namespace

StabilizerSample sample_stabilizers(const ToricParams& p, Rng& rng) {
    const double q = defect_probability(p);
    StabilizerSample s;
    // sectors are independent, so per-sector rejection matches the joint
    // even-even conditioning
    fill_even_sector(s.plaquette, p.L * p.L, q, rng);
    fill_even_sector(s.vertex, p.L * p.L, q, rng);
    return s;
}

}  // namespace entrosim
