#include "entrosim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "entrosim/rng.hpp"

namespace entrosim {

double mean(std::span<const double> v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_stddev(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

namespace {

struct LineFit {
    double slope;
    double intercept;
};

LineFit least_squares(std::span<const double> lx, std::span<const double> ly) {
    const auto n = static_cast<double>(lx.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double det = n * sxx - sx * sx;
    if (det == 0.0) throw std::invalid_argument("fit: x values are all equal");
    return {(n * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det};
}

std::pair<double, double> percentile_interval(std::vector<double>& v, double level) {
    std::sort(v.begin(), v.end());
    const double lo_q = (1.0 - level) / 2.0, hi_q = 1.0 - lo_q;
    auto at = [&](double q) {
        const double pos = q * static_cast<double>(v.size() - 1);
        const auto i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        if (i + 1 >= v.size()) return v.back();
        return v[i] * (1.0 - frac) + v[i + 1] * frac;
    };
    return {at(lo_q), at(hi_q)};
}

void check_loglog_inputs(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_power_law: size mismatch");
    if (x.size() < 3) throw std::invalid_argument("fit_power_law: need at least 3 points");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw std::invalid_argument("fit_power_law: points must be strictly positive");
}

bool distinct_x(std::span<const double> v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] != v[0]) return true;
    return false;
}

}  // namespace

FitReport fit_power_law(std::span<const double> x, std::span<const double> y, int bootstrap_n,
                        std::uint64_t seed) {
    check_loglog_inputs(x, y);
    const std::size_t n = x.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    const auto fit = least_squares(lx, ly);

    FitReport rep;
    rep.exponent = fit.slope;
    rep.intercept = fit.intercept;
    rep.bootstrap_n = bootstrap_n;
    rep.points_used = static_cast<int>(n);
    rep.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        rep.residuals[i] = ly[i] - (fit.slope * lx[i] + fit.intercept);

    if (bootstrap_n > 0) {
        Rng rng(seed);
        std::vector<double> slopes;
        slopes.reserve(static_cast<std::size_t>(bootstrap_n));
        std::vector<double> bx(n), by(n);
        while (slopes.size() < static_cast<std::size_t>(bootstrap_n)) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto k = static_cast<std::size_t>(rng.below(n));
                bx[i] = lx[k];
                by[i] = ly[k];
            }
            if (!distinct_x(bx)) continue;  // degenerate resample, redraw
            slopes.push_back(least_squares(bx, by).slope);
        }
        auto [lo, hi] = percentile_interval(slopes, 0.95);
        rep.ci_lo = std::min(lo, rep.exponent);
        rep.ci_hi = std::max(hi, rep.exponent);
    } else {
        rep.ci_lo = rep.ci_hi = rep.exponent;
    }
    return rep;
}

FitReport fit_power_law_resampled(std::span<const double> x,
                                  const std::vector<std::vector<double>>& samples,
                                  int bootstrap_n, std::uint64_t seed) {
    if (x.size() != samples.size())
        throw std::invalid_argument("fit_power_law_resampled: size mismatch");
    const std::size_t n = x.size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (samples[i].empty())
            throw std::invalid_argument("fit_power_law_resampled: empty sample set");
        y[i] = mean(samples[i]);
    }
    check_loglog_inputs(x, y);

    std::vector<double> lx(n);
    for (std::size_t i = 0; i < n; ++i) lx[i] = std::log(x[i]);

    auto rep = fit_power_law(x, y, 0, seed);
    rep.bootstrap_n = bootstrap_n;
    if (bootstrap_n > 0) {
        Rng rng(seed);
        std::vector<double> slopes;
        slopes.reserve(static_cast<std::size_t>(bootstrap_n));
        std::vector<double> by(n);
        for (int b = 0; b < bootstrap_n; ++b) {
            bool ok = true;
            for (std::size_t i = 0; i < n; ++i) {
                const auto& s = samples[i];
                double acc = 0.0;
                for (std::size_t k = 0; k < s.size(); ++k)
                    acc += s[static_cast<std::size_t>(rng.below(s.size()))];
                const double m = acc / static_cast<double>(s.size());
                if (!(m > 0.0)) {
                    ok = false;
                    break;
                }
                by[i] = std::log(m);
            }
            if (!ok) continue;
            slopes.push_back(least_squares(lx, by).slope);
        }
        if (!slopes.empty()) {
            auto [lo, hi] = percentile_interval(slopes, 0.95);
            rep.ci_lo = std::min(lo, rep.exponent);
            rep.ci_hi = std::max(hi, rep.exponent);
        }
    }
    return rep;
}

MeanCi bootstrap_mean_ci(std::span<const double> samples, int bootstrap_n, std::uint64_t seed) {
    if (samples.empty()) throw std::invalid_argument("bootstrap_mean_ci: empty sample");
    MeanCi out{mean(samples), 0.0, 0.0};
    if (samples.size() == 1 || bootstrap_n <= 0) {
        out.ci_lo = out.ci_hi = out.mean;
        return out;
    }
    Rng rng(seed);
    std::vector<double> means(static_cast<std::size_t>(bootstrap_n));
    for (auto& m : means) {
        double acc = 0.0;
        for (std::size_t k = 0; k < samples.size(); ++k)
            acc += samples[static_cast<std::size_t>(rng.below(samples.size()))];
        m = acc / static_cast<double>(samples.size());
    }
    auto [lo, hi] = percentile_interval(means, 0.95);
    out.ci_lo = std::min(lo, out.mean);
    out.ci_hi = std::max(hi, out.mean);
    return out;
}

}  // namespace entrosim
