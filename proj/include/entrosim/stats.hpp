#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace entrosim {

struct FitReport {
    double exponent;
    double intercept;      // in ln y = exponent * ln x + intercept
    double ci_lo;          // bootstrap 95% interval, widened to contain the estimate
    double ci_hi;
    int bootstrap_n;
    std::vector<double> residuals;
    int points_used;
};

// Least squares on (ln x, ln y) with a percentile bootstrap over points.
// Needs >= 3 strictly positive points.
FitReport fit_power_law(std::span<const double> x, std::span<const double> y, int bootstrap_n,
                        std::uint64_t seed);

// Same fit, but each y_i is the mean of a raw sample set and the bootstrap
// resamples trajectories within every point.
FitReport fit_power_law_resampled(std::span<const double> x,
                                  const std::vector<std::vector<double>>& samples,
                                  int bootstrap_n, std::uint64_t seed);

struct MeanCi {
    double mean;
    double ci_lo;
    double ci_hi;
};

MeanCi bootstrap_mean_ci(std::span<const double> samples, int bootstrap_n, std::uint64_t seed);

double mean(std::span<const double> v);
double sample_stddev(std::span<const double> v);

}  // namespace entrosim
