#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace cylperc {

// Value with standard error.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Binomial proportion estimate; se = sqrt(mean (1 - mean) / replicas).
struct EstimateWithCI {
  double mean = 0.0;
  double se = 0.0;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;

  // One-sided upper confidence limit at the given normal quantile.
  double upper(double z) const { return mean + z * se; }
};

EstimateWithCI binomial_estimate(std::size_t successes, std::size_t replicas, std::uint64_t seed);

// Welford accumulator.
class RunningStats {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased
  double stderr_of_mean() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct HomogeneityTest {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Chi-square test that two samples of nonnegative integers share one
// distribution. Values are binned on pooled order statistics so every bin
// holds at least `min_pooled` observations.
HomogeneityTest two_sample_chi_square(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                                      std::size_t min_pooled = 20);

// Standard normal quantile.
double normal_quantile(double p);

// Least-squares slope of y against x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cylperc
