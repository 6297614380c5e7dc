#include "cylperc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "cylperc/errors.hpp"

namespace cylperc {

EstimateWithCI binomial_estimate(std::size_t successes, std::size_t replicas, std::uint64_t seed) {
  EstimateWithCI e;
  e.replicas = replicas;
  e.seed = seed;
  if (replicas == 0) return e;
  e.mean = static_cast<double>(successes) / static_cast<double>(replicas);
  e.se = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(replicas));
  return e;
}

void RunningStats::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

double RunningStats::variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

double RunningStats::stderr_of_mean() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

HomogeneityTest two_sample_chi_square(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                                      std::size_t min_pooled) {
  if (a.empty() || b.empty()) throw DomainError("two_sample_chi_square: empty sample");
  std::map<std::size_t, std::pair<double, double>> freq;
  for (auto v : a) freq[v].first += 1.0;
  for (auto v : b) freq[v].second += 1.0;

  std::vector<std::pair<double, double>> bins;
  std::pair<double, double> cur{0.0, 0.0};
  for (const auto& [value, c] : freq) {
    cur.first += c.first;
    cur.second += c.second;
    if (cur.first + cur.second >= static_cast<double>(min_pooled)) {
      bins.push_back(cur);
      cur = {0.0, 0.0};
    }
  }
  if (cur.first + cur.second > 0.0) {
    if (bins.empty()) {
      bins.push_back(cur);
    } else {
      bins.back().first += cur.first;
      bins.back().second += cur.second;
    }
  }

  HomogeneityTest t;
  if (bins.size() < 2) return t;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double n = na + nb;
  for (const auto& [ca, cb] : bins) {
    const double pooled = ca + cb;
    const double ea = pooled * na / n;
    const double eb = pooled * nb / n;
    t.statistic += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
  }
  t.dof = static_cast<int>(bins.size()) - 1;
  boost::math::chi_squared dist(t.dof);
  t.p_value = boost::math::cdf(boost::math::complement(dist, t.statistic));
  return t;
}

double normal_quantile(double p) {
  static const boost::math::normal n01;
  return boost::math::quantile(n01, p);
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("ols_slope: need two or more paired points");
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m;
  const double my = sy / m;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace cylperc
