#include "spike/stats.hpp"

#include <algorithm>
#include <cmath>

#include "spike/errors.hpp"

namespace spike {

double mean(const std::vector<double>& xs) {
  if (xs.empty()) fail("invalid-dimension", "mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) fail("invalid-dimension", "variance needs two samples");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double sample_stddev(const std::vector<double>& xs) {
  return std::sqrt(sample_variance(xs));
}

double ks_distance(std::vector<double> xs,
                   const std::function<double(double)>& cdf) {
  if (xs.empty()) fail("invalid-dimension", "ks_distance of empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, f - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
  }
  return d;
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) fail("invalid-dimension", "wilson_interval needs n > 0");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  WilsonInterval w;
  w.center = (p + z2 / (2.0 * nn)) / denom;
  w.half_width =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  w.lo = std::max(0.0, w.center - w.half_width);
  w.hi = std::min(1.0, w.center + w.half_width);
  return w;
}

}  // namespace spike
