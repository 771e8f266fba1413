#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace spike {

double mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);
double sample_stddev(const std::vector<double>& xs);

// One-sample Kolmogorov-Smirnov distance against a continuous cdf.
double ks_distance(std::vector<double> xs,
                   const std::function<double(double)>& cdf);

struct WilsonInterval {
  double center = 0.0;
  double half_width = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for a binomial proportion (z = 1.96 is 95%).
WilsonInterval wilson_interval(std::size_t successes, std::size_t n,
                               double z = 1.96);

}  // namespace spike
