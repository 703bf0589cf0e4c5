// Copyright 2026 The dpgnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Reference implementations used as independent oracles. They share no code
// with the library.

#include <cmath>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

namespace dpgnn::testing {

using HighPrecision = boost::multiprecision::cpp_dec_float_50;

// (1/(a-1)) log sum_k C(a,k) (1-q)^(a-k) q^k exp(k(k-1)/(2 sigma^2)),
// summed directly in 50-digit arithmetic.
inline double SubsampledGaussianRdpOracle(int order, double q, double sigma) {
  const HighPrecision hq(q);
  const HighPrecision one_minus_q = HighPrecision(1) - hq;
  const HighPrecision two_var = HighPrecision(2) * HighPrecision(sigma) * HighPrecision(sigma);
  HighPrecision sum = 0;
  for (int k = 0; k <= order; ++k) {
    const HighPrecision binom =
        boost::math::binomial_coefficient<HighPrecision>(static_cast<unsigned>(order),
                                                         static_cast<unsigned>(k));
    sum += binom * pow(one_minus_q, order - k) * pow(hq, k) *
           exp(HighPrecision(k) * HighPrecision(k - 1) / two_var);
  }
  return static_cast<double>(log(sum) / HighPrecision(order - 1));
}

inline double StdNormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Exact (eps, delta) curve of the scalar Gaussian mechanism with sensitivity
// 1: delta(eps) = Phi(1/(2s) - eps s) - e^eps Phi(-1/(2s) - eps s). Returns
// the smallest eps with delta(eps) <= delta, by bisection.
inline double AnalyticGaussianEpsilon(double sigma, double delta) {
  const auto delta_of = [sigma](double eps) {
    return StdNormalCdf(0.5 / sigma - eps * sigma) -
           std::exp(eps) * StdNormalCdf(-0.5 / sigma - eps * sigma);
  };
  double lo = 0.0;
  double hi = 1.0;
  while (delta_of(hi) > delta) hi *= 2.0;
  if (delta_of(lo) <= delta) return 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (delta_of(mid) > delta ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace dpgnn::testing
