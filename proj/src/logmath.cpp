// Copyright 2026 The dfaguide Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dfaguide/logmath.hpp"

#include <algorithm>

namespace dfaguide {

double max_finite(std::span<const double> values) {
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  return m;
}

double log_sum_exp(std::span<const double> values) {
  const double m = max_finite(values);
  if (m == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - m);
  return m + std::log(sum);
}

double log_normalize(std::span<double> values) {
  const double z = log_sum_exp(values);
  if (z == kNegInf) return z;
  for (double& v : values) v -= z;
  return z;
}

}  // namespace dfaguide
