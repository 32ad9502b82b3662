// Copyright 2026 The qadder Authors
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

// Embedded Dormand-Prince 5(4) pair with Hairer's PI step controller.

#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qadder/dynamics.hpp"
#include "qadder/errors.hpp"

namespace qadder::detail {

template <class State>
double rms_error(const State& err, const State& y0, const State& y1, double atol, double rtol) {
  const auto scale = atol + rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array();
  return std::sqrt((err.cwiseAbs().array() / scale).square().mean());
}

// Integrates y' = f(t, y) from t0 to t1.  f is called as f(t, y, out).
template <class State, class Rhs>
State dopri5(Rhs&& f, State y, double t0, double t1, double max_step, const IntegratorSpec& spec,
             EvolutionStats& stats) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                   a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double kSafe = 0.9, kFacMin = 0.2, kFacMax = 10.0, kBeta = 0.04;
  constexpr double kExpo = 0.2 - kBeta * 0.75;

  const double span = t1 - t0;
  if (span <= 0.0) return y;

  State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, tmp = y, y_new = y;
  f(t0, y, k1);
  ++stats.rhs_evals;

  // Initial step from the size of y and y'.
  double h;
  {
    const double d0 = std::max(y.norm(), 1e-300);
    const double d1 = std::max(k1.norm(), 1e-300);
    h = 0.01 * d0 / d1;
    h = std::min({h, span, max_step});
    h = std::max(h, 1e-12 * span);
  }

  double t = t0;
  double facold = 1e-4;
  bool last_rejected = false;
  while (t < t1) {
    if (stats.steps + stats.rejected >= spec.max_steps) {
      throw IntegrationError("step budget exhausted", t);
    }
    bool final_step = false;
    if (t + h >= t1 || t1 - (t + h) < 1e-12 * span) {
      h = t1 - t;
      final_step = true;
    }

    tmp = y + h * (a21 * k1);
    f(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, tmp, k6);
    y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(t + h, y_new, k7);
    stats.rhs_evals += 6;

    tmp = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err = rms_error(tmp, y, y_new, spec.abs_tol, spec.rel_tol);
    if (!std::isfinite(err)) {
      throw IntegrationError("non-finite error estimate", t);
    }

    const double fac11 = std::pow(err, kExpo);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(facold, kBeta);
      fac = std::clamp(fac / kSafe, 1.0 / kFacMax, 1.0 / kFacMin);
      double h_new = h / fac;
      facold = std::max(err, 1e-4);
      if (last_rejected) h_new = std::min(h_new, h);
      t = final_step ? t1 : t + h;
      y.swap(y_new);
      k1.swap(k7);
      ++stats.steps;
      last_rejected = false;
      h = std::min(h_new, max_step);
    } else {
      h = h / std::min(1.0 / kFacMin, fac11 / kSafe);
      ++stats.rejected;
      last_rejected = true;
      if (h < 1e-14 * std::max(std::abs(t), span)) {
        std::ostringstream os;
        os << "step size underflow (h = " << h << ")";
        throw IntegrationError(os.str(), t);
      }
    }
  }
  return y;
}

}  // namespace qadder::detail
