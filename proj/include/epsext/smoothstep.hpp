#pragma once

#include <cmath>
#include <utility>

namespace epsext {

// C-infinity step built from exp(-1/t): 0 on (-inf, 0], 1 on [1, inf).
// All derivatives vanish at both breakpoints, so functions assembled from it
// stay flat where their plateaus begin.
inline std::pair<double, double> smoothstep01(double u) {
    if (u <= 0.0) return {0.0, 0.0};
    if (u >= 1.0) return {1.0, 0.0};
    double a = std::exp(-1.0 / u);
    double b = std::exp(-1.0 / (1.0 - u));
    double sum = a + b;
    if (sum == 0.0) return {u < 0.5 ? 0.0 : 1.0, 0.0};
    double value = a / sum;
    double deriv = a * b * (1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u))) / (sum * sum);
    return {value, deriv};
}

}  // namespace epsext
