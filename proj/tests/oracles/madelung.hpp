#pragma once

// Alternating simple-cubic lattice sum  sum_{n != 0} (-1)^{n1+n2+n3} / |n|
// by Evjen's neutral-cube weighting (faces 1/2, edges 1/4, corners 1/8).
// The limit is minus the rock-salt Madelung constant.

#include <cmath>
#include <cstdlib>

namespace oracle {

inline double alternating_lattice_sum(int half_width) {
  double s = 0.0;
  const int m = half_width;
  for (int i = -m; i <= m; ++i) {
    for (int j = -m; j <= m; ++j) {
      for (int k = -m; k <= m; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        double w = 1.0;
        if (std::abs(i) == m) w *= 0.5;
        if (std::abs(j) == m) w *= 0.5;
        if (std::abs(k) == m) w *= 0.5;
        const double sign = ((i + j + k) % 2 == 0) ? 1.0 : -1.0;
        s += w * sign / std::sqrt(static_cast<double>(i * i + j * j + k * k));
      }
    }
  }
  return s;
}

}  // namespace oracle
