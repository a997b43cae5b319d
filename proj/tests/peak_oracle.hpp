#pragma once

// Brute-force reference for the peak search, used only by tests. Transliterates
// the definitions directly with quadratic scans and stays independent of the
// library implementation:
//   (a) candidates are strict local maxima; a plateau flanked by strictly
//       lower samples yields one candidate at its floor midpoint
//   (b) distance: process candidates by descending height (equal heights
//       later-index first); keep one only if no kept peak lies closer than
//       `distance` samples
//   (c) prominence: inside a wlen window, each base is the minimum between
//       the peak and the nearest strictly higher sample (or window edge),
//       tie positions resolving nearest to the peak; prominence is the peak
//       height over the higher base; drop peaks under the threshold
//   (d) width: linear interpolation at height - prominence * rel_height,
//       bounded by the bases; drop peaks narrower than the threshold

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <vector>

namespace oracle {

struct Peak {
  int pos = 0;
  double prominence = 0.0;
  double width = 0.0;
};

inline std::vector<int> plateau_maxima(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<int> out;
  for (int start = 1; start < n - 1; ++start) {
    if (!(x[start] > x[start - 1])) continue;
    int end = start;
    while (end + 1 < n && x[end + 1] == x[start]) ++end;
    if (end + 1 < n && x[end + 1] < x[start]) out.push_back((start + end) / 2);
  }
  return out;
}

inline std::vector<int> distance_filter(const std::vector<int>& candidates,
                                        const std::vector<double>& x, int distance) {
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[candidates[a]] != x[candidates[b]]) return x[candidates[a]] > x[candidates[b]];
    return candidates[a] > candidates[b];
  });

  std::vector<int> kept_positions;
  std::vector<bool> kept(candidates.size(), false);
  for (std::size_t oi : order) {
    bool clear = true;
    for (int pos : kept_positions) {
      if (std::abs(candidates[oi] - pos) < distance) {
        clear = false;
        break;
      }
    }
    if (clear) {
      kept[oi] = true;
      kept_positions.push_back(candidates[oi]);
    }
  }

  std::vector<int> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (kept[i]) out.push_back(candidates[i]);
  }
  return out;
}

struct Bases {
  double prominence = 0.0;
  int left = 0;
  int right = 0;
};

inline Bases prominence_of(const std::vector<double>& x, int peak, int wlen) {
  const int n = static_cast<int>(x.size());
  const int i_min = std::max(peak - wlen / 2, 0);
  const int i_max = std::min(peak + wlen / 2, n - 1);

  int left_stop = i_min - 1;
  for (int i = peak - 1; i >= i_min; --i) {
    if (x[i] > x[peak]) {
      left_stop = i;
      break;
    }
  }
  double left_min = x[peak];
  int left_base = peak;
  for (int i = peak; i > left_stop; --i) {
    if (x[i] < left_min) {
      left_min = x[i];
      left_base = i;
    }
  }

  int right_stop = i_max + 1;
  for (int i = peak + 1; i <= i_max; ++i) {
    if (x[i] > x[peak]) {
      right_stop = i;
      break;
    }
  }
  double right_min = x[peak];
  int right_base = peak;
  for (int i = peak; i < right_stop; ++i) {
    if (x[i] < right_min) {
      right_min = x[i];
      right_base = i;
    }
  }

  return {x[peak] - std::max(left_min, right_min), left_base, right_base};
}

inline double width_of(const std::vector<double>& x, int peak, const Bases& bases,
                       double rel_height) {
  const double height = x[peak] - bases.prominence * rel_height;

  int i = peak;
  while (i > bases.left && height < x[i]) --i;
  double left_ip = static_cast<double>(i);
  if (x[i] < height) left_ip += (height - x[i]) / (x[i + 1] - x[i]);

  i = peak;
  while (i < bases.right && height < x[i]) ++i;
  double right_ip = static_cast<double>(i);
  if (x[i] < height) right_ip -= (height - x[i]) / (x[i - 1] - x[i]);

  return right_ip - left_ip;
}

struct Params {
  int distance = 1;
  double prominence = 0.0;
  double width = 0.0;
  int wlen = 2;
  double rel_height = 0.5;
};

inline std::vector<Peak> find_peaks(const std::vector<double>& x, const Params& p) {
  std::vector<Peak> out;
  for (int pos : distance_filter(plateau_maxima(x), x, p.distance)) {
    const Bases bases = prominence_of(x, pos, p.wlen);
    if (bases.prominence < p.prominence) continue;
    const double width = width_of(x, pos, bases, p.rel_height);
    if (width < p.width) continue;
    out.push_back({pos, bases.prominence, width});
  }
  return out;
}

}  // namespace oracle
