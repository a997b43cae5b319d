#include "egoloc/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "egoloc/error.hpp"

namespace egoloc {

void DetectionTimeline::validate() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Detection& d = entries[i];
    if (i > 0 && entries[i - 1].frame >= d.frame) {
      throw Error(ErrorCode::InvalidArgument, "timeline frames must be strictly increasing");
    }
    if (d.frame > query_frame) {
      throw Error(ErrorCode::InvalidArgument, "timeline entry after the query frame");
    }
    if (!(d.score >= 0.0 && d.score <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "detection score outside [0, 1]");
    }
  }
}

void PeakParams::validate() const {
  if (median_kernel < 1 || median_kernel % 2 == 0) {
    throw Error(ErrorCode::InvalidKernel, "median kernel must be odd and >= 1");
  }
  if (distance < 1) throw Error(ErrorCode::InvalidArgument, "distance must be >= 1");
  if (width < 0.0) throw Error(ErrorCode::InvalidArgument, "width must be >= 0");
  if (wlen < 2) throw Error(ErrorCode::InvalidArgument, "wlen must be >= 2");
  if (!(rel_height > 0.0 && rel_height <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "rel_height must be in (0, 1]");
  }
  if (prominence < 0.0) throw Error(ErrorCode::InvalidArgument, "prominence must be >= 0");
}

std::vector<double> median_filter(std::span<const double> scores, int kernel,
                                  PaddingMode padding) {
  if (kernel < 1 || kernel % 2 == 0) {
    throw Error(ErrorCode::InvalidKernel, "median kernel must be odd and positive");
  }
  const int n = static_cast<int>(scores.size());
  if (n == 0) return {};
  if (kernel > 2 * n - 1) {
    throw Error(ErrorCode::InvalidKernel, "median kernel exceeds 2*len - 1");
  }

  const int half = kernel / 2;
  std::vector<double> out(scores.size());
  std::vector<double> window(static_cast<std::size_t>(kernel));
  for (int i = 0; i < n; ++i) {
    for (int k = -half; k <= half; ++k) {
      const int j = i + k;
      double value;
      if (j < 0) {
        value = padding == PaddingMode::Replicate ? scores[0] : 0.0;
      } else if (j >= n) {
        value = padding == PaddingMode::Replicate ? scores[n - 1] : 0.0;
      } else {
        value = scores[j];
      }
      window[static_cast<std::size_t>(k + half)] = value;
    }
    auto mid = window.begin() + half;
    std::nth_element(window.begin(), mid, window.end());
    out[static_cast<std::size_t>(i)] = *mid;
  }
  return out;
}

namespace {

// Strict local maxima; a plateau flanked by strictly lower samples becomes
// one candidate at the floor midpoint of the plateau.
std::vector<int> local_maxima(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  std::vector<int> peaks;
  int i = 1;
  while (i < n - 1) {
    if (x[i] > x[i - 1]) {
      int j = i;
      while (j + 1 < n && x[j + 1] == x[i]) ++j;
      if (j + 1 < n && x[j + 1] < x[i]) {
        peaks.push_back((i + j) / 2);
        i = j + 1;
        continue;
      }
      i = j + 1;
      continue;
    }
    ++i;
  }
  return peaks;
}

// Greedy highest-first distance filter. Equal heights are processed
// later-index first; a candidate survives only if no kept peak lies closer
// than `distance` samples.
std::vector<int> filter_by_distance(const std::vector<int>& peaks, std::span<const double> x,
                                    int distance) {
  const int m = static_cast<int>(peaks.size());
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (x[peaks[a]] != x[peaks[b]]) return x[peaks[a]] > x[peaks[b]];
    return a > b;
  });

  std::vector<char> keep(static_cast<std::size_t>(m), 1);
  for (int oi = 0; oi < m; ++oi) {
    const int j = order[static_cast<std::size_t>(oi)];
    if (!keep[static_cast<std::size_t>(j)]) continue;
    for (int k = j - 1; k >= 0 && peaks[j] - peaks[k] < distance; --k) {
      keep[static_cast<std::size_t>(k)] = 0;
    }
    for (int k = j + 1; k < m && peaks[k] - peaks[j] < distance; ++k) {
      keep[static_cast<std::size_t>(k)] = 0;
    }
  }

  std::vector<int> out;
  for (int j = 0; j < m; ++j) {
    if (keep[static_cast<std::size_t>(j)]) out.push_back(peaks[j]);
  }
  return out;
}

struct ProminenceData {
  double prominence = 0.0;
  int left_base = 0;
  int right_base = 0;
};

// Scans outward from the peak inside [i_min, i_max] until a strictly higher
// sample; base = nearest-to-peak position of the minimum on each side.
ProminenceData measure_prominence(std::span<const double> x, int peak, int wlen) {
  const int n = static_cast<int>(x.size());
  int i_min = 0;
  int i_max = n - 1;
  if (wlen >= 2) {
    i_min = std::max(peak - wlen / 2, i_min);
    i_max = std::min(peak + wlen / 2, i_max);
  }

  ProminenceData out;
  out.left_base = peak;
  double left_min = x[peak];
  for (int i = peak; i >= i_min && x[i] <= x[peak]; --i) {
    if (x[i] < left_min) {
      left_min = x[i];
      out.left_base = i;
    }
  }

  out.right_base = peak;
  double right_min = x[peak];
  for (int i = peak; i <= i_max && x[i] <= x[peak]; ++i) {
    if (x[i] < right_min) {
      right_min = x[i];
      out.right_base = i;
    }
  }

  out.prominence = x[peak] - std::max(left_min, right_min);
  return out;
}

double measure_width(std::span<const double> x, int peak, const ProminenceData& prom,
                     double rel_height) {
  const double height = x[peak] - prom.prominence * rel_height;

  int i = peak;
  while (i > prom.left_base && height < x[i]) --i;
  double left_ip = static_cast<double>(i);
  if (x[i] < height) {
    left_ip += (height - x[i]) / (x[i + 1] - x[i]);
  }

  i = peak;
  while (i < prom.right_base && height < x[i]) ++i;
  double right_ip = static_cast<double>(i);
  if (x[i] < height) {
    right_ip -= (height - x[i]) / (x[i - 1] - x[i]);
  }

  return right_ip - left_ip;
}

}  // namespace

std::vector<PeakInfo> find_peaks(std::span<const double> scores, const PeakParams& params) {
  params.validate();
  if (scores.size() < 3) {
    throw Error(ErrorCode::TooShort, "peak search needs at least 3 samples");
  }

  std::vector<int> candidates = local_maxima(scores);
  candidates = filter_by_distance(candidates, scores, params.distance);

  std::vector<PeakInfo> out;
  for (int pos : candidates) {
    const ProminenceData prom = measure_prominence(scores, pos, params.wlen);
    if (prom.prominence < params.prominence) continue;
    const double width = measure_width(scores, pos, prom, params.rel_height);
    if (width < params.width) continue;
    out.push_back({pos, prom.prominence, width});
  }
  return out;
}

PeakSet select_response_peaks(const DetectionTimeline& timeline, const PeakParams& params) {
  timeline.validate();
  if (timeline.entries.empty()) {
    throw Error(ErrorCode::EmptyInput, "timeline has no entries");
  }

  std::vector<double> raw(timeline.entries.size());
  for (std::size_t i = 0; i < timeline.entries.size(); ++i) raw[i] = timeline.entries[i].score;

  if (raw.size() < 3) return {};  // too short for peak structure

  const std::vector<double> smoothed = median_filter(raw, params.median_kernel, params.padding);
  const std::vector<PeakInfo> infos = find_peaks(smoothed, params);

  PeakSet peaks;
  peaks.reserve(infos.size());
  for (const PeakInfo& info : infos) {
    const Detection& d = timeline.entries[static_cast<std::size_t>(info.pos)];
    peaks.push_back({d.frame, d.bbox, d.score, info.prominence, info.width});
  }
  return peaks;
}

std::pair<int, int> expand_peak_window(std::span<const double> scores, int peak_pos,
                                       double window_threshold) {
  const int n = static_cast<int>(scores.size());
  if (peak_pos < 0 || peak_pos >= n) {
    throw Error(ErrorCode::InvalidArgument, "peak position outside the sequence");
  }
  if (!(window_threshold > 0.0 && window_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "window threshold must be in (0, 1]");
  }
  const double bound = window_threshold * scores[peak_pos];
  int lo = peak_pos;
  while (lo - 1 >= 0 && scores[lo - 1] >= bound) --lo;
  int hi = peak_pos;
  while (hi + 1 < n && scores[hi + 1] >= bound) ++hi;
  return {lo, hi};
}

std::vector<int> expand_peak_window(const DetectionTimeline& timeline, const Peak& peak,
                                    double window_threshold, const PeakParams& params) {
  std::vector<double> raw(timeline.entries.size());
  int pos = -1;
  for (std::size_t i = 0; i < timeline.entries.size(); ++i) {
    raw[i] = timeline.entries[i].score;
    if (timeline.entries[i].frame == peak.frame_idx) pos = static_cast<int>(i);
  }
  if (pos < 0) {
    throw Error(ErrorCode::InvalidArgument, "peak frame not present in the timeline");
  }
  const std::vector<double> smoothed = median_filter(raw, params.median_kernel, params.padding);
  const auto [lo, hi] = expand_peak_window(smoothed, pos, window_threshold);
  std::vector<int> frames;
  frames.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (int i = lo; i <= hi; ++i) {
    frames.push_back(timeline.entries[static_cast<std::size_t>(i)].frame);
  }
  return frames;
}

PeakSet apply_strategy(const PeakSet& peaks, PeakStrategy strategy) {
  if (peaks.empty()) {
    throw Error(ErrorCode::EmptyPeaks, "strategy applied to an empty peak set");
  }
  switch (strategy) {
    case PeakStrategy::DetPeaks:
      return peaks;
    case PeakStrategy::LastDetPeak: {
      const auto it = std::max_element(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
        return a.frame_idx < b.frame_idx;
      });
      return {*it};
    }
    case PeakStrategy::TopDetPeak: {
      const auto it = std::max_element(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.frame_idx < b.frame_idx;  // ties go to the later frame
      });
      return {*it};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown peak strategy");
}

}  // namespace egoloc
