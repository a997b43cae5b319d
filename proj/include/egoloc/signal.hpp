#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "egoloc/camera.hpp"

namespace egoloc {

struct Bbox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  PixelPoint centroid() const { return {x + w / 2.0, y + h / 2.0}; }
};

struct Detection {
  int frame = 0;
  Bbox bbox;
  double score = 0.0;
};

// Per-frame top-1 detection sequence for one query: frames strictly
// increasing, all at or before the query frame, scores in [0, 1].
struct DetectionTimeline {
  std::string query_id;
  int query_frame = 0;
  std::vector<Detection> entries;

  void validate() const;
};

enum class PaddingMode { Replicate, Zero };

struct PeakParams {
  int median_kernel = 5;
  int distance = 25;
  double width = 3.0;
  double prominence = 0.2;
  int wlen = 50;
  double rel_height = 0.5;
  PaddingMode padding = PaddingMode::Replicate;

  void validate() const;
};

// A peak located in a raw score sequence: position plus measured properties.
struct PeakInfo {
  int pos = 0;
  double prominence = 0.0;
  double width = 0.0;
};

struct Peak {
  int frame_idx = 0;
  Bbox bbox;
  double score = 0.0;  // raw (unsmoothed) detection score at the peak frame
  double prominence = 0.0;
  double width = 0.0;
};

using PeakSet = std::vector<Peak>;

// Sliding-window median, same length as the input. Edge windows are filled
// with the replicated edge sample or zeros depending on the padding mode.
std::vector<double> median_filter(std::span<const double> scores, int kernel,
                                  PaddingMode padding = PaddingMode::Replicate);

// Local-maximum search with distance, prominence and width filtering, in
// that order. Plateaus flanked by strictly lower samples yield a single
// candidate at the floor midpoint. Prominence bases are the minima between
// the peak and the nearest strictly higher sample inside a wlen-sized
// window; widths are measured by linear interpolation at
// height - prominence * rel_height.
std::vector<PeakInfo> find_peaks(std::span<const double> scores, const PeakParams& params);

// Smooths the timeline's scores, finds peaks, and pairs every peak with the
// raw bbox/score of its frame. An empty result means no peak survived.
PeakSet select_response_peaks(const DetectionTimeline& timeline, const PeakParams& params);

// Contiguous index range [first, last] around peak_pos where every sample
// satisfies scores[i] >= threshold * scores[peak_pos].
std::pair<int, int> expand_peak_window(std::span<const double> scores, int peak_pos,
                                       double window_threshold);

// Timeline-level variant: expands on the median-filtered curve and returns
// the frame indices of the covered entries.
std::vector<int> expand_peak_window(const DetectionTimeline& timeline, const Peak& peak,
                                    double window_threshold, const PeakParams& params);

enum class PeakStrategy { LastDetPeak, TopDetPeak, DetPeaks };

// LastDetPeak keeps the latest peak, TopDetPeak the highest-scoring one
// (ties resolve to the later frame), DetPeaks keeps everything.
PeakSet apply_strategy(const PeakSet& peaks, PeakStrategy strategy);

}  // namespace egoloc
