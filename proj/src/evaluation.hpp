// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace fforge {

inline constexpr double kMatchIou = 0.5;

struct MatchedPair {
  std::size_t pred = 0;
  std::size_t truth = 0;
  double iou = 0.0;
};

struct MatchReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t proposed = 0;      // M
  std::size_t ground_truth = 0;  // N
  std::vector<MatchedPair> pairs;  // accepted matches, in assignment order
};

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double min_area = 0.0;
};

struct ScoreRow {
  std::string city;
  Scores scores;
  std::size_t tp = 0;
  std::size_t proposed = 0;
  std::size_t ground_truth = 0;
};

// Rasterized IoU of every (pred, truth) pair on a height x width grid; row-major [pred][truth].
std::vector<double> pairwise_iou(const std::vector<Polygon>& pred, const std::vector<Polygon>& truth,
                                 std::size_t height, std::size_t width);

// Greedy one-to-one assignment by descending IoU (ties: truth index, then pred index);
// pairs at or above the threshold are true positives.
MatchReport match_polygons(const std::vector<Polygon>& pred, const std::vector<Polygon>& truth,
                           std::size_t height, std::size_t width, double iou_threshold = kMatchIou);

// precision = tp/M, recall = tp/N, f1 = 2tp/(M+N).
Scores f1_score(std::size_t tp, std::size_t proposed, std::size_t ground_truth);
// Harmonic mean of an already computed precision/recall pair.
double f1_from_precision_recall(double precision, double recall);

// Pools tp/M/N over all images of a city, then scores once.
ScoreRow score_report(std::span<const MatchReport> per_image, const std::string& city, double min_area);

std::string score_csv(std::span<const ScoreRow> rows);
std::string score_text(std::span<const ScoreRow> rows);

}  // namespace fforge
