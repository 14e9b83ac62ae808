// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <tuple>

#include "error.hpp"

namespace fforge {

namespace {

struct PixelSet {
  std::vector<std::uint32_t> index;  // sorted linear pixel indices
  std::size_t r0 = 0, r1 = 0, c0 = 0, c1 = 0;
};

PixelSet pixels_of(const Polygon& p, std::size_t height, std::size_t width) {
  BinaryMask m(height, width);
  rasterize_into(p, m);
  PixelSet s;
  s.r0 = height;
  s.c0 = width;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m.bits()[i]) continue;
    s.index.push_back(static_cast<std::uint32_t>(i));
    const std::size_t r = i / width, c = i % width;
    s.r0 = std::min(s.r0, r);
    s.r1 = std::max(s.r1, r + 1);
    s.c0 = std::min(s.c0, c);
    s.c1 = std::max(s.c1, c + 1);
  }
  return s;
}

double set_iou(const PixelSet& a, const PixelSet& b) {
  if (a.index.empty() && b.index.empty()) return 0.0;
  if (a.r1 <= b.r0 || b.r1 <= a.r0 || a.c1 <= b.c0 || b.c1 <= a.c0) return 0.0;
  std::size_t inter = 0;
  auto i = a.index.begin();
  auto j = b.index.begin();
  while (i != a.index.end() && j != b.index.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++inter;
      ++i;
      ++j;
    }
  }
  const std::size_t uni = a.index.size() + b.index.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

std::vector<double> pairwise_iou(const std::vector<Polygon>& pred, const std::vector<Polygon>& truth,
                                 std::size_t height, std::size_t width) {
  std::vector<PixelSet> ps, ts;
  ps.reserve(pred.size());
  ts.reserve(truth.size());
  for (const auto& p : pred) ps.push_back(pixels_of(p, height, width));
  for (const auto& t : truth) ts.push_back(pixels_of(t, height, width));
  std::vector<double> iou(pred.size() * truth.size(), 0.0);
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t j = 0; j < ts.size(); ++j) iou[i * ts.size() + j] = set_iou(ps[i], ts[j]);
  return iou;
}

MatchReport match_polygons(const std::vector<Polygon>& pred, const std::vector<Polygon>& truth,
                           std::size_t height, std::size_t width, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ValidationError("match_polygons: IoU threshold must lie in (0,1]");
  }
  const auto iou = pairwise_iou(pred, truth, height, width);
  std::vector<MatchedPair> candidates;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < truth.size(); ++j) {
      const double v = iou[i * truth.size() + j];
      if (v >= iou_threshold) candidates.push_back({i, j, v});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const MatchedPair& a, const MatchedPair& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    return std::tie(a.truth, a.pred) < std::tie(b.truth, b.pred);
  });

  MatchReport rep;
  rep.proposed = pred.size();
  rep.ground_truth = truth.size();
  std::vector<bool> pred_used(pred.size(), false), truth_used(truth.size(), false);
  for (const auto& c : candidates) {
    if (pred_used[c.pred] || truth_used[c.truth]) continue;
    pred_used[c.pred] = true;
    truth_used[c.truth] = true;
    rep.pairs.push_back(c);
  }
  rep.tp = rep.pairs.size();
  rep.fp = rep.proposed - rep.tp;
  rep.fn = rep.ground_truth - rep.tp;
  return rep;
}

Scores f1_score(std::size_t tp, std::size_t proposed, std::size_t ground_truth) {
  if (tp > proposed || tp > ground_truth) {
    throw ValidationError("f1_score: tp exceeds proposed or ground-truth count");
  }
  Scores s;
  if (proposed == 0 && ground_truth == 0) {
    s.precision = s.recall = s.f1 = 1.0;
    return s;
  }
  s.precision = proposed == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(proposed);
  s.recall = ground_truth == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(ground_truth);
  s.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(proposed + ground_truth);
  return s;
}

double f1_from_precision_recall(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

ScoreRow score_report(std::span<const MatchReport> per_image, const std::string& city, double min_area) {
  if (per_image.empty()) throw ValidationError("score_report: no images for city '" + city + "'");
  ScoreRow row;
  row.city = city;
  for (const auto& r : per_image) {
    row.tp += r.tp;
    row.proposed += r.proposed;
    row.ground_truth += r.ground_truth;
  }
  row.scores = f1_score(row.tp, row.proposed, row.ground_truth);
  row.scores.min_area = min_area;
  return row;
}

std::string score_csv(std::span<const ScoreRow> rows) {
  std::string out = "City,Precision,Recall,F-score,minArea\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.4f,%.4f,%.4f,%g\n", r.city.c_str(), r.scores.precision,
                  r.scores.recall, r.scores.f1, r.scores.min_area);
    out += buf;
  }
  return out;
}

std::string score_text(std::span<const ScoreRow> rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %9s %9s %9s %8s %6s %6s %6s\n", "City", "Precision", "Recall",
                "F-score", "minArea", "tp", "M", "N");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-12s %9.4f %9.4f %9.4f %8g %6zu %6zu %6zu\n", r.city.c_str(),
                  r.scores.precision, r.scores.recall, r.scores.f1, r.scores.min_area, r.tp, r.proposed,
                  r.ground_truth);
    out += buf;
  }
  return out;
}

}  // namespace fforge
