// Copyright (c) 2026 The rgbwkit authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rgbwkit/dataset.hpp"
#include "rgbwkit/image.hpp"
#include "rgbwkit/isp.hpp"
#include "rgbwkit/raw.hpp"

namespace rgbwkit {

// Scoring. Fidelity metrics (PSNR, SSIM) are computed on 8-bit RGB renders
// of prediction and ground truth produced by the same ISP configuration, so
// they measure what a viewer of the developed image would see. KLD compares
// the raw Bayer value distributions directly. LPIPS requires a learned
// network and is therefore ingested from an externally produced CSV rather
// than computed here; rows are matched by (scene_id, gain_db).

/// Peak signal-to-noise ratio over all pixels and channels of two 8-bit
/// renders, in dB against peak 255. Identical images score the 100 dB cap.
inline double psnr_display(const DisplayImage& a, const DisplayImage& b) {
  if (a.width != b.width || a.height != b.height) {
    throw Error("psnr: image sizes disagree");
  }
  double sq_sum = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    sq_sum += d * d;
  }
  const double mse = sq_sum / static_cast<double>(a.data.size());
  if (mse == 0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(255.0 * 255.0 / mse));
}

namespace detail {

inline const std::array<double, 11>& ssim_gaussian() {
  static const std::array<double, 11> g = [] {
    std::array<double, 11> w{};
    double sum = 0;
    for (int i = 0; i < 11; ++i) {
      const double d = i - 5;
      w[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
      sum += w[i];
    }
    for (auto& v : w) v /= sum;
    return w;
  }();
  return g;
}

/// Valid-region separable Gaussian blur; output is (w-10) x (h-10).
inline FloatPlane ssim_blur(const FloatPlane& p) {
  const auto& g = ssim_gaussian();
  const int w = p.width;
  const int h = p.height;
  FloatPlane horiz(w - 10, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w - 10; ++x) {
      double acc = 0;
      for (int k = 0; k < 11; ++k) acc += g[k] * p.at(x + k, y);
      horiz.at(x, y) = acc;
    }
  }
  FloatPlane out(w - 10, h - 10);
  for (int y = 0; y < h - 10; ++y) {
    for (int x = 0; x < w - 10; ++x) {
      double acc = 0;
      for (int k = 0; k < 11; ++k) acc += g[k] * horiz.at(x, y + k);
      out.at(x, y) = acc;
    }
  }
  return out;
}

inline double ssim_plane(const FloatPlane& x, const FloatPlane& y) {
  constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);
  const int w = x.width;
  const int h = x.height;
  FloatPlane xx(w, h), yy(w, h), xy(w, h);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    xx.data[i] = x.data[i] * x.data[i];
    yy.data[i] = y.data[i] * y.data[i];
    xy.data[i] = x.data[i] * y.data[i];
  }
  const FloatPlane mu_x = ssim_blur(x);
  const FloatPlane mu_y = ssim_blur(y);
  const FloatPlane m_xx = ssim_blur(xx);
  const FloatPlane m_yy = ssim_blur(yy);
  const FloatPlane m_xy = ssim_blur(xy);

  double total = 0;
  for (std::size_t i = 0; i < mu_x.data.size(); ++i) {
    const double mx = mu_x.data[i];
    const double my = mu_y.data[i];
    const double var_x = m_xx.data[i] - mx * mx;
    const double var_y = m_yy.data[i] - my * my;
    const double cov = m_xy.data[i] - mx * my;
    total += ((2 * mx * my + kC1) * (2 * cov + kC2)) /
             ((mx * mx + my * my + kC1) * (var_x + var_y + kC2));
  }
  return total / static_cast<double>(mu_x.data.size());
}

}  // namespace detail

/// Mean structural similarity of two 8-bit renders: 11x11 Gaussian windows
/// (sigma 1.5), K1=0.01, K2=0.03 on the 255 dynamic range, valid windows
/// only, averaged over the three channels.
inline double ssim_display(const DisplayImage& a, const DisplayImage& b) {
  if (a.width != b.width || a.height != b.height) {
    throw Error("ssim: image sizes disagree");
  }
  if (a.width < 11 || a.height < 11) {
    throw Error("ssim: images must be at least 11x11");
  }
  double sum = 0;
  for (int c = 0; c < 3; ++c) {
    FloatPlane pa(a.width, a.height), pb(b.width, b.height);
    for (int y = 0; y < a.height; ++y) {
      for (int x = 0; x < a.width; ++x) {
        pa.at(x, y) = a.at(x, y, c);
        pb.at(x, y) = b.at(x, y, c);
      }
    }
    sum += detail::ssim_plane(pa, pb);
  }
  return sum / 3.0;
}

/// Kullback–Leibler divergence KL(gt || pred) between 256-bin histograms of
/// the normalized raw Bayer values, with 1e-8 additive smoothing; natural
/// log. Captures global tone/distribution shifts the windowed metrics miss.
inline double kld_bayer(const RawImage& gt, const RawImage& pred) {
  if (gt.width != pred.width || gt.height != pred.height) {
    throw Error("kld: image sizes disagree");
  }
  constexpr int kBins = 256;
  constexpr double kEps = 1e-8;
  auto histogram = [](const RawImage& img) {
    std::array<double, kBins> bins{};
    const double span = img.white_level - img.black_level;
    for (std::uint16_t v : img.data) {
      const double v01 = std::clamp((v - static_cast<double>(img.black_level)) / span, 0.0, 1.0);
      const int idx = std::min(kBins - 1, static_cast<int>(v01 * kBins));
      bins[idx] += 1.0;
    }
    const double n = static_cast<double>(img.data.size());
    for (auto& b : bins) b = b / n + kEps;
    const double norm = 1.0 + kBins * kEps;
    for (auto& b : bins) b /= norm;
    return bins;
  };
  const auto p = histogram(gt);
  const auto q = histogram(pred);
  double kl = 0;
  for (int i = 0; i < kBins; ++i) kl += p[i] * std::log(p[i] / q[i]);
  return kl;
}

/// Combined leaderboard score. LPIPS and KLD shrink the exponential factor;
/// a perfect result (lpips=0, kld=0) doubles PSNR*SSIM.
inline double m4_score(double psnr, double ssim, double lpips, double kld) {
  return psnr * ssim * std::exp2(1.0 - lpips - kld);
}

struct MetricRecord {
  std::string scene_id;
  double gain_db = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
  double lpips = 0.0;            // meaningful only when lpips_source=="external"
  std::string lpips_source = "absent";
  double kld = 0.0;
  double m4 = 0.0;
  bool m4_clamped = false;       // true when m4 was clipped into [0, 100]
};

/// Scores one prediction against its ground truth. Both rawimages must be
/// Bayer of identical geometry and levels; both are rendered through the
/// same ISP configuration. When no external LPIPS value is supplied the
/// perceptual term contributes 0 and the record says so.
inline MetricRecord evaluate_pair(const RawImage& pred, const RawImage& gt,
                                  const std::string& scene_id, double gain_db,
                                  std::optional<double> lpips = std::nullopt,
                                  const IspConfig& isp = {}) {
  validate(pred);
  validate(gt);
  if (pred.width != gt.width || pred.height != gt.height) {
    throw Error("evaluate: prediction is " + std::to_string(pred.width) + "x" +
                std::to_string(pred.height) + ", ground truth " + std::to_string(gt.width) +
                "x" + std::to_string(gt.height));
  }
  if (pred.pattern.has_white() || gt.pattern.has_white()) {
    throw Error("evaluate: both images must be Bayer");
  }
  if (pred.bit_depth != gt.bit_depth || pred.black_level != gt.black_level ||
      pred.white_level != gt.white_level) {
    throw Error("evaluate: prediction and ground truth levels disagree");
  }

  const DisplayImage render_pred = run_isp(pred, isp);
  const DisplayImage render_gt = run_isp(gt, isp);

  MetricRecord rec;
  rec.scene_id = scene_id;
  rec.gain_db = gain_db;
  rec.psnr = psnr_display(render_gt, render_pred);
  rec.ssim = ssim_display(render_gt, render_pred);
  rec.kld = kld_bayer(gt, pred);
  if (lpips.has_value()) {
    rec.lpips = *lpips;
    rec.lpips_source = "external";
  }
  const double raw_m4 = m4_score(rec.psnr, rec.ssim, rec.lpips, rec.kld);
  rec.m4 = std::clamp(raw_m4, 0.0, 100.0);
  rec.m4_clamped = rec.m4 != raw_m4;
  return rec;
}

// ---------------------------------------------------------------------------
// External LPIPS ingest.

using LpipsTable = std::map<std::pair<std::string, double>, double>;

/// Parses an LPIPS CSV with header "scene_id,gain_db,lpips". Every defect —
/// wrong header, wrong field count, unparsable numbers, values outside
/// [0, inf), duplicate (scene_id, gain_db) keys — is reported with its
/// 1-based line number.
inline LpipsTable load_lpips_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read LPIPS CSV " + path.string());

  auto fail = [&](int line, const std::string& what) {
    throw Error("LPIPS CSV " + path.string() + ":" + std::to_string(line) + ": " + what);
  };
  auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
  };

  std::string line;
  int line_no = 0;
  LpipsTable table;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "scene_id,gain_db,lpips") {
        fail(line_no, "expected header \"scene_id,gain_db,lpips\", got \"" + line + "\"");
      }
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != 3) {
      fail(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) fail(line_no, "empty scene_id");
    double gain = 0, lpips = 0;
    try {
      std::size_t used = 0;
      gain = std::stod(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("trailing");
      lpips = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      fail(line_no, "unparsable number in \"" + line + "\"");
    }
    if (!std::isfinite(lpips) || lpips < 0) {
      fail(line_no, "lpips must be finite and non-negative");
    }
    const auto key = std::make_pair(fields[0], gain);
    if (table.count(key)) {
      fail(line_no, "duplicate entry for (" + fields[0] + ", " + format_gain(gain) + ")");
    }
    table[key] = lpips;
  }
  return table;
}

// ---------------------------------------------------------------------------
// CSV emission and aggregation.

namespace detail {

inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace detail

/// Writes the per-pair metrics CSV, sorted by (scene_id, gain_db) for
/// byte-stable output. Absent LPIPS renders as an empty field.
inline void write_metrics_csv(const std::filesystem::path& path,
                              std::vector<MetricRecord> records) {
  std::sort(records.begin(), records.end(), [](const MetricRecord& a, const MetricRecord& b) {
    return a.scene_id != b.scene_id ? a.scene_id < b.scene_id : a.gain_db < b.gain_db;
  });
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "scene_id,gain_db,psnr,ssim,lpips,lpips_source,kld,m4\n";
  for (const auto& r : records) {
    out << r.scene_id << ',' << format_gain(r.gain_db) << ',' << detail::fmt6(r.psnr) << ','
        << detail::fmt6(r.ssim) << ','
        << (r.lpips_source == "external" ? detail::fmt6(r.lpips) : std::string()) << ','
        << r.lpips_source << ',' << detail::fmt6(r.kld) << ',' << detail::fmt6(r.m4) << '\n';
  }
}

/// Mean metrics over a group of records. M4 is always the mean of per-image
/// M4 scores, never the formula applied to the other aggregates.
struct MetricAggregate {
  std::string group;  // gain label or "overall"
  int count = 0;
  double psnr = 0, ssim = 0, kld = 0, m4 = 0;
  int lpips_count = 0;
  double lpips = 0;  // mean over records with external LPIPS only
};

inline MetricAggregate aggregate_records(const std::vector<MetricRecord>& records,
                                         const std::string& group) {
  MetricAggregate agg;
  agg.group = group;
  for (const auto& r : records) {
    ++agg.count;
    agg.psnr += r.psnr;
    agg.ssim += r.ssim;
    agg.kld += r.kld;
    agg.m4 += r.m4;
    if (r.lpips_source == "external") {
      ++agg.lpips_count;
      agg.lpips += r.lpips;
    }
  }
  if (agg.count > 0) {
    agg.psnr /= agg.count;
    agg.ssim /= agg.count;
    agg.kld /= agg.count;
    agg.m4 /= agg.count;
  }
  if (agg.lpips_count > 0) agg.lpips /= agg.lpips_count;
  return agg;
}

/// Per-gain aggregates (ascending gain) followed by the overall row.
inline std::vector<MetricAggregate> aggregate_by_gain(
    const std::vector<MetricRecord>& records) {
  std::map<double, std::vector<MetricRecord>> by_gain;
  for (const auto& r : records) by_gain[r.gain_db].push_back(r);
  std::vector<MetricAggregate> rows;
  for (const auto& [gain, group] : by_gain) {
    rows.push_back(aggregate_records(group, format_gain(gain) + "db"));
  }
  rows.push_back(aggregate_records(records, "overall"));
  return rows;
}

}  // namespace rgbwkit
