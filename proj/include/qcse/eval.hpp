// Copyright 2026 The QCSE Toolkit Authors
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

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcse/features.hpp"
#include "qcse/label.hpp"

namespace qcse {

// One-vs-rest counts for each class, indexed by class_index().
struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
};

struct ConfusionCounts {
  std::array<ClassCounts, kNumClasses> per_class{};

  std::size_t total() const;
  std::size_t correct() const;
  const ClassCounts& operator[](Label l) const { return per_class[class_index(l)]; }
};

ConfusionCounts confusion(std::span<const Label> predictions, std::span<const Label> truths);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when a ratio had a zero denominator and was reported as 0.
  bool degenerate = false;
};

struct MetricsReport {
  std::array<ClassMetrics, kNumClasses> per_class{};
  double accuracy = 0.0;

  FeatureKind feature = FeatureKind::qcse;
  double radius = 1.0;
  std::optional<double> snr_db;  // empty = clean
  std::string dataset;
  std::string note;  // free text, e.g. "checkpoint 1" or "best-of-two"
};

MetricsReport metrics(const ConfusionCounts& c);

// Fixed-width table: feature, SNR, per-class Pre/Re/F1, Acc (4 decimals),
// then the note column.
std::string render_report(std::span<const MetricsReport> reports);

// feature,radius,snr_db,class,precision,recall,f1,accuracy with one row per
// (report, class); snr_db is empty for clean speech.
std::string render_csv(std::span<const MetricsReport> reports);

}  // namespace qcse
