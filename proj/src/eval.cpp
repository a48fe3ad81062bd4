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

#include "qcse/eval.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace qcse {

namespace {

double ratio(std::size_t num, std::size_t den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string shortest(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string snr_label(const MetricsReport& r) {
  return r.snr_db ? fixed(*r.snr_db, 0) : std::string("clean");
}

}  // namespace

std::size_t ConfusionCounts::total() const {
  const ClassCounts& c = per_class[0];
  return c.tp + c.fp + c.fn + c.tn;
}

std::size_t ConfusionCounts::correct() const {
  // Every correct decision is a true positive for exactly one class.
  std::size_t n = 0;
  for (const ClassCounts& c : per_class) n += c.tp;
  return n;
}

ConfusionCounts confusion(std::span<const Label> predictions, std::span<const Label> truths) {
  if (predictions.size() != truths.size()) {
    throw std::invalid_argument("confusion: " + std::to_string(predictions.size()) +
                                " predictions for " + std::to_string(truths.size()) + " truths");
  }
  if (predictions.empty()) throw std::invalid_argument("confusion: no utterances");
  ConfusionCounts out;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const bool pred = class_index(predictions[i]) == c;
      const bool truth = class_index(truths[i]) == c;
      ClassCounts& cc = out.per_class[c];
      if (pred && truth) ++cc.tp;
      else if (pred) ++cc.fp;
      else if (truth) ++cc.fn;
      else ++cc.tn;
    }
  }
  return out;
}

MetricsReport metrics(const ConfusionCounts& c) {
  MetricsReport r;
  for (std::size_t k = 0; k < kNumClasses; ++k) {
    const ClassCounts& cc = c.per_class[k];
    ClassMetrics& m = r.per_class[k];
    m.precision = ratio(cc.tp, cc.tp + cc.fp, m.degenerate);
    m.recall = ratio(cc.tp, cc.tp + cc.fn, m.degenerate);
    const double denom = m.precision + m.recall;
    if (denom > 0.0) {
      m.f1 = 2.0 * m.precision * m.recall / denom;
    } else {
      m.f1 = 0.0;
      m.degenerate = true;
    }
  }
  bool unused = false;
  r.accuracy = ratio(c.correct(), c.total(), unused);
  return r;
}

std::string render_report(std::span<const MetricsReport> reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %6s %8s | %-24s | %-24s | %7s  %s\n", "", "", "", "Normal",
                "Whisper", "", "");
  out << line;
  std::snprintf(line, sizeof line, "%-8s %6s %8s | %7s %7s %7s  | %7s %7s %7s  | %7s  %s\n",
                "Feature", "SNR", "radius", "Pre", "Re", "F1", "Pre", "Re", "F1", "Acc", "Note");
  out << line;
  for (const MetricsReport& r : reports) {
    const ClassMetrics& n = r.per_class[0];
    const ClassMetrics& w = r.per_class[1];
    std::snprintf(line, sizeof line,
                  "%-8s %6s %8.4f | %7.4f %7.4f %7.4f  | %7.4f %7.4f %7.4f  | %7.4f  %s\n",
                  std::string(to_string(r.feature)).c_str(), snr_label(r).c_str(), r.radius,
                  n.precision, n.recall, n.f1, w.precision, w.recall, w.f1, r.accuracy,
                  r.note.c_str());
    out << line;
  }
  return out.str();
}

std::string render_csv(std::span<const MetricsReport> reports) {
  std::ostringstream out;
  out << "feature,radius,snr_db,class,precision,recall,f1,accuracy\n";
  for (const MetricsReport& r : reports) {
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      const ClassMetrics& m = r.per_class[k];
      out << to_string(r.feature) << ',' << shortest(r.radius) << ','
          << (r.snr_db ? shortest(*r.snr_db) : std::string()) << ','
          << to_string(static_cast<Label>(k)) << ',' << fixed(m.precision, 6) << ','
          << fixed(m.recall, 6) << ',' << fixed(m.f1, 6) << ',' << fixed(r.accuracy, 6) << '\n';
    }
  }
  return out.str();
}

}  // namespace qcse
