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

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qcse {

// Class index doubles as the network output index.
enum class Label : std::uint8_t { normal = 0, whisper = 1 };

inline constexpr std::size_t kNumClasses = 2;

inline std::string_view to_string(Label label) {
  return label == Label::normal ? "normal" : "whisper";
}

inline Label parse_label(std::string_view s) {
  if (s == "normal") return Label::normal;
  if (s == "whisper") return Label::whisper;
  throw std::invalid_argument("unknown label '" + std::string(s) + "'");
}

inline std::size_t class_index(Label label) { return static_cast<std::size_t>(label); }

}  // namespace qcse
