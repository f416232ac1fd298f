// Copyright 2026 The wavetrain Authors
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
#include <optional>
#include <string>

namespace wavetrain {

/// One evaluation row. A missing domain_id means the row pools every domain
/// it was computed over; it serializes as "pooled".
struct MetricsRecord {
  std::size_t iteration = 0;
  std::string split;
  std::optional<int> domain_id;
  double loss = 0.0;
  double accuracy = 0.0;

  bool operator==(const MetricsRecord&) const = default;
};

}  // namespace wavetrain
