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

#include "wavetrain/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

#include "wavetrain/error.hpp"

namespace wavetrain {

namespace {
int g_default_threads = omp_get_max_threads();
}

void set_thread_count(int threads) {
  omp_set_dynamic(0);
  omp_set_num_threads(threads > 0 ? threads : g_default_threads);
}

void configure_threads_from_env() {
  const char* raw = std::getenv("WAVETRAIN_THREADS");
  int threads = 0;
  if (raw != nullptr && *raw != '\0') {
    try {
      threads = std::stoi(raw);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, std::string("WAVETRAIN_THREADS is not an integer: ") + raw);
    }
    if (threads < 0) throw Error(ErrorCode::InvalidArgument, "WAVETRAIN_THREADS must be >= 0");
  }
  set_thread_count(threads);
}

int max_threads() noexcept { return omp_get_max_threads(); }

}  // namespace wavetrain
