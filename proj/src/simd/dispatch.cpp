// Copyright 2026 The divclust Authors
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

#include <atomic>
#include <cstdlib>
#include <string>

#include "divclust/error.hpp"
#include "divclust/simd.hpp"

namespace divclust::simd {

#ifndef DIVCLUST_HAVE_AVX2
namespace detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace detail
#endif

namespace {

bool cpu_has_avx2() {
#if defined(DIVCLUST_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Level detect() {
  const Level best = cpu_has_avx2() ? Level::kAvx2 : Level::kScalar;
  if (const char* env = std::getenv("DIVCLUST_SIMD")) {
    const std::string requested(env);
    if (requested == "scalar") return Level::kScalar;
    if (requested == "avx2" && best == Level::kAvx2) return Level::kAvx2;
  }
  return best;
}

std::atomic<Level>& level_slot() {
  static std::atomic<Level> slot{detect()};
  return slot;
}

}  // namespace

bool supported(Level level) {
  switch (level) {
    case Level::kScalar:
      return true;
    case Level::kAvx2:
      return detail::avx2_table() != nullptr && cpu_has_avx2();
  }
  return false;
}

const KernelTable& table(Level level) {
  if (level == Level::kAvx2) {
    require(supported(level), ErrorCode::kConfig, "AVX2 kernels unavailable on this CPU/build");
    return *detail::avx2_table();
  }
  return detail::scalar_table();
}

Level active_level() { return level_slot().load(std::memory_order_relaxed); }

void set_active_level(Level level) {
  require(supported(level), ErrorCode::kConfig,
          std::string("SIMD level not supported: ") + std::string(name(level)));
  level_slot().store(level, std::memory_order_relaxed);
}

const KernelTable& active() {
  return active_level() == Level::kAvx2 ? *detail::avx2_table() : detail::scalar_table();
}

std::string_view name(Level level) {
  return level == Level::kAvx2 ? "avx2" : "scalar";
}

}  // namespace divclust::simd
