/* Copyright 2026 The CamGuide Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "camguide/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "camguide/error.hpp"

namespace camguide::kern {
namespace {

const Kernels* g_forced = nullptr;

const Kernels* resolve_by_name(const char* name) {
  if (std::strcmp(name, "scalar") == 0) return &scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
  if (std::strcmp(name, "avx2") == 0) {
    check(avx2_available(), ErrorCode::kConfig, "avx2 kernels requested but the CPU lacks AVX2");
    return &avx2_kernels();
  }
#endif
  throw Error(ErrorCode::kConfig, std::string("unknown kernel backend: ") + name);
}

const Kernels* resolve_auto() {
  if (const char* env = std::getenv("CAMGUIDE_KERNELS"); env && *env) {
    return resolve_by_name(env);
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (avx2_available()) return &avx2_kernels();
#endif
  return &scalar_kernels();
}

}  // namespace

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const Kernels& active() {
  static const Kernels* auto_choice = resolve_auto();
  return g_forced ? *g_forced : *auto_choice;
}

void force_backend(const char* name) {
  g_forced = name ? resolve_by_name(name) : nullptr;
}

}  // namespace camguide::kern
