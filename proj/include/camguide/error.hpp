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
#ifndef CAMGUIDE_ERROR_HPP_
#define CAMGUIDE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace camguide {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorCode {
  kInternal = 1,
  kUsage = 2,
  kIo = 3,
  kConfig = 4,
  kNumeric = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline void check(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) throw Error(code, msg);
}

}  // namespace camguide

#endif  // CAMGUIDE_ERROR_HPP_
