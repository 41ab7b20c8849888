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
#include "camguide/params.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "camguide/error.hpp"
#include "camguide/io_util.hpp"
#include "camguide/kernels.hpp"

namespace camguide {

const Array& ParamVector::at(const std::string& name) const {
  auto it = entries_.find(name);
  check(it != entries_.end(), ErrorCode::kInternal, "no parameter named '" + name + "'");
  return it->second;
}

void ParamVector::merge(const ParamVector& other) {
  for (const auto& [name, arr] : other) {
    check(!contains(name), ErrorCode::kInternal, "merge: duplicate parameter '" + name + "'");
    entries_[name] = arr;
  }
}

bool ParamVector::same_structure(const ParamVector& o) const {
  if (entries_.size() != o.entries_.size()) return false;
  auto a = entries_.begin();
  auto b = o.entries_.begin();
  for (; a != entries_.end(); ++a, ++b) {
    if (a->first != b->first || !a->second.same_shape(b->second)) return false;
  }
  return true;
}

void ParamVector::require_same_structure(const ParamVector& o, const std::string& who) const {
  if (entries_.size() != o.entries_.size()) {
    throw Error(ErrorCode::kInternal, who + ": parameter count mismatch");
  }
  auto a = entries_.begin();
  auto b = o.entries_.begin();
  for (; a != entries_.end(); ++a, ++b) {
    check(a->first == b->first, ErrorCode::kInternal,
          who + ": parameter name mismatch '" + a->first + "' vs '" + b->first + "'");
    check(a->second.same_shape(b->second), ErrorCode::kInternal,
          who + ": shape mismatch for parameter '" + a->first + "'");
  }
}

void ParamVector::add_scaled(const ParamVector& other, double s) {
  require_same_structure(other, "add_scaled");
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  for (; a != entries_.end(); ++a, ++b) {
    kern::active().axpby(s, b->second.data(), 1.0, a->second.data(), a->second.size());
  }
}

void ParamVector::axpby(double a, const ParamVector& other, double b) {
  require_same_structure(other, "axpby");
  auto dst = entries_.begin();
  auto src = other.entries_.begin();
  for (; dst != entries_.end(); ++dst, ++src) {
    kern::active().axpby(a, src->second.data(), b, dst->second.data(), dst->second.size());
  }
}

double ParamVector::max_abs_diff(const ParamVector& o) const {
  require_same_structure(o, "max_abs_diff");
  double m = 0.0;
  auto a = entries_.begin();
  auto b = o.entries_.begin();
  for (; a != entries_.end(); ++a, ++b) {
    for (std::size_t i = 0; i < a->second.size(); ++i) {
      m = std::max(m, std::fabs(a->second[i] - b->second[i]));
    }
  }
  return m;
}

bool ParamVector::all_finite() const {
  for (const auto& [name, arr] : entries_) {
    if (!arr.all_finite()) return false;
  }
  return true;
}

namespace {
constexpr char kMagic[4] = {'N', 'A', 'C', '1'};
}

void write_container(std::ostream& os, const std::map<std::string, Array>& entries) {
  os.write(kMagic, 4);
  io::write_u32(os, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, arr] : entries) {
    io::write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    io::write_u32(os, static_cast<std::uint32_t>(arr.rank()));
    for (std::size_t d : arr.shape()) io::write_u32(os, static_cast<std::uint32_t>(d));
    for (std::size_t i = 0; i < arr.size(); ++i) io::write_f64(os, arr[i]);
  }
  check(os.good(), ErrorCode::kIo, "container write failed");
}

std::map<std::string, Array> read_container(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  check(is.good() && std::memcmp(magic, kMagic, 4) == 0, ErrorCode::kIo,
        "not a named-array container (bad magic)");
  std::uint32_t count = io::read_u32(is);
  std::map<std::string, Array> entries;
  for (std::uint32_t e = 0; e < count; ++e) {
    std::uint32_t name_len = io::read_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    std::uint32_t rank = io::read_u32(is);
    std::vector<std::size_t> shape(rank);
    std::size_t total = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      shape[i] = io::read_u32(is);
      total *= shape[i];
    }
    std::vector<double> data(total);
    for (std::size_t i = 0; i < total; ++i) data[i] = io::read_f64(is);
    check(is.good(), ErrorCode::kIo, "container truncated while reading '" + name + "'");
    entries.emplace(std::move(name), Array(std::move(shape), std::move(data)));
  }
  return entries;
}

void save_container(const std::string& path, const std::map<std::string, Array>& entries) {
  std::ofstream os(path, std::ios::binary);
  check(os.is_open(), ErrorCode::kIo, "cannot open '" + path + "' for writing");
  write_container(os, entries);
}

std::map<std::string, Array> load_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  check(is.is_open(), ErrorCode::kIo, "cannot open '" + path + "'");
  return read_container(is);
}

std::map<std::string, Array> to_entries(const ParamVector& p, const std::string& prefix) {
  std::map<std::string, Array> out;
  for (const auto& [name, arr] : p) out.emplace(prefix + name, arr);
  return out;
}

ParamVector from_entries(const std::map<std::string, Array>& entries, const std::string& prefix) {
  ParamVector p;
  for (const auto& [name, arr] : entries) {
    if (name.rfind(prefix, 0) == 0) p[name.substr(prefix.size())] = arr;
  }
  return p;
}

}  // namespace camguide
