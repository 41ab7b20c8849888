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
#ifndef CAMGUIDE_PARAMS_HPP_
#define CAMGUIDE_PARAMS_HPP_

#include <iosfwd>
#include <map>
#include <string>

#include "camguide/array.hpp"

namespace camguide {

// Named map from layer identifier to Array. Ordered so that iteration (and
// therefore serialization and SGD updates) is deterministic.
class ParamVector {
 public:
  using Map = std::map<std::string, Array>;

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  Array& operator[](const std::string& name) { return entries_[name]; }
  const Array& at(const std::string& name) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  Map::iterator begin() { return entries_.begin(); }
  Map::iterator end() { return entries_.end(); }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

  // Copies every entry of `other` into this map (names must be fresh).
  void merge(const ParamVector& other);

  // Two ParamVectors are combinable iff name sets and shapes match.
  bool same_structure(const ParamVector& o) const;
  void require_same_structure(const ParamVector& o, const std::string& who) const;

  // this += s * other, elementwise per entry.
  void add_scaled(const ParamVector& other, double s);
  // this = a * other + b * this
  void axpby(double a, const ParamVector& other, double b);

  double max_abs_diff(const ParamVector& o) const;
  bool all_finite() const;

 private:
  Map entries_;
};

// Flat binary container for named f64 arrays, little-endian, with shape
// headers. Used for model checkpoints. Entries are written in name order,
// so identical contents produce identical bytes.
void write_container(std::ostream& os, const std::map<std::string, Array>& entries);
std::map<std::string, Array> read_container(std::istream& is);

void save_container(const std::string& path, const std::map<std::string, Array>& entries);
std::map<std::string, Array> load_container(const std::string& path);

std::map<std::string, Array> to_entries(const ParamVector& p, const std::string& prefix);
ParamVector from_entries(const std::map<std::string, Array>& entries, const std::string& prefix);

}  // namespace camguide

#endif  // CAMGUIDE_PARAMS_HPP_
