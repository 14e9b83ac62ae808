// Copyright 2026 The fforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "error.hpp"

namespace fforge::nn {

template <typename T>
struct Param {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<T> value;
  bool trainable = true;
};

// Named tensors in insertion order. Running batch-norm statistics are stored here too,
// flagged non-trainable.
template <typename T>
class ParamStore {
 public:
  Param<T>& add(const std::string& name, std::vector<std::size_t> shape, bool trainable, T fill) {
    if (index_.count(name)) throw ValidationError("duplicate parameter " + name);
    std::size_t count = 1;
    for (auto d : shape) count *= d;
    index_[name] = params_.size();
    params_.push_back({name, std::move(shape), std::vector<T>(count, fill), trainable});
    return params_.back();
  }

  std::vector<T>& operator[](const std::string& name) { return find(name).value; }
  const std::vector<T>& operator[](const std::string& name) const { return find(name).value; }

  Param<T>& find(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("unknown parameter " + name);
    return params_[it->second];
  }
  const Param<T>& find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ValidationError("unknown parameter " + name);
    return params_[it->second];
  }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::vector<Param<T>>& all() { return params_; }
  const std::vector<Param<T>>& all() const { return params_; }
  std::size_t size() const { return params_.size(); }

  // Same names/shapes, all values zero.
  ParamStore zeros_like() const {
    ParamStore z;
    for (const auto& p : params_) z.add(p.name, p.shape, p.trainable, T(0));
    return z;
  }

  void fill_zero() {
    for (auto& p : params_) std::fill(p.value.begin(), p.value.end(), T(0));
  }

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const auto& p : params_) {
      auto& q = out.add(p.name, p.shape, p.trainable, U(0));
      for (std::size_t i = 0; i < p.value.size(); ++i) q.value[i] = static_cast<U>(p.value[i]);
    }
    return out;
  }

  bool operator==(const ParamStore& o) const {
    if (params_.size() != o.params_.size()) return false;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto& a = params_[i];
      const auto& b = o.params_[i];
      if (a.name != b.name || a.shape != b.shape || a.value != b.value) return false;
    }
    return true;
  }

 private:
  std::vector<Param<T>> params_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace fforge::nn
