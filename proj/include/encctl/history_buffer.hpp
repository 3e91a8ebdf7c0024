// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "encctl/error.hpp"

namespace encctl {

/// Fixed-depth history indexed by lag: at(1) is the newest entry, at(depth())
/// the oldest. push() evicts the oldest.
template <class T>
class HistoryBuffer {
 public:
  HistoryBuffer() = default;

  /// init[i] holds lag i + 1.
  explicit HistoryBuffer(std::vector<T> init) : data_(std::move(init)) {
    if (data_.empty()) fail(ErrorCode::InvalidArgument, "history depth must be >= 1");
  }

  std::size_t depth() const { return data_.size(); }

  const T& at(int lag) const {
    if (lag < 1 || static_cast<std::size_t>(lag) > data_.size())
      fail(ErrorCode::InvalidArgument, "lag " + std::to_string(lag) + " outside 1.." + std::to_string(data_.size()));
    return data_[(head_ + static_cast<std::size_t>(lag) - 1) % data_.size()];
  }

  void push(T v) {
    head_ = (head_ + data_.size() - 1) % data_.size();
    data_[head_] = std::move(v);
  }

  /// Entries ordered by lag 1..depth.
  std::vector<T> by_lag() const {
    std::vector<T> out;
    out.reserve(data_.size());
    for (std::size_t i = 1; i <= data_.size(); ++i) out.push_back(at(static_cast<int>(i)));
    return out;
  }

 private:
  std::vector<T> data_;
  std::size_t head_ = 0;
};

}  // namespace encctl
