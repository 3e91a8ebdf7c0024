// Copyright 2026 The encctl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

namespace encctl::runtime {

// Field order is part of the message layout; append only.

/// Sensor -> controller: Enc(y_bar(t)), componentwise.
template <class Ct>
struct SensorMessage {
  std::uint64_t t = 0;
  std::vector<Ct> y;
};

/// Controller -> actuator: the evaluated (non-fresh) output.
template <class Ct>
struct ControlMessage {
  std::uint64_t t = 0;
  Ct u;
};

/// Actuator -> controller: Enc(u_bar(t)) after requantization.
template <class Ct>
struct FeedbackMessage {
  std::uint64_t t = 0;
  Ct u;
};

}  // namespace encctl::runtime
