// Copyright 2026 The smcebm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <string>

namespace smcebm {

// Shortest round-trippable decimal form of a double. Used for every numeric
// field we persist, so that re-parsing a written file reproduces the exact
// bits and output is identical across platforms and thread counts.
inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace smcebm
