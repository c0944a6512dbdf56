// Copyright 2026 smc-ebm authors
// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random streams (Philox4x64-10). Every consumer owns a stream
// keyed by (seed, purpose, id0, id1), so draws depend only on those values and
// never on thread scheduling or evaluation order.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace smcebm {

// One Philox4x64-10 block: 4 output words from a 256-bit counter and 128-bit key.
// Verified against an independent implementation (numpy.random.Philox).
inline std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                               std::array<std::uint64_t, 2> key) {
  constexpr std::uint64_t M0 = 0xD2E7470EE14C6C93ULL;
  constexpr std::uint64_t M1 = 0xCA5A826395121157ULL;
  constexpr std::uint64_t W0 = 0x9E3779B97F4A7C15ULL;
  constexpr std::uint64_t W1 = 0xBB67AE8584CAA73BULL;
  for (int round = 0; round < 10; ++round) {
    const unsigned __int128 p0 = static_cast<unsigned __int128>(M0) * ctr[0];
    const unsigned __int128 p1 = static_cast<unsigned __int128>(M1) * ctr[2];
    const std::uint64_t hi0 = static_cast<std::uint64_t>(p0 >> 64);
    const std::uint64_t lo0 = static_cast<std::uint64_t>(p0);
    const std::uint64_t hi1 = static_cast<std::uint64_t>(p1 >> 64);
    const std::uint64_t lo1 = static_cast<std::uint64_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

// Disjoint sub-stream labels. Adding a new purpose never perturbs existing ones.
enum class Stream : std::uint64_t {
  data = 1,          // dataset generation, one sub-stream per point
  theta_init = 2,    // model parameter initialization
  walker_init = 3,   // initial walker positions
  walker_noise = 4,  // ULA noise, sub-stream per (walker, iteration)
  resample = 5,      // resampling draws, sub-stream per iteration
  batch_select = 6,  // walker mini-batch selection, per iteration
  cd_restart = 7,    // CD restart draws, per (walker, iteration)
  dyn1d = 8,         // 1-d reduced-dynamics noise
  generic = 9,
};

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Stream stream, std::uint64_t id0 = 0,
             std::uint64_t id1 = 0)
      : key_{seed, static_cast<std::uint64_t>(stream)}, base_{id0, id1, 0, 0} {}

  std::uint64_t next_u64() {
    if (pos_ == 4) {
      buf_ = philox4x64(base_, key_);
      ++base_[2];  // block counter
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  // Uniform on (0,1]: zero is excluded so logs and inverse-CDF lookups are safe.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. std::normal_distribution is
  // implementation-defined, which would break byte-reproducibility.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

 private:
  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> base_;
  std::array<std::uint64_t, 4> buf_{};
  int pos_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace smcebm
