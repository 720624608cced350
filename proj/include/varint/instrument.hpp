// varint: linear-time variational integration for kinematic trees
// SPDX-License-Identifier: MIT

#ifndef VARINT_INSTRUMENT_HPP
#define VARINT_INSTRUMENT_HPP

#include <cstdint>

namespace varint::instrument {

// Per-body work counter used by the complexity tests. Counts body visits in
// the recursive kernels, not flops, so the numbers are platform independent.
inline thread_local std::uint64_t body_ops = 0;

inline void count(std::uint64_t n = 1) { body_ops += n; }

inline std::uint64_t take() {
  const std::uint64_t n = body_ops;
  body_ops = 0;
  return n;
}

}  // namespace varint::instrument

#endif
