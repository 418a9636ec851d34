#pragma once

#include <cassert>
#include <cstdint>

namespace ridepool {

using Vertex = int32_t;
using Time = int64_t;  // deciseconds
using Dist = int64_t;  // travel time, deciseconds
using Cost = int64_t;

constexpr Vertex kInvalidVertex = -1;
constexpr int32_t kInvalidId = -1;

// Sentinel ordered above every finite cost/distance/time. Saturating arithmetic
// below keeps sums of finite values from ever reaching it.
constexpr int64_t kInf = int64_t{1} << 60;

inline bool isInf(int64_t x) { return x >= kInf; }

inline int64_t addSat(int64_t a, int64_t b) {
    if (a >= kInf || b >= kInf) return kInf;
    const int64_t s = a + b;
    return s >= kInf ? kInf : s;
}

inline int64_t addSat(int64_t a, int64_t b, int64_t c) { return addSat(addSat(a, b), c); }

inline int64_t mulSat(int64_t a, int64_t b) {
    assert(a >= 0 && b >= 0);
    if (a >= kInf || b >= kInf) return kInf;
    if (a != 0 && b > kInf / a) return kInf;
    return a * b;
}

inline int64_t maxZero(int64_t x) { return x > 0 ? x : 0; }

}  // namespace ridepool
