#pragma once

#include <cstdint>
#include <stdexcept>

#include "cevas/common.hpp"

namespace cevas {

// Analytic cost model. Latencies are computed, never measured, so every
// experiment is deterministic and machine-independent.

struct LinkModel {
  double rate_mbps = 100.0;    // megabits per second
  double fixed_overhead = 0.0;  // seconds per frame (propagation + protocol)
};

struct LatencyBreakdown {
  double filter_time = 0.0;
  double tx_time = 0.0;
  double inference_time = 0.0;
  double total = 0.0;
};

inline double tx_latency(std::uint64_t bytes, const LinkModel& link) {
  if (link.rate_mbps <= 0.0)
    throw std::invalid_argument("tx_latency: rate must be positive");
  return link.fixed_overhead +
         (8.0 * static_cast<double>(bytes)) / (link.rate_mbps * 1e6);
}

inline double filter_latency(double cost_units, double seconds_per_unit) {
  return cost_units * seconds_per_unit;
}

inline LatencyBreakdown response_latency(double filter_time, double tx_time,
                                         double inference_time) {
  LatencyBreakdown b;
  b.filter_time = filter_time;
  b.tx_time = tx_time;
  b.inference_time = inference_time;
  b.total = filter_time + tx_time + inference_time;
  return b;
}

inline double data_size_ratio(std::uint64_t offloaded, std::uint64_t full) {
  if (full == 0) throw std::invalid_argument("data_size_ratio: full size is 0");
  return clamp01(static_cast<double>(offloaded) / static_cast<double>(full));
}

}  // namespace cevas
