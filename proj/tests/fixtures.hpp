#pragma once

// Synthetic two-venue trading day: venue 1 ticks on a Bernoulli(1/2)
// microsecond lattice from 10:00, venue 2 repeats half of those prices
// `delay_us` later. Log prices.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "leadlag/ingest.hpp"

namespace fixture {

inline leadlag::DayPair venue_day(std::uint64_t seed, const std::string& date, long delay_us,
                                  long length_us = 1L << 21) {
  std::mt19937_64 g(seed);
  std::bernoulli_distribution keep(0.5), thin(0.5);
  std::normal_distribution<double> z(0.0, 1e-4);
  std::vector<double> t1, p1, t2, p2;
  double x = std::log(100.0);
  const long start = 36000L * 1000000L;
  for (long k = 0; k < length_us; ++k) {
    if (!keep(g)) continue;
    x += z(g);
    t1.push_back(static_cast<double>(start + k) * 1e-6);
    p1.push_back(x);
    if (thin(g) && k + delay_us < length_us) {
      t2.push_back(static_cast<double>(start + k + delay_us) * 1e-6);
      p2.push_back(x);
    }
  }
  const double end = static_cast<double>(start + length_us) * 1e-6;
  return {date, leadlag::TickSeries(t1, p1, 1e-6, end), leadlag::TickSeries(t2, p2, 1e-6, end)};
}

}  // namespace fixture
