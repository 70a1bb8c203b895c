#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "moran/errors.hpp"
#include "moran/kernel.hpp"
#include "moran/simplex_lattice.hpp"

namespace moran {

/// The generator behind every trajectory; its name goes into dump metadata.
using TrajectoryEngine = std::mt19937_64;
inline constexpr const char* trajectory_engine_name = "mt19937_64";

struct TrajectoryConfig {
  StateIndex start;
  std::size_t length = 1;
  std::uint64_t seed = 0;
};

namespace detail {

// 53 random bits mapped to [0, 1); unlike uniform_real_distribution this is
// the same on every standard library.
inline double unit_interval(TrajectoryEngine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Walks the kernel from config.start, drawing each step by inverse CDF over
/// the row's stored entries. The output has exactly config.length states.
inline std::vector<StateIndex> sample_trajectory(const TransitionKernel& k, const TrajectoryConfig& config) {
  if (config.length < 1) throw error(errc::parameter, "trajectory length must be at least 1");
  if (config.start.value >= k.size()) {
    throw error(errc::index_out_of_range, "start state " + std::to_string(config.start.value) +
                                              " outside the kernel");
  }
  TrajectoryEngine engine(config.seed);
  std::vector<StateIndex> out;
  out.reserve(config.length);
  std::size_t state = config.start.value;
  out.push_back(StateIndex{state});
  while (out.size() < config.length) {
    const auto row = k.row(state);
    const double u = detail::unit_interval(engine);
    double cumulative = 0.0;
    std::size_t next = row.back().col;
    for (const KernelEntry& e : row) {
      cumulative += e.prob;
      if (u < cumulative) {
        next = e.col;
        break;
      }
    }
    state = next;
    out.push_back(StateIndex{state});
  }
  return out;
}

/// One rank per line after a "# seed=... length=... start=... engine=..." header.
inline void write_trajectory(std::ostream& os, const TrajectoryConfig& config,
                             const std::vector<StateIndex>& trajectory) {
  os << "# seed=" << config.seed << " length=" << config.length << " start=" << config.start.value
     << " engine=" << trajectory_engine_name << '\n';
  for (StateIndex s : trajectory) os << s.value << '\n';
}

/// Reads ranks one per line; blank lines and lines starting with '#' are skipped.
inline std::vector<StateIndex> read_trajectory(std::istream& is) {
  std::vector<StateIndex> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(line, &pos);
    } catch (const std::exception&) {
      throw error(errc::schema, "line " + std::to_string(line_no) + ": expected a state rank");
    }
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\r' || line[pos] == '\t')) ++pos;
    if (pos != line.size() || line[0] == '-') {
      throw error(errc::schema, "line " + std::to_string(line_no) + ": expected a state rank");
    }
    out.push_back(StateIndex{static_cast<std::size_t>(v)});
  }
  return out;
}

}  // namespace moran
