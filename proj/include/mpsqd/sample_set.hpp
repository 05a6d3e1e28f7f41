#pragma once

// Measured bitstring histogram. Keys are printed bitstrings with the
// most-significant logical bit leftmost; values are shot counts.

#include <map>
#include <string>

namespace mpsqd {

struct SampleSet {
  std::string label;
  long long shots = 0;  // shots requested; counts sum to this
  std::map<std::string, long long> counts;

  friend bool operator==(const SampleSet&, const SampleSet&) = default;
};

inline long long total_counts(const SampleSet& s) {
  long long total = 0;
  for (const auto& [key, n] : s.counts) total += n;
  return total;
}

}  // namespace mpsqd
