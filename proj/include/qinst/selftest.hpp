#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qinst/serialize.hpp"

namespace qinst {

struct SelftestOptions {
  std::uint64_t seed = 42;
  int trials = 100;
  std::vector<Index> dims = {2, 3};
  Tolerances tol;
};

/// One property checked over all trials. Upper-bound properties pass when
/// the worst value stays below `bound`; lower-bound ones when it stays above.
struct PropertyResult {
  std::string module;
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool upper = true;
  bool pass() const { return upper ? value < bound : value > bound; }
};

struct SelftestReport {
  SelftestOptions options;
  std::vector<PropertyResult> properties;
  bool pass() const;
};

/// Runs every module's invariants over seeded random inputs. Each property
/// draws from its own generator seeded from (seed, property index), so the
/// report depends only on the options.
SelftestReport run_selftest(const SelftestOptions& options);

Json selftest_to_json(const SelftestReport& r);
std::string selftest_to_text(const SelftestReport& r);

}  // namespace qinst
