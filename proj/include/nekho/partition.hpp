// SPDX-License-Identifier: Apache-2.0
//
// Equivalence classes A^(s)_{M,j}, resonant blocks B and extended blocks E,
// with the invariance / dyadic checks run against them.

#pragma once

#include "nekho/resonance.hpp"

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace nekho {

inline constexpr std::size_t kNoModule = std::numeric_limits<std::size_t>::max();

struct EquivalenceClass {
  std::size_t module = kNoModule;  // index into ResonanceAnalysis::modules()
  std::size_t j = 0;
  std::vector<std::size_t> members;  // sorted ids
};

/// Union-find over the pre-equivalence a ~' b iff a - b ∈ M and
/// |a - b| <= max(|a|^mu, |b|^mu). Class index j follows the smallest member.
std::vector<EquivalenceClass> equivalence_classes(const Lattice& lat,
                                                  const std::vector<std::size_t>& zone,
                                                  const ResonanceModule& M, double mu);

/// Union-find with path halving.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n);
  std::size_t find(std::size_t x);
  void unite(std::size_t a, std::size_t b);

 private:
  std::vector<std::size_t> parent_, size_;
};

struct Block {
  int s = 0;
  std::size_t module = kNoModule;
  std::size_t j = 0;
  char kind = 'E';  // 'B' or 'E'
  std::vector<std::size_t> members;
  double min_norm = 0.0, max_norm = 0.0, diameter = 0.0;
  double ratio() const { return min_norm > 0.0 ? max_norm / min_norm : 1.0; }
};

struct DyadicReport {
  bool ok = true;
  double max_ratio = 1.0;
  std::size_t violations = 0;
  /// Empirical max over blocks of diameter / |a_min|^{1 - gamma_{s+1}}, per s (index s).
  std::vector<double> diameter_constant;
};

struct InvarianceViolation {
  std::size_t a = 0, b = 0;
  IVec k;
};

struct InvarianceReport {
  std::size_t pairs_checked = 0;
  std::vector<InvarianceViolation> violations;
  bool ok() const { return violations.empty(); }
};

struct PartitionStats {
  std::size_t interior_points = 0;
  std::size_t uncovered = 0;   // interior-safe points with no E label
  std::size_t conflicts = 0;   // interior-safe points with >= 2 E labels
  std::size_t zone_d_points = 0;
  std::vector<std::size_t> blocks_by_s;
  bool exact_partition() const { return uncovered == 0 && conflicts == 0; }
};

/// B and E layers built on top of a ResonanceAnalysis (which must outlive it).
class BlockPartition {
 public:
  explicit BlockPartition(const ResonanceAnalysis& an);

  const ResonanceAnalysis& analysis() const { return an_; }
  const Lattice& lattice() const { return an_.lattice(); }

  /// A^(s)_{M,j} for every witnessed module (s >= 1).
  const std::vector<EquivalenceClass>& classes() const { return classes_; }
  const std::vector<Block>& b_blocks() const { return b_blocks_; }
  const std::vector<Block>& e_blocks() const { return e_blocks_; }
  /// Indices into e_blocks() carrying the point.
  const std::vector<std::size_t>& e_labels(std::size_t id) const { return e_labels_[id]; }
  const std::vector<std::size_t>& b_labels(std::size_t id) const { return b_labels_[id]; }

  PartitionStats stats() const;
  std::string block_name(const Block& b) const;

 private:
  const ResonanceAnalysis& an_;
  std::vector<EquivalenceClass> classes_;
  std::vector<int> class_rank_;
  std::vector<Block> b_blocks_, e_blocks_;
  std::vector<std::vector<std::size_t>> b_labels_, e_labels_;
};

/// [a resonant with b-a] or [b resonant with b-a], order-1 predicate.
bool coupled(const ResonanceTester& t, const Vec& a, const Vec& b);

/// Every coupled pair of interior-safe points must share its E block.
InvarianceReport verify_invariance(const BlockPartition& part, int threads = 1);

/// Ratio max|a|/min|a| per E block and the empirical diameter constants.
DyadicReport verify_dyadic_and_diameter(const BlockPartition& part);

struct CalibrationResult {
  bool found = false;
  NekhoroshevParams params;
  PartitionStats stats;
  std::size_t violations = 0;
  DyadicReport dyadic;
  std::vector<std::string> log;
};

/// Smallest R from `R_grid` (ascending), with C_s, D_s doubled up to
/// `max_doublings` times, giving an exact partition, zero invariance
/// violations, an empty Z^(d) and dyadic blocks. Doubling stops once the
/// invariance check is clean, and candidates whose (points × k-ball) work
/// estimate exceeds `max_work` are skipped and logged.
CalibrationResult calibrate(const Lattice& lat, const NekhoroshevParams& start,
                            const FrequencyModel& fm, const std::vector<double>& R_grid,
                            int max_doublings, int threads = 1, double max_work = 1e8);

}  // namespace nekho
