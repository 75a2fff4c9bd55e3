// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace regguard::ordering {

/// Fenwick tree over 1-based ranks; supports point add and prefix sums.
class Fenwick {
 public:
  explicit Fenwick(size_t n) : tree_(n + 1, 0) {}

  void add(size_t i) {
    for (; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }

  uint64_t prefix(size_t i) const {
    uint64_t s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

  uint64_t total() const { return prefix(tree_.size() - 1); }

 private:
  std::vector<uint64_t> tree_;
};

/// Ground-truth data for one ordered transaction: when it really arrived
/// and where the committed order placed it.
struct OrderedArrival {
  uint64_t arrival_us = 0;
  uint64_t position = 0;  // rank in the committed order, 0-based
};

/// Pairwise order-fairness measurement for one tolerance alpha. A pair
/// (early, late) qualifies when the early transaction preceded the late one
/// by more than alpha; it is violated when the committed order reverses
/// them. The ratio of violated to qualifying pairs is the empirical beta.
struct FairnessReport {
  uint64_t qualifying_pairs = 0;
  uint64_t violations = 0;

  double beta() const {
    return qualifying_pairs == 0
               ? 0.0
               : static_cast<double>(violations) / static_cast<double>(qualifying_pairs);
  }
};

/// Counts qualifying and violated pairs in O(N log N): sweep transactions
/// in arrival order, maintain the set of positions of everything that
/// arrived more than alpha earlier, and count how many of those positions
/// exceed the current transaction's.
inline FairnessReport measure_fairness(std::span<const OrderedArrival> txs, uint64_t alpha_us) {
  FairnessReport rep;
  size_t n = txs.size();
  if (n < 2) return rep;

  std::vector<size_t> by_arrival(n);
  std::iota(by_arrival.begin(), by_arrival.end(), size_t{0});
  std::sort(by_arrival.begin(), by_arrival.end(), [&](size_t a, size_t b) {
    return txs[a].arrival_us != txs[b].arrival_us ? txs[a].arrival_us < txs[b].arrival_us
                                                  : txs[a].position < txs[b].position;
  });

  Fenwick inserted(n);
  size_t k = 0;
  uint64_t inserted_count = 0;
  for (size_t jj = 0; jj < n; ++jj) {
    const OrderedArrival& late = txs[by_arrival[jj]];
    while (k < n && txs[by_arrival[k]].arrival_us + alpha_us < late.arrival_us) {
      inserted.add(txs[by_arrival[k]].position + 1);
      ++inserted_count;
      ++k;
    }
    rep.qualifying_pairs += inserted_count;
    // Violations: earlier arrivals placed after this transaction.
    rep.violations += inserted_count - inserted.prefix(late.position + 1);
  }
  return rep;
}

}  // namespace regguard::ordering
