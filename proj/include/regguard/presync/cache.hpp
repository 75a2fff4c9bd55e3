// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <cstdint>
#include <list>
#include <unordered_map>
#include <vector>

#include "regguard/chain/state.hpp"
#include "regguard/util/rng.hpp"

namespace regguard::presync {

using chain::L1State;
using chain::SlotRef;

/// How the cache can fall behind the confirmed L1 head.
///   Exact:    every read returns the confirmed value.
///   Bernoulli: each read independently serves the slot's previous value
///              with probability epsilon (models a lossy sync channel).
///   BlockLag: each incoming confirmed write is applied one block late with
///              probability epsilon (models a slow sync channel).
enum class FreshnessModel : uint8_t { Exact, Bernoulli, BlockLag };

struct CacheStats {
  uint64_t reads = 0;
  uint64_t hits = 0;
  uint64_t misses = 0;
  uint64_t evictions = 0;
  uint64_t write_throughs = 0;
  uint64_t divergent_serves = 0;  // reads answered with a non-confirmed value
};

/// L2-side cache of L1 regulatory storage. Entries are grouped per contract
/// with an LRU bound per group; synchronization pushes confirmed L1 writes
/// straight through (`write_through`), so a healthy cache never holds a
/// value the confirmed chain does not. Staleness is injected only through
/// the freshness model.
class L1Cache {
 public:
  explicit L1Cache(size_t per_contract_capacity = 10'000)
      : capacity_(per_contract_capacity) {}

  void set_freshness(FreshnessModel model, double epsilon, Rng* rng) {
    model_ = model;
    epsilon_ = epsilon;
    rng_ = rng;
  }

  /// Read through the cache. Misses fill from confirmed storage. The served
  /// value can diverge from `confirmed` only per the freshness model.
  int64_t read(const SlotRef& ref, const L1State& confirmed, uint64_t now_block) {
    ++stats.reads;
    flush_lagged(now_block);
    auto& shard = shards_[ref.contract];
    auto it = shard.index.find(ref.slot);
    if (it == shard.index.end()) {
      ++stats.misses;
      int64_t v = confirmed.read_i64(ref.contract, ref.slot);
      insert(shard, ref.slot, v, v);
      return v;
    }
    ++stats.hits;
    shard.lru.splice(shard.lru.begin(), shard.lru, it->second);
    Entry& e = *it->second;
    if (model_ == FreshnessModel::Bernoulli && rng_ && e.prev != e.value &&
        rng_->chance(epsilon_)) {
      ++stats.divergent_serves;
      return e.prev;
    }
    int64_t confirmed_now = confirmed.read_i64(ref.contract, ref.slot);
    if (e.value != confirmed_now) ++stats.divergent_serves;
    return e.value;
  }

  /// Synchronization path: a confirmed L1 write lands in the cache. Under
  /// BlockLag the write may be deferred to the next block.
  void write_through(const SlotRef& ref, int64_t value, uint64_t now_block = 0) {
    if (model_ == FreshnessModel::BlockLag && rng_ && rng_->chance(epsilon_)) {
      lagged_.push_back({ref, value, now_block + 1});
      return;
    }
    apply_write(ref, value);
  }

  /// Forces an entry back to the confirmed value (the validator does this
  /// when it observes drift).
  void resync(const SlotRef& ref, const L1State& confirmed) {
    apply_write(ref, confirmed.read_i64(ref.contract, ref.slot));
  }

  bool contains(const SlotRef& ref) const {
    auto sit = shards_.find(ref.contract);
    return sit != shards_.end() && sit->second.index.count(ref.slot) != 0;
  }

  size_t size(const Address& contract) const {
    auto sit = shards_.find(contract);
    return sit == shards_.end() ? 0 : sit->second.index.size();
  }

  CacheStats stats;

 private:
  struct Entry {
    Bytes32 slot;
    int64_t value = 0;
    int64_t prev = 0;
  };
  struct Shard {
    std::list<Entry> lru;  // front = most recently used
    std::unordered_map<Bytes32, std::list<Entry>::iterator> index;
  };
  struct LaggedWrite {
    SlotRef ref;
    int64_t value;
    uint64_t apply_block;
  };

  void apply_write(const SlotRef& ref, int64_t value) {
    ++stats.write_throughs;
    auto& shard = shards_[ref.contract];
    auto it = shard.index.find(ref.slot);
    if (it == shard.index.end()) {
      insert(shard, ref.slot, value, value);
      return;
    }
    shard.lru.splice(shard.lru.begin(), shard.lru, it->second);
    Entry& e = *it->second;
    if (e.value != value) {
      e.prev = e.value;
      e.value = value;
    }
  }

  void insert(Shard& shard, const Bytes32& slot, int64_t value, int64_t prev) {
    shard.lru.push_front(Entry{slot, value, prev});
    shard.index[slot] = shard.lru.begin();
    if (shard.index.size() > capacity_) {
      ++stats.evictions;
      shard.index.erase(shard.lru.back().slot);
      shard.lru.pop_back();
    }
  }

  void flush_lagged(uint64_t now_block) {
    if (lagged_.empty()) return;
    std::vector<LaggedWrite> keep;
    keep.reserve(lagged_.size());
    for (const auto& w : lagged_) {
      if (w.apply_block <= now_block) {
        apply_write(w.ref, w.value);
      } else {
        keep.push_back(w);
      }
    }
    lagged_.swap(keep);
  }

  size_t capacity_;
  std::unordered_map<Address, Shard> shards_;
  std::vector<LaggedWrite> lagged_;
  FreshnessModel model_ = FreshnessModel::Exact;
  double epsilon_ = 0.0;
  Rng* rng_ = nullptr;
};

}  // namespace regguard::presync
