// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regguard/ordering/encrypted_tx.hpp"
#include "regguard/ordering/threshold.hpp"
#include "regguard/util/crypto.hpp"

namespace regguard::ordering {

using TimeUs = uint64_t;

/// One committee member's attestation of when a ciphertext arrived.
struct ArrivalStamp {
  uint32_t member = 0;
  TimeUs observed = 0;
  Bytes32 mac;
};

inline Bytes32 stamp_mac(const std::array<uint8_t, 32>& member_key, const Bytes32& link_hash,
                         TimeUs observed) {
  ByteWriter w;
  w.raw(link_hash);
  w.u64be(observed);
  return hmac_sha256(std::span<const uint8_t>(member_key), w.bytes());
}

inline ArrivalStamp make_stamp(uint32_t member, const std::array<uint8_t, 32>& member_key,
                               const Bytes32& link_hash, TimeUs observed) {
  return {member, observed, stamp_mac(member_key, link_hash, observed)};
}

inline bool verify_stamp(const ArrivalStamp& s, const std::array<uint8_t, 32>& member_key,
                         const Bytes32& link_hash) {
  return stamp_mac(member_key, link_hash, s.observed) == s.mac;
}

/// Lower median of the attested times; robust while fewer than half the
/// committee misreports.
inline TimeUs median_arrival(std::span<const ArrivalStamp> stamps) {
  if (stamps.empty()) return 0;
  std::vector<TimeUs> ts(stamps.size());
  for (size_t i = 0; i < stamps.size(); ++i) ts[i] = stamps[i].observed;
  size_t mid = (ts.size() - 1) / 2;
  std::nth_element(ts.begin(), ts.begin() + mid, ts.end());
  return ts[mid];
}

/// A sealed transaction queued for a window, with its attested arrival.
struct ArrivalRecord {
  EncryptedTx enc;
  std::vector<ArrivalStamp> stamps;
  TimeUs median = 0;
};

/// The committed per-window ordering: link hashes sorted by attested
/// arrival, ties broken by hash so the order is a pure function of the
/// records.
struct OrderedBatch {
  uint64_t window_index = 0;
  std::vector<EncryptedTx> order;
  Bytes32 commitment;
};

/// Digest of an ordered hash list: count then each hash, hashed once. The
/// sequencer signs/commits to this before any payload can be opened.
inline Bytes32 order_commitment(std::span<const Bytes32> link_hashes) {
  ByteWriter w;
  w.u64be(link_hashes.size());
  for (const auto& h : link_hashes) w.raw(h);
  return sha256(w.bytes());
}

inline Bytes32 batch_commitment(const OrderedBatch& b) {
  std::vector<Bytes32> hs(b.order.size());
  for (size_t i = 0; i < b.order.size(); ++i) hs[i] = b.order[i].link_hash;
  return order_commitment(hs);
}

/// Sorts a window's arrivals into the canonical committed order and binds
/// the commitment.
inline OrderedBatch order_window(uint64_t window_index, std::vector<ArrivalRecord> records) {
  for (auto& r : records)
    if (!r.stamps.empty()) r.median = median_arrival(r.stamps);
  std::stable_sort(records.begin(), records.end(),
                   [](const ArrivalRecord& a, const ArrivalRecord& b) {
                     if (a.median != b.median) return a.median < b.median;
                     return a.enc.link_hash < b.enc.link_hash;
                   });
  OrderedBatch batch;
  batch.window_index = window_index;
  batch.order.reserve(records.size());
  for (auto& r : records) batch.order.push_back(std::move(r.enc));
  batch.commitment = batch_commitment(batch);
  return batch;
}

/// Outcome of the post-commit decryption round.
struct ReleaseResult {
  bool released = false;
  std::string failure;  // set when the batch cannot be opened
  std::vector<std::vector<uint8_t>> tx_bytes;  // in committed order
  std::vector<size_t> undecryptable;  // positions that failed content checks
};

/// Opens every ciphertext of a committed batch with partial decryptions
/// from the available members. Needs at least `threshold` responsive
/// members; individual ciphertexts that fail their content checks are
/// reported but do not block the batch.
inline ReleaseResult release_batch(const PrimeGroup& grp, const OrderedBatch& batch,
                                   const WindowKeys& keys,
                                   std::span<const uint32_t> responsive_members) {
  ReleaseResult res;
  if (responsive_members.size() < keys.threshold) {
    res.failure = "only " + std::to_string(responsive_members.size()) + " of " +
                  std::to_string(keys.threshold) + " required members responded";
    return res;
  }
  std::vector<const Share*> chosen;
  chosen.reserve(keys.threshold);
  for (uint32_t m : responsive_members) {
    if (chosen.size() == keys.threshold) break;
    for (const auto& s : keys.shares)
      if (s.x == m) {
        chosen.push_back(&s);
        break;
      }
  }
  if (chosen.size() < keys.threshold) {
    res.failure = "responsive member set contains unknown indices";
    return res;
  }
  res.released = true;
  res.tx_bytes.resize(batch.order.size());
  for (size_t i = 0; i < batch.order.size(); ++i) {
    std::vector<PartialDecryption> parts;
    parts.reserve(chosen.size());
    for (const Share* s : chosen) parts.push_back(partial_decrypt(grp, *s, batch.order[i].c1));
    DecryptResult d = threshold_decrypt(grp, batch.order[i], parts);
    if (d.ok()) {
      res.tx_bytes[i] = std::move(d.tx_bytes);
    } else {
      res.undecryptable.push_back(i);
    }
  }
  return res;
}

/// Proof that an execution deviated from a committed order: the committed
/// hash list (which must digest to the commitment) and the executed
/// transaction found at a position whose committed hash it does not match.
/// Verifiable offline by anyone holding the commitment.
struct SlashingEvidence {
  uint64_t window_index = 0;
  Bytes32 commitment;
  std::vector<Bytes32> committed_hashes;
  uint64_t position = 0;
  std::vector<uint8_t> executed_tx;

  std::vector<uint8_t> to_bytes() const {
    ByteWriter w;
    w.str("RGEV1");
    w.u64be(window_index);
    w.raw(commitment);
    w.u32be(static_cast<uint32_t>(committed_hashes.size()));
    for (const auto& h : committed_hashes) w.raw(h);
    w.u64be(position);
    w.blob(executed_tx);
    return w.take();
  }

  static SlashingEvidence from_bytes(std::span<const uint8_t> data) {
    ByteReader r(data);
    if (r.str() != "RGEV1") throw std::runtime_error("SlashingEvidence: bad magic");
    SlashingEvidence e;
    e.window_index = r.u64be();
    e.commitment = r.bytes32();
    uint32_t n = r.u32be();
    e.committed_hashes.resize(n);
    for (uint32_t i = 0; i < n; ++i) e.committed_hashes[i] = r.bytes32();
    e.position = r.u64be();
    e.executed_tx = r.blob();
    if (!r.done()) throw std::runtime_error("SlashingEvidence: trailing bytes");
    return e;
  }
};

enum class EvidenceVerdict : uint8_t {
  Valid,               // deviation proven
  CommitmentMismatch,  // hash list does not digest to the commitment
  PositionOutOfRange,
  NoDeviation,  // executed tx matches the committed hash; no offence
};

inline const char* to_string(EvidenceVerdict v) {
  switch (v) {
    case EvidenceVerdict::Valid: return "valid";
    case EvidenceVerdict::CommitmentMismatch: return "commitment_mismatch";
    case EvidenceVerdict::PositionOutOfRange: return "position_out_of_range";
    case EvidenceVerdict::NoDeviation: return "no_deviation";
  }
  return "?";
}

inline EvidenceVerdict verify_evidence(const SlashingEvidence& e) {
  if (order_commitment(e.committed_hashes) != e.commitment)
    return EvidenceVerdict::CommitmentMismatch;
  if (e.position >= e.committed_hashes.size()) return EvidenceVerdict::PositionOutOfRange;
  if (sha256(e.executed_tx) == e.committed_hashes[e.position]) return EvidenceVerdict::NoDeviation;
  return EvidenceVerdict::Valid;
}

/// Audits an execution against its committed batch: every committed
/// position must hold a transaction hashing to its committed digest.
/// Returns evidence for the first deviating position (a truncated
/// execution deviates at the first missing position), or nothing when the
/// execution honours the commitment.
inline std::optional<SlashingEvidence> audit_execution(
    const OrderedBatch& batch, std::span<const std::vector<uint8_t>> executed) {
  static const std::vector<uint8_t> kEmpty;
  for (size_t i = 0; i < batch.order.size(); ++i) {
    const std::vector<uint8_t>& at = i < executed.size() ? executed[i] : kEmpty;
    if (sha256(at) != batch.order[i].link_hash) {
      SlashingEvidence e;
      e.window_index = batch.window_index;
      e.commitment = batch.commitment;
      e.committed_hashes.resize(batch.order.size());
      for (size_t k = 0; k < batch.order.size(); ++k)
        e.committed_hashes[k] = batch.order[k].link_hash;
      e.position = i;
      e.executed_tx = at;
      return e;
    }
  }
  return std::nullopt;
}

}  // namespace regguard::ordering
