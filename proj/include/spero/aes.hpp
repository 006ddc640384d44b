// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "spero/common.hpp"

namespace spero {

// Leakage-relevant intermediates of one encryption, in execution order.
// For masked runs every recorded value is the masked intermediate.
enum class OpTag : uint8_t {
  AddRoundKeyOut,
  SboxOut,
  ShiftRowsOut,
  RemaskOut,
  MixColumnsOut,
  Other,
};

const char* op_tag_name(OpTag t);
OpTag op_tag_from_name(const std::string& s);

struct ExecEntry {
  OpTag op;
  uint8_t round;       // 1..10
  uint8_t byte_index;  // 0..15
  uint8_t value;
};

struct ExecRecord {
  std::vector<ExecEntry> entries;

  void clear() { entries.clear(); }
  // Returns nullptr when (op, round, byte_index) was never recorded.
  const ExecEntry* find(OpTag op, int round, int byte_index) const;
};

extern const uint8_t kSbox[256];

// table[i ^ m_in] == sbox[i] ^ m_out for all i.
std::array<uint8_t, 256> masked_sbox_table(uint8_t m_in, uint8_t m_out);

// Round keys 0..10, state-ordered (byte k of round key r XORs state byte k).
std::array<Bytes16, 11> expand_key(const KeyBytes& key);

CipherBytes aes128_encrypt(const KeyBytes& key, const PlainBytes& pt,
                           ExecRecord* rec = nullptr);

// First-order masked variant. m[4] masks the Sbox input, m[5] the Sbox
// output, m[0..3] are the per-row remask values applied between ShiftRows and
// MixColumns, and m[6..9] mask the plaintext and round key 0 per row
// (byte index k sits in row k % 4). Round keys 1..9 are remasked each round
// with the MixColumns image of m[0..3] so that the ciphertext equals the
// unmasked one for every mask vector; round key 10 carries m[5], which strips
// the final mask. m[10..15] are accepted and unused.
CipherBytes masked_aes128_encrypt(const KeyBytes& key, const PlainBytes& pt,
                                  const MaskVector& m,
                                  ExecRecord* rec = nullptr);

}  // namespace spero
