// SPDX-License-Identifier: Apache-2.0
#include "spero/aes.hpp"

#include <cstdio>

namespace spero {

const uint8_t kSbox[256] = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b,
    0xfe, 0xd7, 0xab, 0x76, 0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0,
    0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0, 0xb7, 0xfd, 0x93, 0x26,
    0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2,
    0xeb, 0x27, 0xb2, 0x75, 0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0,
    0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84, 0x53, 0xd1, 0x00, 0xed,
    0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f,
    0x50, 0x3c, 0x9f, 0xa8, 0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5,
    0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2, 0xcd, 0x0c, 0x13, 0xec,
    0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14,
    0xde, 0x5e, 0x0b, 0xdb, 0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c,
    0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79, 0xe7, 0xc8, 0x37, 0x6d,
    0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f,
    0x4b, 0xbd, 0x8b, 0x8a, 0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e,
    0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e, 0xe1, 0xf8, 0x98, 0x11,
    0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f,
    0xb0, 0x54, 0xbb, 0x16};

static const uint8_t kRcon[10] = {0x01, 0x02, 0x04, 0x08, 0x10,
                                  0x20, 0x40, 0x80, 0x1b, 0x36};

const char* op_tag_name(OpTag t) {
  switch (t) {
    case OpTag::AddRoundKeyOut: return "AddRoundKeyOut";
    case OpTag::SboxOut: return "SboxOut";
    case OpTag::ShiftRowsOut: return "ShiftRowsOut";
    case OpTag::RemaskOut: return "RemaskOut";
    case OpTag::MixColumnsOut: return "MixColumnsOut";
    case OpTag::Other: return "Other";
  }
  return "Other";
}

OpTag op_tag_from_name(const std::string& s) {
  for (OpTag t : {OpTag::AddRoundKeyOut, OpTag::SboxOut, OpTag::ShiftRowsOut,
                  OpTag::RemaskOut, OpTag::MixColumnsOut, OpTag::Other}) {
    if (s == op_tag_name(t)) return t;
  }
  throw ConfigError("unknown op tag '" + s + "'");
}

const ExecEntry* ExecRecord::find(OpTag op, int round, int byte_index) const {
  for (const auto& e : entries) {
    if (e.op == op && e.round == round && e.byte_index == byte_index) return &e;
  }
  return nullptr;
}

std::array<uint8_t, 256> masked_sbox_table(uint8_t m_in, uint8_t m_out) {
  std::array<uint8_t, 256> t{};
  for (int i = 0; i < 256; i++) t[i ^ m_in] = kSbox[i] ^ m_out;
  return t;
}

static inline uint8_t xtime(uint8_t a) {
  return static_cast<uint8_t>((a << 1) ^ ((a >> 7) * 0x1b));
}

std::array<Bytes16, 11> expand_key(const KeyBytes& key) {
  std::array<Bytes16, 11> rk;
  uint8_t w[44][4];
  for (int i = 0; i < 4; i++)
    for (int j = 0; j < 4; j++) w[i][j] = key[4 * i + j];
  for (int i = 4; i < 44; i++) {
    uint8_t t[4] = {w[i - 1][0], w[i - 1][1], w[i - 1][2], w[i - 1][3]};
    if (i % 4 == 0) {
      uint8_t tmp = t[0];
      t[0] = static_cast<uint8_t>(kSbox[t[1]] ^ kRcon[i / 4 - 1]);
      t[1] = kSbox[t[2]];
      t[2] = kSbox[t[3]];
      t[3] = kSbox[tmp];
    }
    for (int j = 0; j < 4; j++) w[i][j] = w[i - 4][j] ^ t[j];
  }
  for (int r = 0; r < 11; r++)
    for (int c = 0; c < 4; c++)
      for (int j = 0; j < 4; j++) rk[r][4 * c + j] = w[4 * r + c][j];
  return rk;
}

// State byte k lives in row k % 4, column k / 4.
static inline void shift_rows(uint8_t s[16]) {
  uint8_t t[16];
  for (int c = 0; c < 4; c++)
    for (int r = 0; r < 4; r++) t[4 * c + r] = s[4 * ((c + r) % 4) + r];
  for (int i = 0; i < 16; i++) s[i] = t[i];
}

static inline void mix_columns(uint8_t s[16]) {
  for (int c = 0; c < 4; c++) {
    uint8_t* a = s + 4 * c;
    uint8_t t = static_cast<uint8_t>(a[0] ^ a[1] ^ a[2] ^ a[3]);
    uint8_t a0 = a[0];
    a[0] ^= t ^ xtime(static_cast<uint8_t>(a[0] ^ a[1]));
    a[1] ^= t ^ xtime(static_cast<uint8_t>(a[1] ^ a[2]));
    a[2] ^= t ^ xtime(static_cast<uint8_t>(a[2] ^ a[3]));
    a[3] ^= t ^ xtime(static_cast<uint8_t>(a[3] ^ a0));
  }
}

static inline void record_state(ExecRecord* rec, OpTag op, int round,
                                const uint8_t s[16]) {
  if (!rec) return;
  for (int i = 0; i < 16; i++)
    rec->entries.push_back({op, static_cast<uint8_t>(round),
                            static_cast<uint8_t>(i), s[i]});
}

CipherBytes aes128_encrypt(const KeyBytes& key, const PlainBytes& pt,
                           ExecRecord* rec) {
  auto rk = expand_key(key);
  uint8_t s[16];
  for (int i = 0; i < 16; i++) s[i] = pt[i] ^ rk[0][i];
  record_state(rec, OpTag::AddRoundKeyOut, 1, s);
  for (int rnd = 1; rnd <= 9; rnd++) {
    for (int i = 0; i < 16; i++) s[i] = kSbox[s[i]];
    record_state(rec, OpTag::SboxOut, rnd, s);
    shift_rows(s);
    record_state(rec, OpTag::ShiftRowsOut, rnd, s);
    mix_columns(s);
    record_state(rec, OpTag::MixColumnsOut, rnd, s);
    for (int i = 0; i < 16; i++) s[i] ^= rk[rnd][i];
    record_state(rec, OpTag::AddRoundKeyOut, rnd + 1, s);
  }
  for (int i = 0; i < 16; i++) s[i] = kSbox[s[i]];
  record_state(rec, OpTag::SboxOut, 10, s);
  shift_rows(s);
  record_state(rec, OpTag::ShiftRowsOut, 10, s);
  CipherBytes ct;
  for (int i = 0; i < 16; i++) ct[i] = s[i] ^ rk[10][i];
  return ct;
}

CipherBytes masked_aes128_encrypt(const KeyBytes& key, const PlainBytes& pt,
                                  const MaskVector& m, ExecRecord* rec) {
  auto rk = expand_key(key);
  const uint8_t m4 = m[4], m5 = m[5];
  auto msb = masked_sbox_table(m4, m5);

  // Per-row masks after MixColumns when row r carries m[r] going in.
  uint8_t mc[4];
  {
    uint8_t col[16];
    for (int i = 0; i < 16; i++) col[i] = m[i % 4];
    mix_columns(col);
    for (int r = 0; r < 4; r++) mc[r] = col[r];
  }

  uint8_t s[16];
  for (int i = 0; i < 16; i++) {
    uint8_t pm = static_cast<uint8_t>(pt[i] ^ m[6 + i % 4]);
    uint8_t km = static_cast<uint8_t>(rk[0][i] ^ m[6 + i % 4] ^ m4);
    s[i] = pm ^ km;  // masked with m[4]
  }
  record_state(rec, OpTag::AddRoundKeyOut, 1, s);
  for (int rnd = 1; rnd <= 9; rnd++) {
    for (int i = 0; i < 16; i++) s[i] = msb[s[i]];  // m[4] -> m[5]
    record_state(rec, OpTag::SboxOut, rnd, s);
    shift_rows(s);
    record_state(rec, OpTag::ShiftRowsOut, rnd, s);
    for (int i = 0; i < 16; i++) s[i] ^= m[i % 4] ^ m5;  // m[5] -> m[row]
    record_state(rec, OpTag::RemaskOut, rnd, s);
    mix_columns(s);  // m[row] -> mc[row]
    record_state(rec, OpTag::MixColumnsOut, rnd, s);
    for (int i = 0; i < 16; i++) s[i] ^= rk[rnd][i] ^ mc[i % 4] ^ m4;
    record_state(rec, OpTag::AddRoundKeyOut, rnd + 1, s);
  }
  for (int i = 0; i < 16; i++) s[i] = msb[s[i]];
  record_state(rec, OpTag::SboxOut, 10, s);
  shift_rows(s);
  record_state(rec, OpTag::ShiftRowsOut, 10, s);
  CipherBytes ct;
  for (int i = 0; i < 16; i++) ct[i] = s[i] ^ rk[10][i] ^ m5;
  return ct;
}

std::string to_hex(const uint8_t* data, size_t len) {
  std::string out(2 * len, '0');
  static const char* digits = "0123456789abcdef";
  for (size_t i = 0; i < len; i++) {
    out[2 * i] = digits[data[i] >> 4];
    out[2 * i + 1] = digits[data[i] & 0xf];
  }
  return out;
}

std::string to_hex(const Bytes16& b) { return to_hex(b.data(), b.size()); }

Bytes16 bytes16_from_hex(const std::string& hex) {
  if (hex.size() != 32) throw ConfigError("expected 32 hex chars");
  Bytes16 out;
  for (int i = 0; i < 16; i++) {
    unsigned v = 0;
    if (std::sscanf(hex.c_str() + 2 * i, "%2x", &v) != 1)
      throw ConfigError("bad hex byte in '" + hex + "'");
    out[i] = static_cast<uint8_t>(v);
  }
  return out;
}

}  // namespace spero
