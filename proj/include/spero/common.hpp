// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace spero {

using Bytes16 = std::array<uint8_t, 16>;
using KeyBytes = Bytes16;
using PlainBytes = Bytes16;
using CipherBytes = Bytes16;
using MaskVector = Bytes16;

inline int hamming_weight(uint8_t v) { return std::popcount(v); }

std::string to_hex(const uint8_t* data, size_t len);
std::string to_hex(const Bytes16& b);
Bytes16 bytes16_from_hex(const std::string& hex);

// Error hierarchy: every failure mode surfaces as a named class so callers
// (and the CLI exit path) can report "ErrorName: message".
class Error : public std::runtime_error {
public:
  Error(std::string name, const std::string& msg)
      : std::runtime_error(name + ": " + msg), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

private:
  std::string name_;
};

#define SPERO_DEFINE_ERROR(NAME)                                   \
  class NAME : public Error {                                      \
  public:                                                          \
    explicit NAME(const std::string& msg) : Error(#NAME, msg) {}   \
  }

SPERO_DEFINE_ERROR(ConfigError);
SPERO_DEFINE_ERROR(IoError);
SPERO_DEFINE_ERROR(CorruptManifest);
SPERO_DEFINE_ERROR(SizeMismatch);
SPERO_DEFINE_ERROR(ChannelMisalignment);
SPERO_DEFINE_ERROR(MissingIntermediate);
SPERO_DEFINE_ERROR(MissingWindow);
SPERO_DEFINE_ERROR(WindowOverlap);
SPERO_DEFINE_ERROR(LengthMismatch);
SPERO_DEFINE_ERROR(MissingKey);
SPERO_DEFINE_ERROR(InsufficientTraces);
SPERO_DEFINE_ERROR(InsufficientClassData);
SPERO_DEFINE_ERROR(Overflow);
SPERO_DEFINE_ERROR(DegenerateAntenna);
SPERO_DEFINE_ERROR(NonPositiveVoltage);

#undef SPERO_DEFINE_ERROR

// splitmix64; used to derive independent sub-seeds from (master, stream, index)
// so per-trace generators are identical regardless of thread schedule.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t index) {
  uint64_t s = master;
  uint64_t a = splitmix64(s);
  s ^= stream * 0x9e3779b97f4a7c15ull + 0x6a09e667f3bcc909ull;
  uint64_t b = splitmix64(s);
  s ^= index * 0xc2b2ae3d27d4eb4full + 0x165667b19e3779f9ull;
  uint64_t c = splitmix64(s);
  return a ^ (b + 0x9e3779b97f4a7c15ull) ^ (c << 1);
}

}  // namespace spero
