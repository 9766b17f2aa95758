#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace topouq {

inline bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view Trim(std::string_view s);
std::vector<std::string_view> Split(std::string_view s, char sep);
std::string AsciiLower(std::string_view s);

// Lowercased ASCII alphanumeric runs; every other byte separates tokens.
std::vector<std::string> Tokenize(std::string_view s);

// 64-bit FNV-1a over the bytes of `s`.
std::uint64_t Fnv1a64(std::string_view s, std::uint64_t basis = 0xcbf29ce484222325ULL);

// SplitMix64 finalizer; a bijective 64-bit mix.
inline std::uint64_t Mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Hex-encoded SHA-256 digest.
std::string Sha256Hex(std::string_view data);

// Replaces every `{{name}}` with the matching value. Throws
// Error(kInvalidArgument) if a placeholder in the template has no value.
struct Placeholder {
  std::string_view name;
  std::string_view value;
};
std::string RenderTemplate(std::string_view tmpl,
                           std::initializer_list<Placeholder> values);

}  // namespace topouq
