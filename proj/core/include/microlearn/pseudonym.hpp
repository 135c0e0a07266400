#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace microlearn {

/// Keyed hash of a real identity: HMAC-SHA256 under a deployment secret,
/// truncated to 128 bits and rendered as 32 lowercase hex characters. The
/// same identity always maps to the same token under one key; the key itself
/// never reaches the event log.
class Pseudonymizer {
 public:
  static constexpr std::size_t kTokenLength = 32;
  static constexpr std::size_t kMinKeyBytes = 16;

  /// Throws std::invalid_argument for keys shorter than kMinKeyBytes.
  explicit Pseudonymizer(std::string key);

  /// Reads the key from a file; surrounding whitespace is ignored.
  static Pseudonymizer from_key_file(const std::filesystem::path& path);

  std::string pseudonym(std::string_view identity) const;

 private:
  std::string key_;
};

/// True for strings shaped like a pseudonym token.
bool is_pseudonym(std::string_view token);

}  // namespace microlearn
