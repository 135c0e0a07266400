#include "microlearn/pseudonym.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace microlearn {

Pseudonymizer::Pseudonymizer(std::string key) : key_(std::move(key)) {
  if (key_.size() < kMinKeyBytes) {
    throw std::invalid_argument("pseudonym key must be at least " + std::to_string(kMinKeyBytes) + " bytes");
  }
}

Pseudonymizer Pseudonymizer::from_key_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read pseudonym key file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string key = buffer.str();
  const auto first = key.find_first_not_of(" \t\r\n");
  const auto last = key.find_last_not_of(" \t\r\n");
  key = first == std::string::npos ? std::string{} : key.substr(first, last - first + 1);
  return Pseudonymizer(std::move(key));
}

std::string Pseudonymizer::pseudonym(std::string_view identity) const {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (!HMAC(EVP_sha256(), key_.data(), static_cast<int>(key_.size()),
            reinterpret_cast<const unsigned char*>(identity.data()), identity.size(), digest, &length)) {
    throw std::runtime_error("HMAC-SHA256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string token;
  token.reserve(kTokenLength);
  for (std::size_t i = 0; i < kTokenLength / 2; ++i) {
    token += hex[digest[i] >> 4];
    token += hex[digest[i] & 0x0f];
  }
  return token;
}

bool is_pseudonym(std::string_view token) {
  if (token.size() != Pseudonymizer::kTokenLength) return false;
  for (char c : token) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace microlearn
