#include "converse/fingerprint.hpp"

#include <sstream>

#include <openssl/evp.h>

#include "converse/error.hpp"

namespace converse {

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string corpus_fingerprint(const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(corpus, out);
  return sha256_hex(out.str());
}

}  // namespace converse
