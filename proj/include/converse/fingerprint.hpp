#pragma once

#include <string>
#include <string_view>

#include "converse/dataset_io.hpp"

namespace converse {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
// Hash of the canonical JSONL serialization, so formatting differences in
// the source file do not change it.
std::string corpus_fingerprint(const Corpus& corpus);

}  // namespace converse
