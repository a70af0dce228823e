#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hategraph/discussion.hpp"
#include "hategraph/matrix.hpp"

namespace hategraph {

// Deterministic hashed bag-of-tokens comment encoder. The interface is the
// contract (text -> fixed-width vector); richer encoders can be swapped in
// behind it as long as model input_dim matches spec.dim.
struct EncoderSpec {
  int dim = 64;  // 2..1024
  uint64_t hash_seed = 0;
  bool normalize = true;

  void validate() const;
  bool operator==(const EncoderSpec&) const = default;
};

// Lowercases and splits on any run of characters that is neither
// alphanumeric nor '*'. Asterisks stay inside tokens so censored slurs
// ("f*ggot", "b*tch") survive as single tokens. Bytes >= 0x80 are treated
// as token characters, so multibyte sequences pass through unsplit.
std::vector<std::string> tokenize(std::string_view text);

// Seeded 64-bit token hash (FNV-1a with a SplitMix64 finalizer). The low
// bits pick the feature index, bit 63 the sign.
uint64_t token_hash(std::string_view token, uint64_t seed);

// Signed feature hashing of the token counts; optional L2 normalization
// (skipped for the zero vector). Pure function of (text, spec).
std::vector<double> encode(std::string_view text, const EncoderSpec& spec);

// One encoded row per node, in graph node order.
Matrix encode_graph(const DiscussionGraph& g, const EncoderSpec& spec);

}  // namespace hategraph
