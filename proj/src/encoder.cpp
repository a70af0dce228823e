#include "hategraph/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace hategraph {

void EncoderSpec::validate() const {
  if (dim < 2) throw std::invalid_argument("encoder dim must be at least 2");
  if (dim > 1024) throw std::invalid_argument("encoder dim must be at most 1024");
}

namespace {

bool is_token_char(unsigned char c) {
  if (c >= 0x80) return true;
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '*';
}

char lower_ascii(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_token_char(c)) {
      current.push_back(lower_ascii(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

uint64_t token_hash(std::string_view token, uint64_t seed) {
  uint64_t h = 1469598103934665603ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
  for (unsigned char c : token) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  // SplitMix64 finalizer; the raw FNV low bits are too regular for modulo.
  h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
  h = (h ^ (h >> 27)) * 0x94D049BB133111EBULL;
  return h ^ (h >> 31);
}

std::vector<double> encode(std::string_view text, const EncoderSpec& spec) {
  spec.validate();
  std::vector<double> v(spec.dim, 0.0);
  for (const std::string& tok : tokenize(text)) {
    const uint64_t h = token_hash(tok, spec.hash_seed);
    const int idx = static_cast<int>(h % static_cast<uint64_t>(spec.dim));
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v[idx] += sign;
  }
  if (spec.normalize) {
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& x : v) x *= inv;
    }
  }
  return v;
}

Matrix encode_graph(const DiscussionGraph& g, const EncoderSpec& spec) {
  spec.validate();
  Matrix m(g.node_count(), spec.dim);
  for (int i = 0; i < g.node_count(); ++i) {
    const std::vector<double> row = encode(g.comments[i].text, spec);
    std::copy(row.begin(), row.end(), m.row(i));
  }
  return m;
}

}  // namespace hategraph
