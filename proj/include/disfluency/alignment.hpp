#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "disfluency/annotation.hpp"

namespace disfl {

/// Monotone map from fluent token index to disfluent token index.
struct Alignment {
  std::vector<std::size_t> map;

  friend bool operator==(const Alignment&, const Alignment&) = default;
};

/// The fluent side is not a subsequence of the disfluent side.
class NonMonotonicPair : public DataError {
 public:
  using DataError::DataError;
};

/// Rightmost-preferring alignment: every fluent token maps to the latest
/// disfluent occurrence that still leaves room for the tokens before it, so
/// abandoned material (reparanda, fillers) ends up before retained material.
/// Tokens are compared by text.
Alignment align_pair(std::span<const Token> fluent, std::span<const Token> disfluent);

}  // namespace disfl
