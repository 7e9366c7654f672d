#include "disfluency/alignment.hpp"

#include <string>

namespace disfl {

Alignment align_pair(std::span<const Token> fluent, std::span<const Token> disfluent) {
  Alignment out;
  out.map.resize(fluent.size());
  // Matching greedily from the right yields the componentwise-latest embedding.
  std::size_t j = disfluent.size();
  for (std::size_t i = fluent.size(); i-- > 0;) {
    while (j > 0 && disfluent[j - 1].text != fluent[i].text) --j;
    if (j == 0) {
      throw NonMonotonicPair("fluent token " + std::to_string(i) + " (\"" + fluent[i].text +
                             "\") has no monotone match in the disfluent utterance");
    }
    out.map[i] = --j;
  }
  return out;
}

}  // namespace disfl
