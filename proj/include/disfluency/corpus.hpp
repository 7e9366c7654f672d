#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "disfluency/alignment.hpp"
#include "disfluency/annotation.hpp"

namespace disfl {

enum class CorpusFormat { Markup, Bio, Jsonl };

std::optional<CorpusFormat> corpus_format_from_string(std::string_view name);

/// A fluent utterance, its disfluent realization and the alignment between them.
struct ParallelPair {
  std::vector<Token> fluent;
  AnnotatedUtterance disfluent;
  Alignment alignment;
};

/// Table-1 style corpus statistics. Rates are fractions in [0, 1].
struct CorpusStats {
  std::size_t n_sentences = 0;
  double avg_tokens_fluent = 0.0;
  double avg_tokens_disfluent = 0.0;
  std::size_t total_fluent_tokens = 0;
  std::size_t total_disfluent_tokens = 0;
  double rate_micro = 0.0;  // sum of disfluent-span tokens / sum of disfluent-utterance tokens
  double rate_macro = 0.0;  // mean of per-utterance rates
};

class CorpusError : public DataError {
 public:
  enum class Kind { EmptyCorpus, BadFraction };

  CorpusError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// --- readers / writers ---------------------------------------------------

std::vector<AnnotatedUtterance> read_markup(std::istream& in);
std::vector<AnnotatedUtterance> read_bio(std::istream& in);
std::vector<AnnotatedUtterance> read_jsonl(std::istream& in);

/// Throws IoError if the file cannot be opened, FormatError on a bad record.
std::vector<AnnotatedUtterance> load_corpus(const std::filesystem::path& path, CorpusFormat format);

void write_markup(std::ostream& out, std::span<const AnnotatedUtterance> utterances);
void write_bio(std::ostream& out, std::span<const AnnotatedUtterance> utterances);
void write_jsonl(std::ostream& out, std::span<const AnnotatedUtterance> utterances);

/// One JSONL pair record, without the trailing newline:
/// {"fluent":[...],"disfluent":[...],"spans":[[kind,start,end,depth],...]}
std::string to_jsonl_record(const AnnotatedUtterance& utterance);
AnnotatedUtterance from_jsonl_record(std::string_view line);

// --- pairs, statistics and splits ---------------------------------------

struct PairSet {
  std::vector<ParallelPair> pairs;
  std::size_t dropped_empty = 0;  // utterances that strip to zero tokens
};

PairSet build_pairs(std::span<const AnnotatedUtterance> corpus);

/// Throws CorpusError(EmptyCorpus) for an empty input.
CorpusStats compute_stats(std::span<const ParallelPair> pairs);

/// Indices of the test partition (ascending). |test| = round(n * fraction).
std::vector<std::size_t> test_indices(std::size_t n, double test_fraction, std::uint64_t seed);

/// Deterministic train/test split; both parts keep the input order.
template <class T>
std::pair<std::vector<T>, std::vector<T>> split_corpus(std::span<const T> corpus, double test_fraction,
                                                       std::uint64_t seed) {
  const auto test = test_indices(corpus.size(), test_fraction, seed);
  std::pair<std::vector<T>, std::vector<T>> out;
  std::size_t next = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (next < test.size() && test[next] == i) {
      out.second.push_back(corpus[i]);
      ++next;
    } else {
      out.first.push_back(corpus[i]);
    }
  }
  return out;
}

}  // namespace disfl
