#pragma once

// Output evaluation: corpus BLEU, embedding-matching precision/recall/F1,
// disfluency-rate comparison and two-sample t-tests.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "disfluency/annotation.hpp"

namespace disfl {

class EvalError : public DataError {
 public:
  enum class Kind { LengthMismatch, EmptyInput, DimensionMismatch, NonUnitVector, TooFewSamples, ZeroVariance };

  EvalError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

using TokenList = std::vector<std::string>;

struct BleuDetails {
  std::vector<double> precisions;  // orders 1..max_n that have hypothesis n-grams
  double brevity_penalty = 0.0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;
  double score = 0.0;
};

/// Corpus BLEU with one reference per hypothesis and no smoothing. Clipped
/// n-gram counts are pooled over the corpus. An order with no hypothesis
/// n-grams at all (every hypothesis shorter than n) is left out of the
/// geometric mean; a zero precision on any other order gives 0.
BleuDetails corpus_bleu_details(std::span<const TokenList> hypotheses, std::span<const TokenList> references,
                                std::size_t max_n = 4);
double corpus_bleu(std::span<const TokenList> hypotheses, std::span<const TokenList> references,
                   std::size_t max_n = 4);

struct BertScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

using Embedding = std::vector<double>;
inline constexpr double kUnitNormTolerance = 1e-6;

/// Greedy cosine matching of unit vectors for one sentence pair.
BertScore bert_score_from_embeddings(std::span<const Embedding> hypothesis, std::span<const Embedding> reference);

/// Mean precision and recall over sentence pairs; f1 is their harmonic mean.
BertScore corpus_bert_score(std::span<const std::vector<Embedding>> hypotheses,
                            std::span<const std::vector<Embedding>> references);

/// Blank-line separated blocks of whitespace-separated decimal vectors.
std::vector<std::vector<Embedding>> read_embeddings(std::istream& in);

struct EvalReport {
  double bleu = 0.0;
  std::optional<BertScore> bert;
  double rate_generated = 0.0;
  double rate_reference = 0.0;
  double rate_delta = 0.0;  // rate_generated - rate_reference
};

/// Micro disfluency rate of `generated` against a reference rate; fills the
/// rate fields only.
EvalReport rate_report(std::span<const AnnotatedUtterance> generated, double reference_rate);

nlohmann::ordered_json report_to_json(const EvalReport& report);

enum class TTestMethod { StudentT, WelchT };

struct TestResult {
  double statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
  TTestMethod method = TTestMethod::StudentT;
};

/// Two-sided two-sample t-test; pooled variance unless WelchT is requested.
TestResult two_sample_ttest(std::span<const double> a, std::span<const double> b,
                            TTestMethod method = TTestMethod::StudentT);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

/// CDF of Student's t distribution with `dof` degrees of freedom.
double students_t_cdf(double t, double dof);

}  // namespace disfl
