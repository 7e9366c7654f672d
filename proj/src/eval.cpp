#include "disfluency/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

namespace disfl {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const TokenList& tokens, std::size_t n) {
  NgramCounts out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++out[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return out;
}

void check_embeddings(std::span<const Embedding> vectors, std::size_t& dim, const char* side) {
  if (vectors.empty()) throw EvalError(EvalError::Kind::EmptyInput, std::string(side) + " has no vectors");
  for (const auto& v : vectors) {
    if (dim == 0) dim = v.size();
    if (v.empty() || v.size() != dim) {
      throw EvalError(EvalError::Kind::DimensionMismatch, std::string(side) + " vector dimension differs");
    }
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (std::abs(norm - 1.0) > kUnitNormTolerance) {
      throw EvalError(EvalError::Kind::NonUnitVector, std::string(side) + " vector has norm " + std::to_string(norm));
    }
  }
}

double greedy_side(std::span<const Embedding> from, std::span<const Embedding> to) {
  double sum = 0.0;
  for (const auto& x : from) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& y : to) best = std::max(best, std::inner_product(x.begin(), x.end(), y.begin(), 0.0));
    sum += best;
  }
  return sum / static_cast<double>(from.size());
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

double mean(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs, double m) {
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

BleuDetails corpus_bleu_details(std::span<const TokenList> hypotheses, std::span<const TokenList> references,
                                std::size_t max_n) {
  if (hypotheses.size() != references.size()) {
    throw EvalError(EvalError::Kind::LengthMismatch, "BLEU: " + std::to_string(hypotheses.size()) +
                                                         " hypotheses but " + std::to_string(references.size()) +
                                                         " references");
  }
  if (hypotheses.empty() || max_n == 0) throw EvalError(EvalError::Kind::EmptyInput, "BLEU: no sentences");

  BleuDetails out;
  std::vector<std::size_t> matched(max_n, 0);
  std::vector<std::size_t> total(max_n, 0);
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    out.hypothesis_length += hypotheses[s].size();
    out.reference_length += references[s].size();
    for (std::size_t n = 1; n <= max_n; ++n) {
      const auto hyp = count_ngrams(hypotheses[s], n);
      const auto ref = count_ngrams(references[s], n);
      for (const auto& [gram, count] : hyp) {
        total[n - 1] += count;
        const auto it = ref.find(gram);
        if (it != ref.end()) matched[n - 1] += std::min(count, it->second);
      }
    }
  }
  if (out.hypothesis_length == 0) return out;

  out.brevity_penalty =
      std::exp(std::min(0.0, 1.0 - static_cast<double>(out.reference_length) /
                                       static_cast<double>(out.hypothesis_length)));
  double log_sum = 0.0;
  for (std::size_t n = 0; n < max_n; ++n) {
    if (total[n] == 0) continue;
    const double p = static_cast<double>(matched[n]) / static_cast<double>(total[n]);
    out.precisions.push_back(p);
    if (p == 0.0) return out;
    log_sum += std::log(p);
  }
  out.score = out.brevity_penalty * std::exp(log_sum / static_cast<double>(out.precisions.size()));
  return out;
}

double corpus_bleu(std::span<const TokenList> hypotheses, std::span<const TokenList> references, std::size_t max_n) {
  return corpus_bleu_details(hypotheses, references, max_n).score;
}

BertScore bert_score_from_embeddings(std::span<const Embedding> hypothesis, std::span<const Embedding> reference) {
  std::size_t dim = 0;
  check_embeddings(hypothesis, dim, "hypothesis");
  check_embeddings(reference, dim, "reference");
  BertScore s;
  s.precision = greedy_side(hypothesis, reference);
  s.recall = greedy_side(reference, hypothesis);
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

BertScore corpus_bert_score(std::span<const std::vector<Embedding>> hypotheses,
                            std::span<const std::vector<Embedding>> references) {
  if (hypotheses.size() != references.size()) {
    throw EvalError(EvalError::Kind::LengthMismatch, "embedding files hold different sentence counts");
  }
  if (hypotheses.empty()) throw EvalError(EvalError::Kind::EmptyInput, "no embedded sentences");
  BertScore out;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto s = bert_score_from_embeddings(hypotheses[i], references[i]);
    out.precision += s.precision;
    out.recall += s.recall;
  }
  out.precision /= static_cast<double>(hypotheses.size());
  out.recall /= static_cast<double>(hypotheses.size());
  out.f1 = harmonic(out.precision, out.recall);
  return out;
}

std::vector<std::vector<Embedding>> read_embeddings(std::istream& in) {
  std::vector<std::vector<Embedding>> out;
  std::vector<Embedding> block;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    Embedding v;
    std::string field;
    while (fields >> field) {
      std::size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != field.size() || !std::isfinite(x)) throw FormatError(line_no, "not a decimal: '" + field + "'");
      v.push_back(x);
    }
    if (v.empty()) {
      if (!block.empty()) out.push_back(std::move(block));
      block.clear();
    } else {
      block.push_back(std::move(v));
    }
  }
  if (!block.empty()) out.push_back(std::move(block));
  return out;
}

EvalReport rate_report(std::span<const AnnotatedUtterance> generated, double reference_rate) {
  std::size_t disfluent = 0;
  std::size_t total = 0;
  for (const auto& u : generated) {
    disfluent += disfluent_token_count(u);
    total += u.size();
  }
  if (total == 0) throw EvalError(EvalError::Kind::EmptyInput, "no generated tokens");
  EvalReport r;
  r.rate_generated = static_cast<double>(disfluent) / static_cast<double>(total);
  r.rate_reference = reference_rate;
  r.rate_delta = r.rate_generated - r.rate_reference;
  return r;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json doc;
  doc["bleu"] = report.bleu;
  if (report.bert) {
    doc["bert_p"] = report.bert->precision;
    doc["bert_r"] = report.bert->recall;
    doc["bert_f1"] = report.bert->f1;
  }
  doc["rate_generated"] = report.rate_generated;
  doc["rate_reference"] = report.rate_reference;
  doc["rate_delta"] = report.rate_delta;
  return doc;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double students_t_cdf(double t, double dof) {
  const double tail = 0.5 * regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
  return t >= 0.0 ? 1.0 - tail : tail;
}

TestResult two_sample_ttest(std::span<const double> a, std::span<const double> b, TTestMethod method) {
  if (a.size() < 2 || b.size() < 2) {
    throw EvalError(EvalError::Kind::TooFewSamples, "t-test needs at least two observations per sample");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean(a);
  const double mb = mean(b);
  const double va = sample_variance(a, ma);
  const double vb = sample_variance(b, mb);

  TestResult r;
  r.method = method;
  double se2 = 0.0;
  if (method == TTestMethod::StudentT) {
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    se2 = pooled * (1.0 / na + 1.0 / nb);
    r.degrees_of_freedom = na + nb - 2.0;
  } else {
    const double qa = va / na;
    const double qb = vb / nb;
    se2 = qa + qb;
    r.degrees_of_freedom = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  }
  if (!(se2 > 0.0)) throw EvalError(EvalError::Kind::ZeroVariance, "both samples have zero variance");
  r.statistic = (ma - mb) / std::sqrt(se2);
  const double x = r.degrees_of_freedom / (r.degrees_of_freedom + r.statistic * r.statistic);
  r.p_value = std::clamp(regularized_incomplete_beta(r.degrees_of_freedom / 2.0, 0.5, x), 0.0, 1.0);
  return r;
}

}  // namespace disfl
