#include "disfluency/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>

#include "disfluency/random.hpp"

namespace disfl {

namespace {

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

std::string chomp(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> texts(std::span<const Token> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

}  // namespace

std::optional<CorpusFormat> corpus_format_from_string(std::string_view name) {
  if (name == "markup") return CorpusFormat::Markup;
  if (name == "bio") return CorpusFormat::Bio;
  if (name == "jsonl") return CorpusFormat::Jsonl;
  return std::nullopt;
}

std::vector<AnnotatedUtterance> read_markup(std::istream& in) {
  std::vector<AnnotatedUtterance> out;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    line = chomp(std::move(line));
    if (blank(line)) continue;
    try {
      out.push_back(parse_annotated(line));
    } catch (const DataError& e) {
      throw FormatError(line_no, e.what());
    }
  }
  return out;
}

std::vector<AnnotatedUtterance> read_bio(std::istream& in) {
  std::vector<AnnotatedUtterance> out;
  std::vector<std::string> words;
  std::vector<BioTag> tags;
  std::size_t first_line = 0;

  auto flush = [&] {
    if (words.empty()) return;
    std::vector<Token> tokens;
    tokens.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      tokens.push_back(make_token(words[i], tags[i].label == BioLabel::FL));
    }
    try {
      out.push_back(from_bio(std::move(tokens), tags));
    } catch (const DataError& e) {
      throw FormatError(first_line, e.what());
    }
    words.clear();
    tags.clear();
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = chomp(std::move(line));
    if (blank(line)) {
      flush();
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || line.find('\t', tab + 1) != std::string::npos) {
      throw FormatError(line_no, "expected 'token<TAB>tag'");
    }
    const auto tag = BioTag::parse(std::string_view(line).substr(tab + 1));
    if (!tag) throw FormatError(line_no, "unknown BIO tag '" + line.substr(tab + 1) + "'");
    if (words.empty()) first_line = line_no;
    words.push_back(line.substr(0, tab));
    tags.push_back(*tag);
  }
  flush();
  return out;
}

std::string to_jsonl_record(const AnnotatedUtterance& u) {
  nlohmann::ordered_json record;
  record["fluent"] = texts(strip_disfluencies(u));
  record["disfluent"] = texts(u.tokens);
  auto spans = nlohmann::ordered_json::array();
  for (const auto& s : u.spans) {
    spans.push_back({std::string(to_string(s.kind)), s.start, s.end, s.depth});
  }
  record["spans"] = std::move(spans);
  return record.dump();
}

AnnotatedUtterance from_jsonl_record(std::string_view line) {
  const auto record = nlohmann::json::parse(line, nullptr, false);
  if (record.is_discarded() || !record.is_object()) throw DataError("not a JSON object");

  auto strings = [&](const char* field) {
    const auto it = record.find(field);
    if (it == record.end() || !it->is_array()) throw DataError(std::string("field '") + field + "' must be an array");
    std::vector<std::string> out;
    for (const auto& v : *it) {
      if (!v.is_string()) throw DataError(std::string("field '") + field + "' must hold strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  };
  const auto fluent = strings("fluent");
  const auto disfluent = strings("disfluent");

  const auto spans_it = record.find("spans");
  if (spans_it == record.end() || !spans_it->is_array()) throw DataError("field 'spans' must be an array");
  std::vector<DisfluencySpan> spans;
  for (const auto& s : *spans_it) {
    if (!s.is_array() || s.size() != 4 || !s[0].is_string() || !s[1].is_number_unsigned() ||
        !s[2].is_number_unsigned() || !s[3].is_number_unsigned()) {
      throw DataError("span must be [kind, start, end, depth] with non-negative integers");
    }
    const auto kind = span_kind_from_string(s[0].get<std::string>());
    if (!kind) throw DataError("unknown span kind '" + s[0].get<std::string>() + "'");
    spans.push_back({*kind, s[1].get<std::size_t>(), s[2].get<std::size_t>(), s[3].get<int>()});
  }

  AnnotatedUtterance u = utterance_from_strings(disfluent, std::move(spans));
  if (texts(strip_disfluencies(u)) != fluent) {
    throw DataError("'fluent' does not equal the stripped disfluent utterance");
  }
  return u;
}

std::vector<AnnotatedUtterance> read_jsonl(std::istream& in) {
  std::vector<AnnotatedUtterance> out;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    line = chomp(std::move(line));
    if (blank(line)) continue;
    try {
      out.push_back(from_jsonl_record(line));
    } catch (const DataError& e) {
      throw FormatError(line_no, e.what());
    }
  }
  return out;
}

std::vector<AnnotatedUtterance> load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  switch (format) {
    case CorpusFormat::Markup:
      return read_markup(in);
    case CorpusFormat::Bio:
      return read_bio(in);
    case CorpusFormat::Jsonl:
      break;
  }
  return read_jsonl(in);
}

void write_markup(std::ostream& out, std::span<const AnnotatedUtterance> utterances) {
  for (const auto& u : utterances) out << serialize(u) << '\n';
}

void write_bio(std::ostream& out, std::span<const AnnotatedUtterance> utterances) {
  bool first = true;
  for (const auto& u : utterances) {
    if (!first) out << '\n';
    first = false;
    const auto tags = to_bio(u);
    for (std::size_t i = 0; i < u.tokens.size(); ++i) out << u.tokens[i].text << '\t' << tags[i].str() << '\n';
  }
}

void write_jsonl(std::ostream& out, std::span<const AnnotatedUtterance> utterances) {
  for (const auto& u : utterances) out << to_jsonl_record(u) << '\n';
}

PairSet build_pairs(std::span<const AnnotatedUtterance> corpus) {
  PairSet out;
  out.pairs.reserve(corpus.size());
  for (const auto& u : corpus) {
    auto fluent = strip_disfluencies(u);
    if (fluent.empty()) {
      ++out.dropped_empty;
      continue;
    }
    Alignment alignment = align_pair(fluent, u.tokens);
    out.pairs.push_back({std::move(fluent), u, std::move(alignment)});
  }
  return out;
}

CorpusStats compute_stats(std::span<const ParallelPair> pairs) {
  if (pairs.empty()) throw CorpusError(CorpusError::Kind::EmptyCorpus, "no pairs to summarize");
  CorpusStats s;
  s.n_sentences = pairs.size();
  std::size_t disfluent_span_tokens = 0;
  double rate_sum = 0.0;
  for (const auto& p : pairs) {
    s.total_fluent_tokens += p.fluent.size();
    s.total_disfluent_tokens += p.disfluent.size();
    disfluent_span_tokens += disfluent_token_count(p.disfluent);
    rate_sum += disfluency_rate(p.disfluent);
  }
  const auto n = static_cast<double>(s.n_sentences);
  s.avg_tokens_fluent = static_cast<double>(s.total_fluent_tokens) / n;
  s.avg_tokens_disfluent = static_cast<double>(s.total_disfluent_tokens) / n;
  s.rate_micro = static_cast<double>(disfluent_span_tokens) / static_cast<double>(s.total_disfluent_tokens);
  s.rate_macro = rate_sum / n;
  return s;
}

std::vector<std::size_t> test_indices(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw CorpusError(CorpusError::Kind::BadFraction, "test fraction must lie strictly between 0 and 1");
  }
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first n_test slots are the sample.
  Rng rng(stream_seed(seed, 0));
  for (std::size_t i = 0; i < n_test; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
  }
  order.resize(n_test);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace disfl
