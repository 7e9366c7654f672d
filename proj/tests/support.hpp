#pragma once

// Shared helpers for the unit and acceptance tests.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>
#include <string>
#include <vector>

#include "disfluency/annotation.hpp"
#include "disfluency/random.hpp"

namespace disfl::testing {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(DISFL_FIXTURES) / rel; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void spit(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

inline std::vector<std::string> words(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("disfl-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Synthetic vocabulary: no filler words, no fragments, no markup.
inline std::vector<std::string> synthetic_vocabulary(std::size_t size = 400) {
  static const char* const kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z"};
  static const char* const kVowels[] = {"a", "e", "i", "o", "u"};
  std::vector<std::string> out;
  for (std::size_t i = 0; out.size() < size; ++i) {
    std::string w;
    std::size_t x = i;
    for (int syl = 0; syl < 3; ++syl) {
      w += kOnsets[x % 15];
      x /= 15;
      w += kVowels[x % 5];
      x /= 5;
    }
    if (!is_filler_word(w)) out.push_back(w);
  }
  return out;
}

/// Random fluent utterance of [min_len, max_len] tokens. With
/// `distinct_neighbours`, no two adjacent tokens are equal.
inline std::vector<Token> random_fluent(Rng& rng, const std::vector<std::string>& vocab, std::size_t min_len,
                                        std::size_t max_len, bool distinct_neighbours = false) {
  const std::size_t n = min_len + rng.below(max_len - min_len + 1);
  std::vector<Token> out;
  while (out.size() < n) {
    auto w = vocab[rng.below(vocab.size())];
    if (distinct_neighbours && !out.empty() && out.back().text == w) continue;
    out.push_back(Token::word(std::move(w)));
  }
  return out;
}

}  // namespace disfl::testing
