#include "disfluency/render.hpp"

#include <fstream>
#include <stdexcept>

#include "disfluency/corpus.hpp"

namespace disfl {

std::string render_tts(const AnnotatedUtterance& utterance, const RenderStyle& style) {
  if (style.silent_pause_surface.empty()) throw std::invalid_argument("silent pause surface must not be empty");
  std::string out;
  auto put = [&](std::string_view piece) {
    if (!out.empty()) out += ' ';
    out += piece;
  };
  for (const Token& t : utterance.tokens) {
    switch (t.kind) {
      case TokenKind::SilentPause:
        put(style.silent_pause_surface);
        break;
      case TokenKind::FilledPause:
        if (style.keep_filler_tokens) put(t.text);
        break;
      case TokenKind::FalseStartFragment:
        put(style.fragment_hyphen ? std::string_view(t.text) : std::string_view(t.text).substr(0, t.text.size() - 1));
        break;
      case TokenKind::Word:
        put(t.text);
        break;
    }
  }
  return out;
}

void export_jsonl(std::span<const AnnotatedUtterance> utterances, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_jsonl(out, utterances);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace disfl
