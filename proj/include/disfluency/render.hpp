#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "disfluency/annotation.hpp"

namespace disfl {

/// Surface conventions for text handed to a TTS engine.
struct RenderStyle {
  std::string silent_pause_surface = "...";
  bool keep_filler_tokens = true;
  bool fragment_hyphen = true;  // "b- birthday" vs "b birthday"
};

/// Tokens joined by single spaces with pauses replaced by the style's
/// surface. Word tokens are never dropped or reordered.
std::string render_tts(const AnnotatedUtterance& utterance, const RenderStyle& style = {});

/// Writes the JSONL pair contract (one record per utterance). Throws IoError.
void export_jsonl(std::span<const AnnotatedUtterance> utterances, const std::filesystem::path& path);

}  // namespace disfl
