#include "sofa/summarizer.hpp"

#include <stdexcept>

namespace sofa {

std::string to_string(SummarizerKind kind) { return kind == SummarizerKind::sfa ? "sfa" : "sax"; }

SummarizerKind parse_summarizer(const std::string& text) {
  if (text == "sfa") return SummarizerKind::sfa;
  if (text == "sax" || text == "isax") return SummarizerKind::sax;
  throw std::invalid_argument("unknown summarizer '" + text + "' (expected sfa or sax)");
}

SymbolicWord Summarizer::transform(std::span<const float> series) const {
  SymbolicWord word;
  word.symbols.resize(word_length());
  word.cardinality.assign(word_length(), static_cast<std::uint8_t>(bits()));
  encode(project(series), word.symbols);
  return word;
}

}  // namespace sofa
