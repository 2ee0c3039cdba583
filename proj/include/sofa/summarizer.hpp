#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sofa/sax.hpp"
#include "sofa/sfa.hpp"

namespace sofa {

enum class SummarizerKind : std::uint8_t { sfa = 1, sax = 2 };

std::string to_string(SummarizerKind kind);
SummarizerKind parse_summarizer(const std::string& text);

/// Either an SFA or an iSAX model behind one projection/quantization surface,
/// so the index and query code stay summarization-agnostic.
class Summarizer {
 public:
  explicit Summarizer(SfaModel model) : model_(std::move(model)) {}
  explicit Summarizer(SaxModel model) : model_(std::move(model)) {}

  SummarizerKind kind() const {
    return std::holds_alternative<SfaModel>(model_) ? SummarizerKind::sfa : SummarizerKind::sax;
  }
  const SfaModel* sfa() const { return std::get_if<SfaModel>(&model_); }
  const SaxModel* sax() const { return std::get_if<SaxModel>(&model_); }

  const QuantizationTable& table() const {
    return std::visit([](const auto& m) -> const QuantizationTable& { return m.table(); }, model_);
  }
  std::size_t series_length() const {
    return std::visit([](const auto& m) { return m.series_length(); }, model_);
  }
  std::size_t word_length() const { return table().word_length(); }
  int bits() const { return table().bits(); }

  void project(std::span<const float> series, std::span<double> out) const {
    std::visit([&](const auto& m) { m.project(series, out); }, model_);
  }
  std::vector<double> project(std::span<const float> series) const {
    std::vector<double> out(word_length());
    project(series, out);
    return out;
  }

  /// Full-cardinality symbols of a projection.
  void encode(std::span<const double> projection, std::span<std::uint8_t> out) const {
    table().quantize(projection, out);
  }
  SymbolicWord transform(std::span<const float> series) const;

 private:
  std::variant<SfaModel, SaxModel> model_;
};

}  // namespace sofa
