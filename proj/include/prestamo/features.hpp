#ifndef PRESTAMO_FEATURES_HPP_
#define PRESTAMO_FEATURES_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "prestamo/corpus.hpp"
#include "prestamo/embeddings.hpp"

namespace prestamo {

enum class FeatureFamily : std::uint8_t {
  kBias,
  kToken,
  kUppercase,
  kTitlecase,
  kCharTrigram,
  kQuotation,
  kSuffix3,
  kPos,
  kShape,
  kEmbedding,
};

inline constexpr std::size_t kNumFamilies = 10;

inline constexpr std::array<FeatureFamily, kNumFamilies> kAllFamilies = {
    FeatureFamily::kBias,        FeatureFamily::kToken,
    FeatureFamily::kUppercase,   FeatureFamily::kTitlecase,
    FeatureFamily::kCharTrigram, FeatureFamily::kQuotation,
    FeatureFamily::kSuffix3,     FeatureFamily::kPos,
    FeatureFamily::kShape,       FeatureFamily::kEmbedding,
};

/// Configuration key, e.g. "char_trigram".
std::string_view family_key(FeatureFamily family);
std::optional<FeatureFamily> parse_family_key(std::string_view key);
/// Human-readable row label for ablation tables, e.g. "Char trigram".
std::string_view family_title(FeatureFamily family);

/// Family that produced an attribute name (with or without its "[o]"
/// offset prefix). Boundary attributes (BOS/EOS) belong to no family.
std::optional<FeatureFamily> family_of_attribute(std::string_view name);

struct FeatureConfig {
  std::array<bool, kNumFamilies> enabled{true, true, true, true, true,
                                         true, true, true, true, true};
  int window_radius = 2;
  double embedding_scaling = 1.0;

  bool has(FeatureFamily family) const {
    return enabled[static_cast<std::size_t>(family)];
  }
  void set(FeatureFamily family, bool on) {
    enabled[static_cast<std::size_t>(family)] = on;
  }
  FeatureConfig without(FeatureFamily family) const {
    FeatureConfig copy = *this;
    copy.set(family, false);
    return copy;
  }
  std::size_t enabled_count() const;

  /// Throws ConfigError when radius < 0, scaling <= 0 or nothing is enabled.
  void validate() const;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

struct Attribute {
  std::string name;
  double value = 1.0;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

using AttributeVector = std::vector<Attribute>;

/// X for uppercase, x for lowercase, d for digits, anything else verbatim;
/// runs of one output character are cut at 4.
std::string word_shape(std::string_view text);

/// Windows of 3 code points over "^" + text + "$".
std::vector<std::string> char_trigrams(std::string_view text);

/// Per-token "inside quotes" flags. Opening quotes ' " “ « ‘ pair with
/// ' " ” » ’ respectively; an unclosed quote runs to the end of the
/// headline; the quote tokens themselves are false.
std::vector<bool> quotation_flags(const Headline& headline);
bool quotation_flag(const Headline& headline, std::size_t t);

bool is_uppercase_token(std::string_view text);
bool is_titlecase_token(std::string_view text);

/// Attributes of token t without offset prefix. Names are unique; repeated
/// trigrams are emitted once.
AttributeVector extract_token_attributes(const Headline& headline, std::size_t t,
                                         const FeatureConfig& config,
                                         const EmbeddingTable* embeddings);

/// One vector per position: the union of token attributes at offsets
/// -r..+r, prefixed "[o]" ("[-1]w=big", "[0]bias", "[+2]EOS"). Offsets
/// outside the headline contribute "[o]BOS"/"[o]EOS"; embeddings appear at
/// offset 0 only.
std::vector<AttributeVector> windowed_attributes(const Headline& headline,
                                                 const FeatureConfig& config,
                                                 const EmbeddingTable* embeddings);

/// Dense attribute-name <-> id mapping. Once frozen, unknown names stay
/// unknown.
class FeatureIndex {
 public:
  /// Returns the id, assigning the next one if the name is new and the
  /// index is not frozen.
  std::optional<std::uint32_t> add(std::string_view name);
  std::optional<std::uint32_t> find(std::string_view name) const;
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  friend bool operator==(const FeatureIndex& a, const FeatureIndex& b) {
    return a.names_ == b.names_ && a.frozen_ == b.frozen_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  bool frozen_ = false;
};

/// Assigns ids in first-seen order over the corpus and freezes the index.
FeatureIndex build_index(const Corpus& corpus, const FeatureConfig& config,
                         const EmbeddingTable* embeddings);

}  // namespace prestamo

#endif  // PRESTAMO_FEATURES_HPP_
