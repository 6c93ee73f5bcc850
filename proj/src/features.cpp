#include "prestamo/features.hpp"

#include <unordered_set>

#include "prestamo/error.hpp"
#include "prestamo/utf8.hpp"

namespace prestamo {

namespace {

struct FamilyInfo {
  std::string_view key;
  std::string_view title;
};

constexpr std::array<FamilyInfo, kNumFamilies> kFamilyInfo = {{
    {"bias", "Bias"},
    {"token", "Token"},
    {"uppercase", "Uppercase"},
    {"titlecase", "Titlecase"},
    {"char_trigram", "Char trigram"},
    {"quotation", "Quotation"},
    {"suffix3", "Suffix"},
    {"pos", "POS tag"},
    {"shape", "Word shape"},
    {"embedding", "Word embedding"},
}};

char32_t closing_quote(char32_t open) {
  switch (open) {
    case U'\'': return U'\'';
    case U'"': return U'"';
    case 0x201C: return 0x201D;  // “ ”
    case 0x00AB: return 0x00BB;  // « »
    case 0x2018: return 0x2019;  // ‘ ’
    default: return 0;
  }
}

bool is_quote(char32_t cp) {
  return closing_quote(cp) != 0 || cp == 0x201D || cp == 0x00BB || cp == 0x2019;
}

// A single-code-point token, or 0.
char32_t single_code_point(std::string_view text) {
  const std::u32string cps = utf8::decode(text);
  return cps.size() == 1 ? cps[0] : 0;
}

std::string offset_prefix(int offset) {
  if (offset > 0) return "[+" + std::to_string(offset) + "]";
  return "[" + std::to_string(offset) + "]";
}

void append_token_attributes(AttributeVector& out, const std::string& prefix,
                             const Headline& headline, std::size_t t,
                             bool quoted, const FeatureConfig& config,
                             const EmbeddingTable* embeddings,
                             bool with_embedding) {
  const Token& token = headline.tokens[t];
  const std::string& text = token.text;
  if (config.has(FeatureFamily::kBias)) out.push_back({prefix + "bias", 1.0});
  if (config.has(FeatureFamily::kToken)) out.push_back({prefix + "w=" + text, 1.0});
  if (config.has(FeatureFamily::kUppercase) && is_uppercase_token(text)) {
    out.push_back({prefix + "upper", 1.0});
  }
  if (config.has(FeatureFamily::kTitlecase) && is_titlecase_token(text)) {
    out.push_back({prefix + "title", 1.0});
  }
  if (config.has(FeatureFamily::kCharTrigram)) {
    std::unordered_set<std::string> seen;
    for (std::string& gram : char_trigrams(text)) {
      if (seen.insert(gram).second) out.push_back({prefix + "tri=" + gram, 1.0});
    }
  }
  if (config.has(FeatureFamily::kQuotation) && quoted) {
    out.push_back({prefix + "quot", 1.0});
  }
  if (config.has(FeatureFamily::kSuffix3)) {
    const std::u32string cps = utf8::decode(text);
    const std::size_t from = cps.size() > 3 ? cps.size() - 3 : 0;
    out.push_back({prefix + "suf3=" + utf8::encode(cps.substr(from)), 1.0});
  }
  if (config.has(FeatureFamily::kPos) && token.pos) {
    out.push_back({prefix + "pos=" + *token.pos, 1.0});
  }
  if (config.has(FeatureFamily::kShape)) {
    out.push_back({prefix + "shape=" + word_shape(text), 1.0});
  }
  if (with_embedding && config.has(FeatureFamily::kEmbedding)) {
    const auto vec = embeddings->lookup(text);
    for (std::size_t i = 0; i < vec.size(); ++i) {
      out.push_back({prefix + "emb" + std::to_string(i),
                     vec[i] * config.embedding_scaling});
    }
  }
}

void require_embeddings(const FeatureConfig& config,
                        const EmbeddingTable* embeddings) {
  if (config.has(FeatureFamily::kEmbedding) && embeddings == nullptr) {
    throw ConfigError("embedding features are enabled but no embedding table is loaded");
  }
}

}  // namespace

std::string_view family_key(FeatureFamily family) {
  return kFamilyInfo[static_cast<std::size_t>(family)].key;
}

std::string_view family_title(FeatureFamily family) {
  return kFamilyInfo[static_cast<std::size_t>(family)].title;
}

std::optional<FeatureFamily> parse_family_key(std::string_view key) {
  for (FeatureFamily family : kAllFamilies) {
    if (family_key(family) == key) return family;
  }
  return std::nullopt;
}

std::optional<FeatureFamily> family_of_attribute(std::string_view name) {
  if (name.starts_with('[')) {
    const auto close = name.find(']');
    if (close != std::string_view::npos) name.remove_prefix(close + 1);
  }
  if (name == "bias") return FeatureFamily::kBias;
  if (name.starts_with("w=")) return FeatureFamily::kToken;
  if (name == "upper") return FeatureFamily::kUppercase;
  if (name == "title") return FeatureFamily::kTitlecase;
  if (name.starts_with("tri=")) return FeatureFamily::kCharTrigram;
  if (name == "quot") return FeatureFamily::kQuotation;
  if (name.starts_with("suf3=")) return FeatureFamily::kSuffix3;
  if (name.starts_with("pos=")) return FeatureFamily::kPos;
  if (name.starts_with("shape=")) return FeatureFamily::kShape;
  if (name.starts_with("emb")) return FeatureFamily::kEmbedding;
  return std::nullopt;
}

std::size_t FeatureConfig::enabled_count() const {
  std::size_t n = 0;
  for (bool on : enabled) n += on ? 1 : 0;
  return n;
}

void FeatureConfig::validate() const {
  if (window_radius < 0) throw ConfigError("window_radius must be >= 0");
  if (!(embedding_scaling > 0.0)) throw ConfigError("embedding_scaling must be > 0");
  if (enabled_count() == 0) throw ConfigError("at least one feature family must be enabled");
}

std::string word_shape(std::string_view text) {
  std::u32string shape;
  char32_t last = 0;
  int run = 0;
  for (char32_t cp : utf8::decode(text)) {
    char32_t mapped = cp;
    if (utf8::is_upper(cp)) {
      mapped = U'X';
    } else if (utf8::is_lower(cp)) {
      mapped = U'x';
    } else if (utf8::is_digit(cp)) {
      mapped = U'd';
    }
    run = (mapped == last) ? run + 1 : 1;
    last = mapped;
    if (run <= 4) shape.push_back(mapped);
  }
  return utf8::encode(shape);
}

std::vector<std::string> char_trigrams(std::string_view text) {
  std::u32string padded = U"^";
  padded += utf8::decode(text);
  padded += U"$";
  std::vector<std::string> grams;
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    grams.push_back(utf8::encode(std::u32string_view(padded).substr(i, 3)));
  }
  return grams;
}

std::vector<bool> quotation_flags(const Headline& headline) {
  std::vector<bool> flags(headline.tokens.size(), false);
  char32_t expected_close = 0;
  for (std::size_t t = 0; t < headline.tokens.size(); ++t) {
    const char32_t cp = single_code_point(headline.tokens[t].text);
    if (cp != 0 && is_quote(cp)) {
      if (expected_close == 0) {
        expected_close = closing_quote(cp);
      } else if (cp == expected_close) {
        expected_close = 0;
      }
      continue;
    }
    flags[t] = expected_close != 0;
  }
  return flags;
}

bool quotation_flag(const Headline& headline, std::size_t t) {
  return quotation_flags(headline).at(t);
}

bool is_uppercase_token(std::string_view text) {
  bool has_letter = false;
  for (char32_t cp : utf8::decode(text)) {
    if (utf8::is_lower(cp)) return false;
    if (utf8::is_upper(cp)) has_letter = true;
  }
  return has_letter;
}

bool is_titlecase_token(std::string_view text) {
  const std::u32string cps = utf8::decode(text);
  if (cps.empty() || !utf8::is_upper(cps[0])) return false;
  for (std::size_t i = 1; i < cps.size(); ++i) {
    if (utf8::is_upper(cps[i])) return false;
  }
  return true;
}

AttributeVector extract_token_attributes(const Headline& headline, std::size_t t,
                                         const FeatureConfig& config,
                                         const EmbeddingTable* embeddings) {
  require_embeddings(config, embeddings);
  if (t >= headline.tokens.size()) {
    throw ValidationError("token position " + std::to_string(t) + " out of range");
  }
  AttributeVector out;
  append_token_attributes(out, "", headline, t, quotation_flag(headline, t),
                          config, embeddings, true);
  return out;
}

std::vector<AttributeVector> windowed_attributes(const Headline& headline,
                                                 const FeatureConfig& config,
                                                 const EmbeddingTable* embeddings) {
  require_embeddings(config, embeddings);
  const auto n = static_cast<std::ptrdiff_t>(headline.tokens.size());
  const std::vector<bool> quoted = quotation_flags(headline);
  std::vector<AttributeVector> out(headline.tokens.size());
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    AttributeVector& attrs = out[static_cast<std::size_t>(t)];
    for (int o = -config.window_radius; o <= config.window_radius; ++o) {
      const std::string prefix = offset_prefix(o);
      const std::ptrdiff_t u = t + o;
      if (u < 0) {
        attrs.push_back({prefix + "BOS", 1.0});
      } else if (u >= n) {
        attrs.push_back({prefix + "EOS", 1.0});
      } else {
        const auto pos = static_cast<std::size_t>(u);
        append_token_attributes(attrs, prefix, headline, pos, quoted[pos],
                                config, embeddings, o == 0);
      }
    }
  }
  return out;
}

std::optional<std::uint32_t> FeatureIndex::add(std::string_view name) {
  const std::string key(name);
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  if (frozen_) return std::nullopt;
  const auto id = static_cast<std::uint32_t>(names_.size());
  names_.push_back(key);
  ids_.emplace(key, id);
  return id;
}

std::optional<std::uint32_t> FeatureIndex::find(std::string_view name) const {
  if (auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
  return std::nullopt;
}

FeatureIndex build_index(const Corpus& corpus, const FeatureConfig& config,
                         const EmbeddingTable* embeddings) {
  FeatureIndex index;
  for (const Headline& headline : corpus.headlines) {
    for (const AttributeVector& attrs :
         windowed_attributes(headline, config, embeddings)) {
      for (const Attribute& attr : attrs) index.add(attr.name);
    }
  }
  index.freeze();
  return index;
}

}  // namespace prestamo
