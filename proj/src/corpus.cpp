#include "prestamo/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "prestamo/error.hpp"
#include "prestamo/format.hpp"
#include "prestamo/utf8.hpp"

namespace prestamo {

namespace {

constexpr std::array<std::string_view, 5> kTagNames = {
    "O", "B-ENG", "I-ENG", "B-OTHER", "I-OTHER"};

bool is_split_punctuation(char32_t cp) {
  switch (cp) {
    case U'.': case U',': case U';': case U':': case U'!': case U'?':
    case U'"': case U'\'': case U'(': case U')': case U'[': case U']':
    case 0x00A1:  // ¡
    case 0x00BF:  // ¿
    case 0x00AB:  // «
    case 0x00BB:  // »
    case 0x201C:  // “
    case 0x201D:  // ”
    case 0x2018:  // ‘
    case 0x2019:  // ’
    case 0x2014:  // —
    case 0x2026:  // …
      return true;
    default:
      return false;
  }
}

bool is_apostrophe(char32_t cp) { return cp == U'\'' || cp == 0x2019; }

std::string describe(const LabeledSpan& span) {
  std::ostringstream os;
  os << "(" << span.start << "," << span.end << "," << label_name(span.label)
     << ")";
  return os.str();
}

bool is_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  return true;
}

bool is_clean_field(std::string_view text) {
  if (text.empty() || trim(text) != text) return false;
  return std::none_of(text.begin(), text.end(), [](char c) {
    return c == '\n' || c == '\r' || c == '\t';
  });
}

[[noreturn]] void fail_at(std::size_t line, const std::string& message) {
  throw ValidationError("line " + std::to_string(line) + ": " + message);
}

}  // namespace

std::string_view label_name(Label label) {
  return label == Label::kEng ? "ENG" : "OTHER";
}

std::optional<Label> parse_label(std::string_view name) {
  if (name == "ENG") return Label::kEng;
  if (name == "OTHER") return Label::kOther;
  return std::nullopt;
}

std::string_view tag_name(Tag tag) {
  return kTagNames[static_cast<std::size_t>(tag)];
}

Tag parse_tag(std::string_view name) {
  for (std::size_t i = 0; i < kTagNames.size(); ++i) {
    if (kTagNames[i] == name) return static_cast<Tag>(i);
  }
  throw ValidationError("unknown tag '" + std::string(name) + "'");
}

bool is_begin(Tag tag) { return tag == Tag::kBEng || tag == Tag::kBOther; }
bool is_inside(Tag tag) { return tag == Tag::kIEng || tag == Tag::kIOther; }

Label tag_label(Tag tag) {
  return (tag == Tag::kBOther || tag == Tag::kIOther) ? Label::kOther
                                                      : Label::kEng;
}

Tag begin_tag(Label label) {
  return label == Label::kEng ? Tag::kBEng : Tag::kBOther;
}

Tag inside_tag(Label label) {
  return label == Label::kEng ? Tag::kIEng : Tag::kIOther;
}

TagAlphabet TagAlphabet::full() {
  return TagAlphabet({Tag::kO, Tag::kBEng, Tag::kIEng, Tag::kBOther,
                      Tag::kIOther});
}

TagAlphabet TagAlphabet::ignore_other() {
  return TagAlphabet({Tag::kO, Tag::kBEng, Tag::kIEng});
}

std::optional<std::size_t> TagAlphabet::index(Tag tag) const {
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    if (tags_[i] == tag) return i;
  }
  return std::nullopt;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  for (const std::string& chunk : utf8::split_whitespace(text)) {
    const std::u32string cps = utf8::decode(chunk);
    std::u32string word;
    for (std::size_t i = 0; i < cps.size(); ++i) {
      const char32_t cp = cps[i];
      const bool internal_apostrophe =
          is_apostrophe(cp) && i > 0 && i + 1 < cps.size() &&
          utf8::is_alnum(cps[i - 1]) && utf8::is_alnum(cps[i + 1]);
      if (is_split_punctuation(cp) && !internal_apostrophe) {
        if (!word.empty()) {
          tokens.push_back({utf8::encode(word), std::nullopt});
          word.clear();
        }
        tokens.push_back({utf8::encode(cp), std::nullopt});
      } else {
        word.push_back(cp);
      }
    }
    if (!word.empty()) tokens.push_back({utf8::encode(word), std::nullopt});
  }
  return tokens;
}

void validate_spans(std::span<const LabeledSpan> spans, std::size_t length) {
  std::size_t previous_end = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const LabeledSpan& span = spans[i];
    if (span.start >= span.end || span.end > length) {
      throw ValidationError("span " + describe(span) +
                            " is out of range for length " +
                            std::to_string(length));
    }
    if (i > 0 && span.start < previous_end) {
      throw ValidationError("span " + describe(span) +
                            " overlaps or precedes span " +
                            describe(spans[i - 1]));
    }
    previous_end = span.end;
  }
}

std::vector<Tag> spans_to_bio(std::span<const LabeledSpan> spans,
                              std::size_t length) {
  validate_spans(spans, length);
  std::vector<Tag> tags(length, Tag::kO);
  for (const LabeledSpan& span : spans) {
    tags[span.start] = begin_tag(span.label);
    for (std::size_t t = span.start + 1; t < span.end; ++t) {
      tags[t] = inside_tag(span.label);
    }
  }
  return tags;
}

std::vector<LabeledSpan> bio_to_spans(std::span<const Tag> tags) {
  std::vector<LabeledSpan> spans;
  std::optional<LabeledSpan> open;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    const Tag tag = tags[t];
    const bool continues = is_inside(tag) && open.has_value() &&
                           open->label == tag_label(tag);
    if (continues) continue;
    if (open) {
      open->end = t;
      spans.push_back(*open);
      open.reset();
    }
    if (tag != Tag::kO) open = LabeledSpan{t, t, tag_label(tag)};
  }
  if (open) {
    open->end = tags.size();
    spans.push_back(*open);
  }
  return spans;
}

void validate_headline(const Headline& headline) {
  if (!is_clean_field(headline.id)) {
    throw ValidationError("headline id '" + headline.id + "' is empty or has surrounding whitespace");
  }
  const std::string where = "headline " + headline.id + ": ";
  if (headline.tokens.empty()) throw ValidationError(where + "no tokens");
  if (headline.date && !is_iso_date(*headline.date)) {
    throw ValidationError(where + "date '" + *headline.date + "' is not YYYY-MM-DD");
  }
  if (headline.section && !is_clean_field(*headline.section)) {
    throw ValidationError(where + "malformed section");
  }
  for (const Token& token : headline.tokens) {
    if (token.text.empty() || utf8::contains_space(token.text)) {
      throw ValidationError(where + "token '" + token.text + "' is empty or contains whitespace");
    }
    if (token.pos && (token.pos->empty() || utf8::contains_space(*token.pos))) {
      throw ValidationError(where + "malformed POS '" + *token.pos + "'");
    }
  }
  try {
    validate_spans(headline.gold, headline.tokens.size());
    validate_spans(headline.predicted, headline.tokens.size());
  } catch (const ValidationError& e) {
    throw ValidationError(where + e.what());
  }
}

void validate_corpus(const Corpus& corpus) {
  std::set<std::string_view> ids;
  for (const Headline& headline : corpus.headlines) {
    validate_headline(headline);
    if (!ids.insert(headline.id).second) {
      throw ValidationError("duplicate headline id '" + headline.id + "'");
    }
  }
}

Corpus read_corpus(std::istream& in, std::string name) {
  Corpus corpus;
  corpus.name = std::move(name);
  std::set<std::string> ids;

  Headline current;
  std::vector<Tag> tags;
  std::size_t headline_line = 0;
  bool in_tokens = false;

  auto finish = [&]() {
    if (!in_tokens) return;
    if (current.id.empty()) {
      current.id = std::to_string(corpus.headlines.size() + 1);
    }
    if (!ids.insert(current.id).second) {
      fail_at(headline_line, "duplicate headline id '" + current.id + "'");
    }
    current.gold = bio_to_spans(tags);
    corpus.headlines.push_back(std::move(current));
    current = Headline{};
    tags.clear();
    in_tokens = false;
    headline_line = 0;
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);

    if (trim(line).empty()) {
      finish();
      continue;
    }
    if (line.front() == '#' && line.find('\t') == std::string_view::npos) {
      if (in_tokens) fail_at(line_no, "comment inside a headline");
      if (headline_line == 0) headline_line = line_no;
      const std::string_view body = line.substr(1);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string_view key = trim(body.substr(0, eq));
      const std::string value(trim(body.substr(eq + 1)));
      if (key == "id") {
        if (value.empty()) fail_at(line_no, "empty headline id");
        current.id = value;
      } else if (key == "date") {
        if (!value.empty() && !is_iso_date(value)) {
          fail_at(line_no, "date '" + value + "' is not YYYY-MM-DD");
        }
        if (!value.empty()) current.date = value;
      } else if (key == "section") {
        if (!value.empty()) current.section = value;
      }
      continue;
    }

    std::vector<std::string_view> fields;
    std::size_t begin = 0;
    while (true) {
      const auto tab = line.find('\t', begin);
      fields.push_back(line.substr(begin, tab == std::string_view::npos
                                              ? std::string_view::npos
                                              : tab - begin));
      if (tab == std::string_view::npos) break;
      begin = tab + 1;
    }
    if (fields.size() != 3) {
      fail_at(line_no, "expected TOKEN<TAB>POS<TAB>TAG, got " +
                           std::to_string(fields.size()) + " field(s)");
    }
    if (fields[0].empty() || utf8::contains_space(fields[0])) {
      fail_at(line_no, "token is empty or contains whitespace");
    }
    if (fields[1].empty() || utf8::contains_space(fields[1])) {
      fail_at(line_no, "POS column is empty or contains whitespace (use _)");
    }
    Tag tag;
    try {
      tag = parse_tag(fields[2]);
    } catch (const ValidationError& e) {
      fail_at(line_no, e.what());
    }
    if (headline_line == 0) headline_line = line_no;
    in_tokens = true;
    Token token{std::string(fields[0]), std::nullopt};
    if (fields[1] != "_") token.pos = std::string(fields[1]);
    current.tokens.push_back(std::move(token));
    tags.push_back(tag);
  }
  if (!in_tokens && headline_line != 0) {
    fail_at(headline_line, "metadata without tokens at end of file");
  }
  finish();
  return corpus;
}

Corpus read_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open corpus file '" + path + "'");
  try {
    return read_corpus(in, path);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_corpus(const Corpus& corpus, std::ostream& out, SpanColumn column) {
  validate_corpus(corpus);
  for (const Headline& headline : corpus.headlines) {
    out << "# id = " << headline.id << '\n';
    if (headline.date) out << "# date = " << *headline.date << '\n';
    if (headline.section) out << "# section = " << *headline.section << '\n';
    const auto& spans =
        column == SpanColumn::kGold ? headline.gold : headline.predicted;
    const std::vector<Tag> tags = spans_to_bio(spans, headline.tokens.size());
    for (std::size_t t = 0; t < headline.tokens.size(); ++t) {
      const Token& token = headline.tokens[t];
      out << token.text << '\t' << (token.pos ? *token.pos : "_") << '\t'
          << tag_name(tags[t]) << '\n';
    }
    out << '\n';
  }
}

void write_corpus_file(const Corpus& corpus, const std::string& path,
                       SpanColumn column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  write_corpus(corpus, out, column);
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  for (const Headline& headline : corpus.headlines) {
    ++stats.headlines;
    stats.tokens += headline.tokens.size();
    bool has_eng = false;
    for (const LabeledSpan& span : headline.gold) {
      if (span.label == Label::kEng) {
        ++stats.eng_spans;
        has_eng = true;
      } else {
        ++stats.other_spans;
      }
    }
    if (has_eng) ++stats.headlines_with_anglicisms;
    if (!headline.gold.empty()) ++stats.headlines_with_borrowings;
    if (headline.section) {
      SectionStats& section = stats.sections[*headline.section];
      ++section.headlines;
      if (has_eng) ++section.with_eng;
    }
  }
  for (auto& [name, section] : stats.sections) {
    section.percent_with_eng = 100.0 * static_cast<double>(section.with_eng) /
                               static_cast<double>(section.headlines);
  }
  return stats;
}

void render_stats(const CorpusStats& stats, std::ostream& out) {
  out << "headlines\t" << stats.headlines << '\n'
      << "tokens\t" << stats.tokens << '\n'
      << "headlines_with_anglicisms\t" << stats.headlines_with_anglicisms << '\n'
      << "headlines_with_borrowings\t" << stats.headlines_with_borrowings << '\n'
      << "ENG\t" << stats.eng_spans << '\n'
      << "OTHER\t" << stats.other_spans << '\n';
  if (stats.sections.empty()) return;
  out << '\n' << "section\theadlines\twith_anglicisms\tpercent\n";
  for (const auto& [name, section] : stats.sections) {
    out << name << '\t' << section.headlines << '\t' << section.with_eng
        << '\t' << format_fixed2(section.percent_with_eng) << '\n';
  }
}

}  // namespace prestamo
