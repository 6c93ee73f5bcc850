#ifndef PRESTAMO_CORPUS_HPP_
#define PRESTAMO_CORPUS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace prestamo {

enum class Label : std::uint8_t { kEng, kOther };

std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view name);

/// Token-level BIO tag. The numeric values are the positions in the full
/// alphabet, so O is always 0.
enum class Tag : std::uint8_t { kO = 0, kBEng, kIEng, kBOther, kIOther };

std::string_view tag_name(Tag tag);
/// Throws ValidationError on anything outside {O, B-ENG, I-ENG, B-OTHER, I-OTHER}.
Tag parse_tag(std::string_view name);

bool is_begin(Tag tag);
bool is_inside(Tag tag);
/// Label carried by a non-O tag.
Label tag_label(Tag tag);
Tag begin_tag(Label label);
Tag inside_tag(Label label);

/// Ordered tag set used by a model. The full view is
/// [O, B-ENG, I-ENG, B-OTHER, I-OTHER]; the ignore-OTHER view keeps the
/// first three.
class TagAlphabet {
 public:
  static TagAlphabet full();
  static TagAlphabet ignore_other();

  std::size_t size() const { return tags_.size(); }
  Tag tag(std::size_t index) const { return tags_.at(index); }
  std::optional<std::size_t> index(Tag tag) const;
  bool includes_other() const { return tags_.size() == 5; }
  std::span<const Tag> tags() const { return tags_; }

  friend bool operator==(const TagAlphabet&, const TagAlphabet&) = default;

 private:
  explicit TagAlphabet(std::vector<Tag> tags) : tags_(std::move(tags)) {}
  std::vector<Tag> tags_;
};

struct Token {
  std::string text;
  std::optional<std::string> pos;

  friend bool operator==(const Token&, const Token&) = default;
};

/// Half-open token range [start, end).
struct LabeledSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  Label label = Label::kEng;

  friend auto operator<=>(const LabeledSpan&, const LabeledSpan&) = default;
};

struct Headline {
  std::string id;
  std::optional<std::string> date;
  std::optional<std::string> section;
  std::vector<Token> tokens;
  std::vector<LabeledSpan> gold;
  // Filled by tagging; never read from or written to the gold column.
  std::vector<LabeledSpan> predicted;

  friend bool operator==(const Headline&, const Headline&) = default;
};

struct Corpus {
  std::string name;
  std::vector<Headline> headlines;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Splits on whitespace, then separates the punctuation characters
/// . , ; : ¡ ! ¿ ? « » “ ” " ' ‘ ’ ( ) [ ] — … into single tokens. An
/// apostrophe between two letters/digits stays inside its word.
std::vector<Token> tokenize(std::string_view text);

/// Throws ValidationError naming the span when spans overlap, are unsorted
/// or fall outside [0, length).
void validate_spans(std::span<const LabeledSpan> spans, std::size_t length);

std::vector<Tag> spans_to_bio(std::span<const LabeledSpan> spans,
                              std::size_t length);

/// Inverse of spans_to_bio. A bare I-X, or an I-X after a tag of another
/// label, opens a new span as if it were B-X.
std::vector<LabeledSpan> bio_to_spans(std::span<const Tag> tags);

/// Throws ValidationError on empty tokens, whitespace in tokens or POS,
/// invalid spans, or duplicate ids.
void validate_headline(const Headline& headline);
void validate_corpus(const Corpus& corpus);

/// Reads the CoNLL-style TSV corpus format:
///
///   # id = 2020-02-03-1
///   # date = 2020-02-03
///   # section = tecnologia
///   El<TAB>DET<TAB>O
///   big<TAB>ADJ<TAB>B-ENG
///   data<TAB>NOUN<TAB>I-ENG
///   <blank line>
///
/// A line starting with '#' and containing no tab is a comment; other keys
/// than id/date/section are ignored. Headlines without an id comment get
/// their 1-based ordinal as id. Errors carry the 1-based line number.
Corpus read_corpus(std::istream& in, std::string name = {});
Corpus read_corpus_file(const std::string& path);

enum class SpanColumn { kGold, kPredicted };

void write_corpus(const Corpus& corpus, std::ostream& out,
                  SpanColumn column = SpanColumn::kGold);
void write_corpus_file(const Corpus& corpus, const std::string& path,
                       SpanColumn column = SpanColumn::kGold);

struct SectionStats {
  std::size_t headlines = 0;
  std::size_t with_eng = 0;
  double percent_with_eng = 0.0;
};

struct CorpusStats {
  std::size_t headlines = 0;
  std::size_t tokens = 0;
  std::size_t headlines_with_anglicisms = 0;  // at least one ENG span
  std::size_t headlines_with_borrowings = 0;  // at least one span of any label
  std::size_t eng_spans = 0;
  std::size_t other_spans = 0;
  std::map<std::string, SectionStats> sections;  // headlines without a section are not listed
};

CorpusStats corpus_stats(const Corpus& corpus);
void render_stats(const CorpusStats& stats, std::ostream& out);

}  // namespace prestamo

#endif  // PRESTAMO_CORPUS_HPP_
