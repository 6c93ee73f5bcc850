#include "prestamo/model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "prestamo/error.hpp"
#include "prestamo/format.hpp"

namespace prestamo {

namespace {

constexpr std::string_view kMagic = "prestamo-crf-model";
constexpr int kFormatVersion = 1;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  while (true) {
    const auto tab = line.find('\t', begin);
    out.push_back(line.substr(begin, tab == std::string_view::npos ? tab : tab - begin));
    if (tab == std::string_view::npos) return out;
    begin = tab + 1;
  }
}

std::vector<crf::Instance> compile_corpus(const Corpus& corpus,
                                          const FeatureIndex& index,
                                          const FeatureConfig& features,
                                          const EmbeddingTable* embeddings,
                                          const TagAlphabet& alphabet) {
  std::vector<crf::Instance> data;
  data.reserve(corpus.headlines.size());
  for (const Headline& headline : corpus.headlines) {
    const auto attrs = windowed_attributes(headline, features, embeddings);
    data.push_back({compile(index, attrs),
                    label_indices(alphabet, headline.gold, headline.tokens.size())});
  }
  return data;
}

std::vector<std::size_t> to_indices(const TagAlphabet& alphabet,
                                    std::span<const Tag> tags) {
  std::vector<std::size_t> out;
  out.reserve(tags.size());
  for (Tag tag : tags) {
    const auto i = alphabet.index(tag);
    if (!i) {
      throw std::invalid_argument("tag " + std::string(tag_name(tag)) +
                                  " is not in the model alphabet");
    }
    out.push_back(*i);
  }
  return out;
}

// Line reader that tracks position and reports truncation.
class ModelReader {
 public:
  explicit ModelReader(std::istream& in) : in_(in) {}

  std::string next(std::string_view what) {
    std::string line;
    if (!std::getline(in_, line)) {
      throw ModelFormatError(ModelFormatError::Kind::kTruncated,
                             "model file ends before " + std::string(what));
    }
    ++line_;
    unterminated_ = in_.eof();
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  // A malformed final line without its newline is a cut-off file.
  [[noreturn]] void fail(ModelFormatError::Kind kind, const std::string& message) const {
    if (unterminated_ && kind != ModelFormatError::Kind::kVersion) {
      kind = ModelFormatError::Kind::kTruncated;
    }
    throw ModelFormatError(kind, "model line " + std::to_string(line_) + ": " + message);
  }

  double number(std::string_view text) const {
    const auto v = parse_double(text);
    if (!v || !std::isfinite(*v)) {
      fail(ModelFormatError::Kind::kSyntax, "bad number '" + std::string(text) + "'");
    }
    return *v;
  }

  std::size_t count(std::string_view text) const {
    const auto v = parse_int(text);
    if (!v || *v < 0) {
      fail(ModelFormatError::Kind::kSyntax, "bad count '" + std::string(text) + "'");
    }
    return static_cast<std::size_t>(*v);
  }

  // Splits "<key>\t..." and checks the key.
  std::vector<std::string_view> keyed(const std::string& line, std::string_view key) const {
    auto fields = split_tabs(line);
    if (fields.front() != key) {
      fail(ModelFormatError::Kind::kSyntax,
           "expected '" + std::string(key) + "' section, found '" + std::string(fields.front()) + "'");
    }
    return fields;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  bool unterminated_ = false;
};

void write_row(std::ostream& out, std::string_view key, std::span<const double> values) {
  out << key;
  for (double v : values) out << '\t' << format_double(v);
  out << '\n';
}

}  // namespace

void TrainConfig::validate() const {
  if (!(c1 >= 0.0) || !std::isfinite(c1)) throw ConfigError("c1 must be >= 0");
  if (!(c2 >= 0.0) || !std::isfinite(c2)) throw ConfigError("c2 must be >= 0");
  if (!(delta > 0.0)) throw ConfigError("delta must be > 0");
  if (period < 1) throw ConfigError("period must be >= 1");
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (lbfgs_memory < 1) throw ConfigError("lbfgs_memory must be >= 1");
}

crf::Sequence compile(const FeatureIndex& index,
                      std::span<const AttributeVector> attrs) {
  crf::Sequence seq(attrs.size());
  for (std::size_t t = 0; t < attrs.size(); ++t) {
    seq[t].reserve(attrs[t].size());
    for (const Attribute& attr : attrs[t]) {
      if (const auto id = index.find(attr.name)) seq[t].push_back({*id, attr.value});
    }
  }
  return seq;
}

std::vector<std::size_t> label_indices(const TagAlphabet& alphabet,
                                       std::span<const LabeledSpan> spans,
                                       std::size_t length) {
  std::vector<LabeledSpan> kept;
  for (const LabeledSpan& span : spans) {
    if (alphabet.includes_other() || span.label == Label::kEng) kept.push_back(span);
  }
  std::vector<std::size_t> out;
  for (Tag tag : spans_to_bio(kept, length)) out.push_back(*alphabet.index(tag));
  return out;
}

double score_sequence(const CrfModel& model, std::span<const AttributeVector> attrs,
                      std::span<const Tag> tags) {
  if (attrs.size() != tags.size()) {
    throw std::invalid_argument("attribute and tag sequences differ in length");
  }
  return crf::score(model.weights, compile(model.index, attrs),
                    to_indices(model.alphabet, tags));
}

double log_partition(const CrfModel& model, std::span<const AttributeVector> attrs) {
  return crf::log_partition(model.weights, compile(model.index, attrs));
}

std::vector<Tag> viterbi(const CrfModel& model, std::span<const AttributeVector> attrs) {
  std::vector<Tag> tags;
  for (std::size_t y : crf::viterbi(model.weights, compile(model.index, attrs))) {
    tags.push_back(model.alphabet.tag(y));
  }
  return tags;
}

TrainResult train(const Corpus& corpus, const FeatureConfig& features,
                  const EmbeddingTable* embeddings, const TrainConfig& config,
                  const TagAlphabet& alphabet, const optimize::Progress& progress) {
  features.validate();
  config.validate();
  if (corpus.headlines.empty()) throw ValidationError("training corpus is empty");

  TrainResult result;
  CrfModel& model = result.model;
  model.alphabet = alphabet;
  model.features = features;
  model.train_config = config;
  if (features.has(FeatureFamily::kEmbedding) && embeddings != nullptr) {
    model.embedding_source = embeddings->name();
  }
  model.index = build_index(corpus, features, embeddings);

  const std::vector<crf::Instance> data =
      compile_corpus(corpus, model.index, features, embeddings, alphabet);
  const std::size_t K = model.index.size();
  const std::size_t L = alphabet.size();

  optimize::Options options;
  options.c1 = config.c1;
  options.memory = config.lbfgs_memory;
  options.delta = config.delta;
  options.period = config.period;
  options.max_iterations = config.max_iterations;

  const auto objective = [&](std::span<const double> x, std::vector<double>& g) {
    const crf::Parameters params(K, L, std::vector<double>(x.begin(), x.end()));
    return crf::nll_and_gradient(params, data, config.c2, g);
  };
  optimize::Result fit = optimize::minimize(
      objective, std::vector<double>(crf::Parameters::count(K, L), 0.0), options,
      progress);

  model.weights = crf::Parameters(K, L, std::move(fit.x));
  result.status = fit.status;
  result.iterations = fit.iterations;
  result.trace = std::move(fit.trace);
  return result;
}

Corpus tag(const CrfModel& model, const Corpus& corpus,
           const EmbeddingTable* embeddings) {
  Corpus out = corpus;
  for (Headline& headline : out.headlines) {
    headline.predicted.clear();
    if (headline.tokens.empty()) continue;
    const auto attrs = windowed_attributes(headline, model.features, embeddings);
    const std::vector<Tag> tags = viterbi(model, attrs);
    headline.predicted = bio_to_spans(tags);
  }
  return out;
}

void save_model(const CrfModel& model, std::ostream& out) {
  const crf::Parameters& w = model.weights;
  const std::size_t L = model.alphabet.size();
  const std::size_t K = model.index.size();
  if (w.labels() != L || w.attributes() != K) {
    throw ModelFormatError(ModelFormatError::Kind::kDimension,
                           "weights do not match alphabet/index sizes");
  }

  out << kMagic << '\t' << kFormatVersion << '\n';
  out << "labels\t" << L;
  for (Tag tag : model.alphabet.tags()) out << '\t' << tag_name(tag);
  out << '\n';
  out << "features";
  for (FeatureFamily family : kAllFamilies) {
    out << '\t' << family_key(family) << '=' << (model.features.has(family) ? 1 : 0);
  }
  out << "\twindow_radius=" << model.features.window_radius
      << "\tembedding_scaling=" << format_double(model.features.embedding_scaling) << '\n';
  out << "embeddings\t" << model.embedding_source << '\n';
  const TrainConfig& tc = model.train_config;
  out << "train\tc1=" << format_double(tc.c1) << "\tc2=" << format_double(tc.c2)
      << "\tdelta=" << format_double(tc.delta) << "\tperiod=" << tc.period
      << "\tmax_iterations="
      << (tc.max_iterations == std::numeric_limits<std::size_t>::max()
              ? std::string("unbounded")
              : std::to_string(tc.max_iterations))
      << "\tlbfgs_memory=" << tc.lbfgs_memory
      << '\n';

  out << "transitions\t" << L << '\n';
  for (std::size_t i = 0; i < L; ++i) {
    write_row(out, tag_name(model.alphabet.tag(i)),
              w.values().subspan(w.transition_offset() + i * L, L));
  }
  write_row(out, "start", w.values().subspan(w.start_offset(), L));
  write_row(out, "end", w.values().subspan(w.end_offset(), L));

  out << "attributes\t" << K << '\n';
  for (std::size_t a = 0; a < K; ++a) out << model.index.name(static_cast<std::uint32_t>(a)) << '\n';

  std::size_t nonzero = 0;
  for (std::size_t k = 0; k < K * L; ++k) nonzero += w.values()[k] != 0.0 ? 1 : 0;
  out << "state\t" << nonzero << '\n';
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t j = 0; j < L; ++j) {
      const double v = w.state(a, j);
      if (v == 0.0) continue;
      out << model.index.name(static_cast<std::uint32_t>(a)) << '\t'
          << tag_name(model.alphabet.tag(j)) << '\t' << format_double(v) << '\n';
    }
  }
  out << "end-of-model\n";
}

CrfModel load_model(std::istream& in) {
  using Kind = ModelFormatError::Kind;
  ModelReader reader(in);
  CrfModel model;

  {
    std::string header;
    try {
      header = reader.next("header");
    } catch (const ModelFormatError&) {
      throw ModelFormatError(Kind::kVersion, "empty model file");
    }
    const auto fields = split_tabs(header);
    if (fields.size() != 2 || fields[0] != kMagic) {
      throw ModelFormatError(Kind::kVersion, "not a model file (bad header)");
    }
    const auto version = parse_int(fields[1]);
    if (!version || *version != kFormatVersion) {
      throw ModelFormatError(Kind::kVersion, "unsupported model format version '" +
                                                 std::string(fields[1]) + "'");
    }
  }

  const std::string labels_line = reader.next("labels");
  const auto labels = reader.keyed(labels_line, "labels");
  const std::size_t L = reader.count(labels.at(std::min<std::size_t>(1, labels.size() - 1)));
  if (labels.size() != L + 2) reader.fail(Kind::kDimension, "label count mismatch");
  if (L == 5) {
    model.alphabet = TagAlphabet::full();
  } else if (L == 3) {
    model.alphabet = TagAlphabet::ignore_other();
  } else {
    reader.fail(Kind::kDimension, "unsupported label count " + std::to_string(L));
  }
  for (std::size_t j = 0; j < L; ++j) {
    if (labels[j + 2] != tag_name(model.alphabet.tag(j))) {
      reader.fail(Kind::kSyntax, "unexpected label order");
    }
  }

  const std::string features_line = reader.next("features");
  for (const auto& field : reader.keyed(features_line, "features")) {
    if (field == "features") continue;
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) reader.fail(Kind::kSyntax, "bad feature field");
    const auto key = field.substr(0, eq);
    const auto value = field.substr(eq + 1);
    if (const auto family = parse_family_key(key)) {
      model.features.set(*family, value == "1");
    } else if (key == "window_radius") {
      model.features.window_radius = static_cast<int>(reader.count(value));
    } else if (key == "embedding_scaling") {
      model.features.embedding_scaling = reader.number(value);
    } else {
      reader.fail(Kind::kSyntax, "unknown feature key '" + std::string(key) + "'");
    }
  }

  const std::string embeddings_line = reader.next("embeddings");
  if (!embeddings_line.starts_with("embeddings\t")) {
    reader.fail(Kind::kSyntax, "expected 'embeddings' section");
  }
  model.embedding_source = embeddings_line.substr(std::string_view("embeddings\t").size());

  const std::string train_line = reader.next("train");
  for (const auto& field : reader.keyed(train_line, "train")) {
    if (field == "train") continue;
    const auto eq = field.find('=');
    if (eq == std::string_view::npos) reader.fail(Kind::kSyntax, "bad train field");
    const auto key = field.substr(0, eq);
    const auto value = field.substr(eq + 1);
    TrainConfig& tc = model.train_config;
    if (key == "c1") tc.c1 = reader.number(value);
    else if (key == "c2") tc.c2 = reader.number(value);
    else if (key == "delta") tc.delta = reader.number(value);
    else if (key == "period") tc.period = reader.count(value);
    else if (key == "max_iterations") {
      tc.max_iterations = value == "unbounded" ? std::numeric_limits<std::size_t>::max()
                                               : reader.count(value);
    }
    else if (key == "lbfgs_memory") tc.lbfgs_memory = reader.count(value);
    else reader.fail(Kind::kSyntax, "unknown train key '" + std::string(key) + "'");
  }

  const std::string trans_line = reader.next("transitions");
  const auto trans = reader.keyed(trans_line, "transitions");
  if (trans.size() != 2 || reader.count(trans[1]) != L) {
    reader.fail(Kind::kDimension, "transition block size does not match label count");
  }
  std::vector<double> transitions;
  for (std::size_t i = 0; i < L; ++i) {
    const std::string row = reader.next("transition rows");
    const auto fields = reader.keyed(row, tag_name(model.alphabet.tag(i)));
    if (fields.size() != L + 1) reader.fail(Kind::kDimension, "transition row length");
    for (std::size_t j = 1; j <= L; ++j) transitions.push_back(reader.number(fields[j]));
  }
  std::vector<double> boundary[2];
  const std::string_view boundary_keys[2] = {"start", "end"};
  for (int b = 0; b < 2; ++b) {
    const std::string row = reader.next(boundary_keys[b]);
    const auto fields = reader.keyed(row, boundary_keys[b]);
    if (fields.size() != L + 1) reader.fail(Kind::kDimension, "boundary row length");
    for (std::size_t j = 1; j <= L; ++j) boundary[b].push_back(reader.number(fields[j]));
  }

  const std::string attr_line = reader.next("attributes");
  const auto attr_fields = reader.keyed(attr_line, "attributes");
  if (attr_fields.size() != 2) reader.fail(Kind::kSyntax, "bad attributes header");
  const std::size_t K = reader.count(attr_fields[1]);
  for (std::size_t a = 0; a < K; ++a) {
    const std::string name = reader.next("attribute list");
    if (name.starts_with("state\t") || name == "end-of-model") {
      reader.fail(Kind::kDimension, "attribute list shorter than declared " + std::to_string(K));
    }
    if (name.empty() || !model.index.add(name) || model.index.size() != a + 1) {
      reader.fail(Kind::kSyntax, "empty or duplicate attribute name");
    }
  }
  model.index.freeze();

  crf::Parameters params(K, L);
  const std::string state_line = reader.next("state weights");
  if (!state_line.starts_with("state\t")) {
    reader.fail(Kind::kDimension, "attribute list longer than declared " + std::to_string(K));
  }
  const auto state_fields = split_tabs(state_line);
  if (state_fields.size() != 2) reader.fail(Kind::kSyntax, "bad state header");
  const std::size_t declared = reader.count(state_fields[1]);
  std::size_t seen = 0;
  while (true) {
    const std::string line = reader.next("end-of-model marker");
    if (line == "end-of-model") break;
    ++seen;
    if (seen > declared) {
      reader.fail(Kind::kDimension, "more state weight lines than declared " + std::to_string(declared));
    }
    const auto fields = split_tabs(line);
    if (fields.size() != 3) reader.fail(Kind::kSyntax, "state line needs 3 fields");
    const auto id = model.index.find(fields[0]);
    if (!id) reader.fail(Kind::kDimension, "state weight for unlisted attribute");
    Tag tag;
    try {
      tag = parse_tag(fields[1]);
    } catch (const ValidationError&) {
      reader.fail(Kind::kSyntax, "unknown label '" + std::string(fields[1]) + "'");
    }
    const auto j = model.alphabet.index(tag);
    if (!j) reader.fail(Kind::kDimension, "label outside the model alphabet");
    params.values()[params.state_index(*id, *j)] = reader.number(fields[2]);
  }
  if (seen != declared) {
    reader.fail(Kind::kDimension, "found " + std::to_string(seen) +
                                      " state weight lines, declared " + std::to_string(declared));
  }

  auto values = params.values();
  std::copy(transitions.begin(), transitions.end(), values.begin() + params.transition_offset());
  std::copy(boundary[0].begin(), boundary[0].end(), values.begin() + params.start_offset());
  std::copy(boundary[1].begin(), boundary[1].end(), values.begin() + params.end_offset());
  model.weights = std::move(params);
  return model;
}

void save_model_file(const CrfModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write model file '" + path + "'");
  save_model(model, out);
}

CrfModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace prestamo
