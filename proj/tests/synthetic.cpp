#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>

namespace prestamo::testing {

namespace {

struct Word {
  const char* text;
  const char* pos;
};

constexpr Word kSpanish[] = {
    {"el", "DET"},         {"la", "DET"},        {"los", "DET"},     {"un", "DET"},
    {"gobierno", "NOUN"},  {"mercado", "NOUN"},  {"precio", "NOUN"}, {"vivienda", "NOUN"},
    {"ley", "NOUN"},       {"plan", "NOUN"},     {"jóvenes", "NOUN"}, {"empresas", "NOUN"},
    {"anuncia", "VERB"},   {"crece", "VERB"},    {"sube", "VERB"},   {"prepara", "VERB"},
    {"nuevo", "ADJ"},      {"mayor", "ADJ"},     {"para", "ADP"},    {"con", "ADP"},
    {"en", "ADP"},         {"del", "ADP"},       {"España", "PROPN"}, {"Madrid", "PROPN"},
};

constexpr const char* kEngStems[] = {"big",   "data", "fake",  "news",   "start",
                                     "smart", "city", "look",  "influ",  "stream"};
constexpr const char* kOtherStems[] = {"chev", "kibbut", "gul", "mamb"};

constexpr const char* kSections[] = {"economia", "tecnologia", "cultura", "deportes"};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

Corpus synthetic_corpus(std::uint64_t seed, std::size_t headlines, const std::string& name,
                        double unmarked) {
  Rng rng(seed);
  Corpus corpus;
  corpus.name = name;
  for (std::size_t h = 0; h < headlines; ++h) {
    Headline headline;
    headline.id = name + "-" + std::to_string(h + 1);
    headline.date = "2020-03-" + std::string(h % 28 < 9 ? "0" : "") + std::to_string(h % 28 + 1);
    headline.section = kSections[rng.below(std::size(kSections))];
    const std::size_t target = rng.between(4, 12);
    bool after_span = true;
    while (headline.tokens.size() < target) {
      if (!after_span && rng.coin(0.2)) {
        const bool eng = rng.coin(0.8);
        const std::size_t len = rng.between(1, 2);
        const bool quoted = rng.coin(0.15);
        if (quoted) headline.tokens.push_back({"«", "PUNCT"});
        const std::size_t start = headline.tokens.size();
        for (std::size_t i = 0; i < len; ++i) {
          std::string text = eng ? kEngStems[rng.below(std::size(kEngStems))]
                                 : kOtherStems[rng.below(std::size(kOtherStems))];
          if (!(eng && unmarked > 0.0 && rng.coin(unmarked))) {
            text += eng ? kEngSuffix : kOtherSuffix;
          }
          headline.tokens.push_back({text, "NOUN"});
        }
        headline.gold.push_back({start, start + len, eng ? Label::kEng : Label::kOther});
        if (quoted) headline.tokens.push_back({"»", "PUNCT"});
        after_span = true;
        continue;
      }
      const Word& w = kSpanish[rng.below(std::size(kSpanish))];
      std::string text = w.text;
      if (headline.tokens.empty() && text[0] >= 'a' && text[0] <= 'z') text[0] -= 32;
      headline.tokens.push_back({text, std::string(w.pos)});
      after_span = false;
    }
    corpus.headlines.push_back(std::move(headline));
  }
  return corpus;
}

EmbeddingTable synthetic_embeddings(const Corpus& corpus) {
  EmbeddingTable table("synthetic.vec", 4);
  std::set<std::string> words;
  for (const Headline& h : corpus.headlines) {
    for (const Token& t : h.tokens) {
      std::string lower = t.text;
      for (char& c : lower) {
        if (c >= 'A' && c <= 'Z') c += 32;
      }
      words.insert(lower);
    }
  }
  for (const std::string& w : words) {
    std::uint64_t h = fnv1a(w);
    std::vector<double> v(4);
    for (double& x : v) {
      x = static_cast<double>(h & 0xffff) / 32768.0 - 1.0;
      h >>= 16;
    }
    v[0] = w.ends_with(kEngSuffix) ? 1.0 : -0.5;
    table.add(w, v);
  }
  return table;
}

std::vector<LabeledSpan> random_spans(Rng& rng, std::size_t length, std::size_t max_spans,
                                      std::size_t max_span_length) {
  std::vector<LabeledSpan> spans;
  const std::size_t wanted = rng.between(0, max_spans);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < wanted; ++k) {
    const std::size_t start = pos + rng.below(3);
    const std::size_t len = rng.between(1, max_span_length);
    if (start + len > length) break;
    spans.push_back({start, start + len, rng.coin() ? Label::kEng : Label::kOther});
    pos = start + len;
  }
  return spans;
}

crf::Parameters random_parameters(Rng& rng, std::size_t attributes, std::size_t labels,
                                  double scale) {
  std::vector<double> values(crf::Parameters::count(attributes, labels));
  for (double& v : values) v = rng.uniform(-scale, scale);
  return crf::Parameters(attributes, labels, std::move(values));
}

crf::Sequence random_sequence(Rng& rng, std::size_t length, std::size_t attributes) {
  crf::Sequence seq(length);
  for (auto& position : seq) {
    std::set<std::uint32_t> ids;
    const std::size_t active = rng.between(1, std::min<std::size_t>(3, attributes));
    while (ids.size() < active) ids.insert(static_cast<std::uint32_t>(rng.below(attributes)));
    for (std::uint32_t id : ids) position.push_back({id, rng.uniform(-1.5, 1.5)});
  }
  return seq;
}

double path_score(const crf::Parameters& p, const crf::Sequence& seq,
                  const std::vector<std::size_t>& path) {
  const auto w = p.values();
  const std::size_t k = p.attributes();
  const std::size_t l = p.labels();
  double s = w[k * l + l * l + path.front()] + w[k * l + l * l + l + path.back()];
  for (std::size_t t = 0; t < path.size(); ++t) {
    for (const crf::Feature& f : seq[t]) s += f.value * w[f.id * l + path[t]];
    if (t > 0) s += w[k * l + path[t - 1] * l + path[t]];
  }
  return s;
}

namespace {

template <typename Visit>
void for_each_path(std::size_t n, std::size_t labels, Visit visit) {
  std::vector<std::size_t> path(n, 0);
  while (true) {
    visit(path);
    std::size_t i = 0;
    while (i < n && ++path[i] == labels) path[i++] = 0;
    if (i == n) return;
  }
}

}  // namespace

double enumerated_log_partition(const crf::Parameters& p, const crf::Sequence& seq) {
  std::vector<double> scores;
  for_each_path(seq.size(), p.labels(),
                [&](const std::vector<std::size_t>& path) { scores.push_back(path_score(p, seq, path)); });
  const double m = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - m);
  return m + std::log(sum);
}

std::vector<std::size_t> enumerated_viterbi(const crf::Parameters& p, const crf::Sequence& seq) {
  std::vector<std::size_t> best;
  double best_score = -std::numeric_limits<double>::infinity();
  auto reverse_less = [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    return std::lexicographical_compare(a.rbegin(), a.rend(), b.rbegin(), b.rend());
  };
  for_each_path(seq.size(), p.labels(), [&](const std::vector<std::size_t>& path) {
    const double s = path_score(p, seq, path);
    if (s > best_score || (s == best_score && reverse_less(path, best))) {
      best_score = s;
      best = path;
    }
  });
  return best;
}

OracleReport oracle_evaluate(const Corpus& gold, const Predictions& predictions,
                             bool without_other) {
  using Labeled = std::tuple<std::string, std::size_t, std::size_t, Label>;
  using Bounds = std::tuple<std::string, std::size_t, std::size_t>;
  std::set<Labeled> g;
  std::set<Labeled> p;
  for (const Headline& h : gold.headlines) {
    for (const LabeledSpan& s : h.gold) {
      if (!(without_other && s.label == Label::kOther)) g.insert({h.id, s.start, s.end, s.label});
    }
  }
  for (const HeadlinePrediction& hp : predictions) {
    for (const LabeledSpan& s : hp.spans) {
      if (!(without_other && s.label == Label::kOther)) p.insert({hp.id, s.start, s.end, s.label});
    }
  }
  auto count = [](const std::set<Labeled>& gs, const std::set<Labeled>& ps, Label label) {
    Counts c;
    std::size_t ng = 0;
    std::size_t np = 0;
    for (const auto& x : gs) ng += std::get<3>(x) == label;
    for (const auto& x : ps) {
      if (std::get<3>(x) != label) continue;
      ++np;
      c.tp += gs.count(x);
    }
    c.fp = np - c.tp;
    c.fn = ng - c.tp;
    return c;
  };
  OracleReport r;
  r.eng = count(g, p, Label::kEng);
  r.other = count(g, p, Label::kOther);
  std::set<Bounds> gb;
  std::set<Bounds> pb;
  for (const auto& [id, s, e, l] : g) gb.insert({id, s, e});
  for (const auto& [id, s, e, l] : p) pb.insert({id, s, e});
  for (const auto& b : pb) r.borrowing.tp += gb.count(b);
  r.borrowing.fp = pb.size() - r.borrowing.tp;
  r.borrowing.fn = gb.size() - r.borrowing.tp;
  return r;
}

}  // namespace prestamo::testing
