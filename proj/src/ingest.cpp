#include "prestamo/ingest.hpp"

#include <expat.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <memory>

#include "prestamo/error.hpp"
#include "prestamo/format.hpp"
#include "prestamo/utf8.hpp"

namespace prestamo {

namespace {

struct ParserState {
  std::vector<std::string> stack;
  bool saw_channel = false;
  bool in_item = false;
  std::string field;  // title/link/pubDate being captured, empty otherwise
  std::string text;
  std::optional<std::string> title;
  std::optional<std::string> link;
  std::optional<std::string> pub_date;
  FeedParse result;
};

void on_start(void* data, const XML_Char* name, const XML_Char**) {
  auto* st = static_cast<ParserState*>(data);
  const std::string element(name);
  const std::size_t depth = st->stack.size();
  if (depth == 1 && element == "channel" && st->stack[0] == "rss") {
    st->saw_channel = true;
  } else if (depth == 2 && element == "item" && st->stack[1] == "channel") {
    st->in_item = true;
    st->title.reset();
    st->link.reset();
    st->pub_date.reset();
  } else if (depth == 3 && st->in_item &&
             (element == "title" || element == "link" || element == "pubDate")) {
    st->field = element;
    st->text.clear();
  }
  st->stack.push_back(element);
}

void on_end(void* data, const XML_Char*) {
  auto* st = static_cast<ParserState*>(data);
  st->stack.pop_back();
  const std::size_t depth = st->stack.size();
  if (depth == 3 && !st->field.empty()) {
    if (st->field == "title") st->title = st->text;
    if (st->field == "link") st->link = st->text;
    if (st->field == "pubDate") st->pub_date = st->text;
    st->field.clear();
  } else if (depth == 2 && st->in_item) {
    st->in_item = false;
    const std::string title = st->title ? utf8::normalize_whitespace(*st->title) : "";
    if (title.empty()) {
      ++st->result.skipped_untitled;
      return;
    }
    FeedItem item;
    item.title = title;
    if (st->pub_date) item.pub_date = parse_rfc822_date(*st->pub_date);
    if (st->link) {
      const std::string link(trim(*st->link));
      if (!link.empty()) {
        item.link = link;
        item.section = section_from_link(link);
      }
    }
    st->result.items.push_back(std::move(item));
  }
}

void on_text(void* data, const XML_Char* s, int len) {
  auto* st = static_cast<ParserState*>(data);
  if (!st->field.empty()) st->text.append(s, static_cast<std::size_t>(len));
}

}  // namespace

FeedParse parse_rss(std::istream& in) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
      XML_ParserCreate("UTF-8"), &XML_ParserFree);
  if (!parser) throw std::runtime_error("cannot create XML parser");
  ParserState state;
  XML_SetUserData(parser.get(), &state);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_text);

  std::array<char, 1 << 14> buf;
  bool done = false;
  while (!done) {
    in.read(buf.data(), buf.size());
    const auto got = in.gcount();
    done = got < static_cast<std::streamsize>(buf.size());
    if (XML_Parse(parser.get(), buf.data(), static_cast<int>(got), done) == XML_STATUS_ERROR) {
      throw ValidationError(
          "malformed XML at line " +
          std::to_string(XML_GetCurrentLineNumber(parser.get())) + ": " +
          XML_ErrorString(XML_GetErrorCode(parser.get())));
    }
  }
  if (!state.saw_channel) {
    throw ValidationError("not an RSS 2.0 feed: no rss/channel element");
  }
  return std::move(state.result);
}

FeedParse parse_rss_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open feed file '" + path + "'");
  try {
    return parse_rss(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::optional<std::string> parse_rfc822_date(std::string_view text) {
  static constexpr std::array<std::string_view, 12> kMonths = {
      "jan", "feb", "mar", "apr", "may", "jun",
      "jul", "aug", "sep", "oct", "nov", "dec"};
  std::string s(trim(text));
  if (const auto comma = s.find(','); comma != std::string::npos) s = s.substr(comma + 1);
  const std::vector<std::string> parts = utf8::split_whitespace(s);
  if (parts.size() < 3) return std::nullopt;

  const auto day = parse_int(parts[0]);
  auto year = parse_int(parts[2]);
  if (!day || !year || *day < 1 || *day > 31) return std::nullopt;
  if (parts[2].size() == 2) *year += *year < 50 ? 2000 : 1900;
  if (*year < 1000 || *year > 9999) return std::nullopt;

  const std::string month_text = utf8::to_lower(parts[1]);
  int month = 0;
  for (std::size_t m = 0; m < kMonths.size(); ++m) {
    if (month_text.starts_with(kMonths[m])) month = static_cast<int>(m) + 1;
  }
  if (month == 0) return std::nullopt;

  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", static_cast<int>(*year), month,
                static_cast<int>(*day));
  return std::string(buf);
}

std::optional<std::string> section_from_link(std::string_view url) {
  const auto scheme = url.find("://");
  if (scheme == std::string_view::npos) return std::nullopt;
  std::string_view rest = url.substr(scheme + 3);
  const auto slash = rest.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  std::string_view path = rest.substr(slash);
  path = path.substr(0, path.find_first_of("?#"));

  std::vector<std::string_view> segments;
  std::size_t i = 0;
  while (i < path.size()) {
    const auto next = path.find('/', i);
    const auto seg = path.substr(i, next == std::string_view::npos ? next : next - i);
    if (!seg.empty()) segments.push_back(seg);
    if (next == std::string_view::npos) break;
    i = next + 1;
  }
  if (segments.size() < 2 || utf8::contains_space(segments.front())) return std::nullopt;
  return std::string(segments.front());
}

IngestResult items_to_corpus(const std::vector<FeedItem>& items,
                             const std::set<std::string>& existing_ids) {
  IngestResult result;
  std::set<std::pair<std::string, std::string>> seen;
  std::map<std::string, std::size_t> per_date;
  for (const FeedItem& item : items) {
    const std::string title = utf8::normalize_whitespace(item.title);
    const std::string date_key = item.pub_date.value_or("undated");
    if (!seen.insert({title, date_key}).second) {
      ++result.duplicates;
      continue;
    }
    const std::string id = date_key + "-" + std::to_string(++per_date[date_key]);
    if (existing_ids.count(id) != 0) {
      result.collisions.push_back(id);
      continue;
    }
    Headline headline;
    headline.id = id;
    headline.date = item.pub_date;
    headline.section = item.section;
    headline.tokens = tokenize(title);
    if (headline.tokens.empty()) continue;
    result.corpus.headlines.push_back(std::move(headline));
  }
  return result;
}

}  // namespace prestamo
