#ifndef PRESTAMO_INGEST_HPP_
#define PRESTAMO_INGEST_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "prestamo/corpus.hpp"

namespace prestamo {

struct FeedItem {
  std::string title;                   // entity-decoded, whitespace-normalized
  std::optional<std::string> pub_date;  // YYYY-MM-DD
  std::optional<std::string> link;
  std::optional<std::string> section;  // first path segment of link

  friend bool operator==(const FeedItem&, const FeedItem&) = default;
};

struct FeedParse {
  std::vector<FeedItem> items;
  std::size_t skipped_untitled = 0;
};

/// Reads rss/channel/item from an RSS 2.0 document. Throws ValidationError
/// on malformed XML, a non-rss root, or a missing channel.
FeedParse parse_rss(std::istream& in);
FeedParse parse_rss_file(const std::string& path);

/// "Mon, 03 Feb 2020 08:00:00 +0100" -> "2020-02-03" (the calendar date as
/// written, no timezone conversion).
std::optional<std::string> parse_rfc822_date(std::string_view text);

/// First path segment of a URL with at least two segments:
/// "https://x.es/economia/a.html" -> "economia".
std::optional<std::string> section_from_link(std::string_view url);

struct IngestResult {
  Corpus corpus;
  std::size_t duplicates = 0;            // repeated (title, date) pairs
  std::vector<std::string> collisions;   // ids already in the existing set
};

/// Unannotated headlines with ids "<date>-<n>" (or "undated-<n>"), numbered
/// per date in feed order after deduplication on (title, date). Items whose
/// id is already in `existing_ids` are skipped and reported.
IngestResult items_to_corpus(const std::vector<FeedItem>& items,
                             const std::set<std::string>& existing_ids);

}  // namespace prestamo

#endif  // PRESTAMO_INGEST_HPP_
