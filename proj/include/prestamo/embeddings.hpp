#ifndef PRESTAMO_EMBEDDINGS_HPP_
#define PRESTAMO_EMBEDDINGS_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace prestamo {

/// Pre-trained word vectors loaded from word2vec text files. Immutable
/// after loading.
class EmbeddingTable {
 public:
  EmbeddingTable(std::string name, std::size_t dim);

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }
  /// Number of duplicate words dropped while loading (first one wins).
  std::size_t duplicates() const { return duplicates_; }

  bool contains(std::string_view word) const;

  /// Exact match, then lowercase match, then the zero vector.
  std::span<const double> lookup(std::string_view word) const;

  /// Returns false (and counts a duplicate) when the word already exists.
  bool add(std::string word, std::span<const double> vector);

 private:
  std::string name_;
  std::size_t dim_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
  std::vector<double> zero_;
  std::size_t duplicates_ = 0;
};

/// Parses word2vec text: an optional "<count> <dim>" header, then lines of
/// "word v1 ... v_dim". Without a header, dim comes from the first line.
EmbeddingTable load_embeddings(std::istream& in, std::string name,
                               std::optional<std::size_t> expected_dim = {});
EmbeddingTable load_embeddings_file(const std::string& path,
                                    std::optional<std::size_t> expected_dim = {});

}  // namespace prestamo

#endif  // PRESTAMO_EMBEDDINGS_HPP_
