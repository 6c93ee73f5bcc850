#include "prestamo/embeddings.hpp"

#include <cmath>
#include <fstream>
#include <istream>

#include "prestamo/error.hpp"
#include "prestamo/format.hpp"
#include "prestamo/utf8.hpp"

namespace prestamo {

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i == line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void fail_at(const std::string& name, std::size_t line,
                          const std::string& message) {
  throw ValidationError(name + ":" + std::to_string(line) + ": " + message);
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::string name, std::size_t dim)
    : name_(std::move(name)), dim_(dim), zero_(dim, 0.0) {
  if (dim == 0) throw ValidationError("embedding table '" + name_ + "' has dim 0");
}

bool EmbeddingTable::contains(std::string_view word) const {
  return index_.find(std::string(word)) != index_.end();
}

std::span<const double> EmbeddingTable::lookup(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) it = index_.find(utf8::to_lower(word));
  if (it == index_.end()) return zero_;
  return std::span<const double>(data_).subspan(it->second * dim_, dim_);
}

bool EmbeddingTable::add(std::string word, std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw ValidationError("vector for '" + word + "' has " +
                          std::to_string(vector.size()) + " components, expected " +
                          std::to_string(dim_));
  }
  for (double v : vector) {
    if (!std::isfinite(v)) {
      throw ValidationError("non-finite component in vector for '" + word + "'");
    }
  }
  const std::size_t row = index_.size();
  if (!index_.emplace(std::move(word), row).second) {
    ++duplicates_;
    return false;
  }
  data_.insert(data_.end(), vector.begin(), vector.end());
  return true;
}

EmbeddingTable load_embeddings(std::istream& in, std::string name,
                               std::optional<std::size_t> expected_dim) {
  std::optional<EmbeddingTable> table;
  std::optional<std::size_t> dim;
  std::vector<double> vec;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto fields = split_spaces(line);
    if (fields.empty()) continue;

    if (line_no == 1 && fields.size() == 2) {
      const auto count = parse_int(fields[0]);
      const auto header_dim = parse_int(fields[1]);
      if (count && header_dim && *count >= 0 && *header_dim > 0) {
        dim = static_cast<std::size_t>(*header_dim);
        continue;
      }
    }

    const std::size_t components = fields.size() - 1;
    if (!dim) dim = components;
    if (components == 0 || components != *dim) {
      fail_at(name, line_no, "expected " + std::to_string(*dim) +
                                 " components, found " + std::to_string(components));
    }
    if (expected_dim && *dim != *expected_dim) {
      fail_at(name, line_no, "dimension " + std::to_string(*dim) +
                                 " does not match expected " +
                                 std::to_string(*expected_dim));
    }
    if (!table) table.emplace(name, *dim);
    vec.clear();
    for (std::size_t k = 1; k < fields.size(); ++k) {
      const auto v = parse_double(fields[k]);
      if (!v || !std::isfinite(*v)) {
        fail_at(name, line_no, "component '" + std::string(fields[k]) +
                                   "' is not a finite number");
      }
      vec.push_back(*v);
    }
    table->add(std::string(fields[0]), vec);
  }
  if (!table) {
    if (expected_dim && dim && *dim != *expected_dim) {
      throw ValidationError(name + ": dimension " + std::to_string(*dim) +
                            " does not match expected " +
                            std::to_string(*expected_dim));
    }
    throw ValidationError(name + ": no vectors found");
  }
  return std::move(*table);
}

EmbeddingTable load_embeddings_file(const std::string& path,
                                    std::optional<std::size_t> expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open embeddings file '" + path + "'");
  return load_embeddings(in, path, expected_dim);
}

}  // namespace prestamo
