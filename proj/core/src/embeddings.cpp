#include "medqa/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace medqa {

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t next = line.find(' ', pos);
    const std::size_t end = next == std::string_view::npos ? line.size() : next;
    fields.push_back(line.substr(pos, end - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return fields;
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  // strtod accepts leading '+', from_chars does not.
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool parse_count(std::string_view text, std::size_t& out) {
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::size_t dim, std::uint64_t oov_seed)
    : dim_(dim), oov_seed_(oov_seed) {
  if (dim == 0) throw std::invalid_argument("embedding dim must be >= 1");
}

bool EmbeddingTable::insert(const std::string& word, Vector vector) {
  require_size(vector.size(), dim_, "embedding vector for '" + word + "'");
  return entries_.emplace(word, std::move(vector)).second;
}

Vector EmbeddingTable::lookup(const std::string& word) const {
  if (auto it = entries_.find(word); it != entries_.end()) return it->second;
  return oov_vector(word);
}

std::vector<std::string> EmbeddingTable::words() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [word, _] : entries_) out.push_back(word);
  std::sort(out.begin(), out.end());
  return out;
}

void write_vectors(const EmbeddingTable& table, std::ostream& out) {
  const auto words = table.words();
  out << words.size() << ' ' << table.dim() << '\n';
  char buf[32];
  for (const auto& w : words) {
    out << w;
    for (double v : table.lookup(w)) {
      const auto res = std::to_chars(buf, buf + sizeof buf, v);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

Vector EmbeddingTable::oov_vector(const std::string& word) const {
  std::uint64_t state = fnv1a(word) ^ (oov_seed_ * 0x9e3779b97f4a7c15ULL);
  Vector out(dim_);
  for (auto& v : out) {
    const double unit = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    v = (2.0 * unit - 1.0) * kOovRange;
  }
  return out;
}

EmbeddingTable load_vectors(std::istream& source, std::size_t expected_dim,
                            std::uint64_t oov_seed) {
  EmbeddingTable table(expected_dim, oov_seed);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_spaces(line);

    if (line_no == 1 && fields.size() == 2) {
      std::size_t count = 0;
      std::size_t dim = 0;
      if (parse_count(fields[0], count) && parse_count(fields[1], dim)) {
        if (dim != expected_dim) {
          throw ParseError(line_no, "header declares dim " + std::to_string(dim) + ", expected " +
                                        std::to_string(expected_dim));
        }
        continue;
      }
    }

    if (fields.size() != expected_dim + 1) {
      throw ParseError(line_no, "expected " + std::to_string(expected_dim) +
                                    " components, found " + std::to_string(fields.size() - 1));
    }
    if (fields[0].empty()) throw ParseError(line_no, "empty word");
    Vector vec(expected_dim);
    for (std::size_t i = 0; i < expected_dim; ++i) {
      if (!parse_double(fields[i + 1], vec[i]) || !std::isfinite(vec[i])) {
        throw ParseError(line_no, "component " + std::to_string(i + 1) + " is not a number: '" +
                                      std::string(fields[i + 1]) + "'");
      }
    }
    table.insert(std::string(fields[0]), std::move(vec));
  }
  return table;
}

EmbeddingTable load_vectors_file(const std::string& path, std::size_t expected_dim,
                                 std::uint64_t oov_seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vectors file: " + path);
  return load_vectors(in, expected_dim, oov_seed);
}

std::size_t EmbeddedSequence::real_count() const {
  std::size_t n = 0;
  for (bool m : mask) n += m ? 1 : 0;
  return n;
}

EmbeddedSequence embed_sequence(const EmbeddingTable& table, const TokenSequence& seq,
                                std::size_t max_len) {
  if (max_len == 0) throw std::invalid_argument("embed_sequence: max_len must be >= 1");
  EmbeddedSequence out;
  out.vectors.reserve(max_len);
  out.mask.reserve(max_len);
  for (std::size_t t = 0; t < max_len; ++t) {
    if (t < seq.tokens.size()) {
      out.vectors.push_back(table.lookup(seq.tokens[t]));
      out.mask.push_back(true);
    } else {
      out.vectors.emplace_back(table.dim());
      out.mask.push_back(false);
    }
  }
  return out;
}

}  // namespace medqa
