#include "degenctrl/io.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <iterator>
#include <sstream>
#include <stdexcept>

namespace degenctrl {

namespace {
constexpr char kMagic[4] = {'D', 'G', 'B', 'K'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_block(const std::string& path, const std::vector<std::size_t>& dims,
                 const std::vector<double>& data) {
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  if (total != data.size()) throw std::invalid_argument("block dims do not match data size");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kMagic, 4);
  const std::uint32_t rank = static_cast<std::uint32_t>(dims.size());
  out.write(reinterpret_cast<const char*>(&kVersion), sizeof kVersion);
  out.write(reinterpret_cast<const char*>(&rank), sizeof rank);
  for (auto d : dims) {
    const std::uint64_t v = d;
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
}

Block read_block(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error(path + ": not a block file");
  std::uint32_t version = 0, rank = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&rank), sizeof rank);
  if (version != kVersion) throw std::runtime_error(path + ": unsupported block version");
  Block b;
  std::size_t total = 1;
  for (std::uint32_t r = 0; r < rank; ++r) {
    std::uint64_t d = 0;
    in.read(reinterpret_cast<char*>(&d), sizeof d);
    b.dims.push_back(static_cast<std::size_t>(d));
    total *= static_cast<std::size_t>(d);
  }
  b.data.resize(total);
  in.read(reinterpret_cast<char*>(b.data.data()), static_cast<std::streamsize>(total * sizeof(double)));
  if (!in) throw std::runtime_error(path + ": truncated block file");
  return b;
}

std::string format_double(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(const std::string& path, std::initializer_list<std::string> header)
    : CsvWriter(path, std::vector<std::string>(header)) {}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path) {
  if (!out_) throw std::runtime_error("cannot write " + path);
  raw_row(header);
}

void CsvWriter::row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  raw_row(cells);
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hex64(fnv1a64(bytes));
}

}  // namespace degenctrl
