#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace degenctrl {

// Block format: "DGBK", uint32 version, uint32 rank, uint64 dims[rank], then
// row-major little-endian doubles.
void write_block(const std::string& path, const std::vector<std::size_t>& dims,
                 const std::vector<double>& data);
struct Block {
  std::vector<std::size_t> dims;
  std::vector<double> data;
};
Block read_block(const std::string& path);

// Shortest text that parses back to the same double.
std::string format_double(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::initializer_list<std::string> header);
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);
  void raw_row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
};

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);
std::string file_hash(const std::string& path);

}  // namespace degenctrl
