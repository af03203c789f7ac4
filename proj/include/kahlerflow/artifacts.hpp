#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace kahlerflow {

// Minimal PNG encoder: 8-bit, filter 0 rows, stored (uncompressed) deflate
// blocks. No timestamps or ancillary chunks, so identical pixels give
// byte-identical files.
void write_png_gray(const std::string& path, int width, int height,
                    const std::vector<std::uint8_t>& pixels);
void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<std::uint8_t>& rgb);

// Approximate viridis lookup for v ∈ [0,1].
void viridis(double v, std::uint8_t out[3]);

std::string sha256_hex(const std::uint8_t* data, std::size_t len);
std::string sha256_file_hex(const std::string& path);

// One numeric CSV table, all doubles printed with %.17g.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void header(const std::vector<std::string>& cols);
  void row(const std::vector<double>& vals);
  void raw_row(const std::string& line);
  void close();

 private:
  std::FILE* f_ = nullptr;
};

}  // namespace kahlerflow
