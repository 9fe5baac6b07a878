#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

namespace scneugm {

// Global worker cap for parallel sections (0 = hardware concurrency).
void set_thread_cap(int n);
int effective_threads();

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks; callers
// must only write to disjoint state per index so parallel == serial.
void parallel_for(int n, const std::function<void(int)>& fn);

std::string base64_encode(const uint8_t* data, size_t len);
std::vector<uint8_t> base64_decode(const std::string& text);

std::string encode_doubles_b64(const std::vector<double>& values);
std::vector<double> decode_doubles_b64(const std::string& text);

// Deterministic float formatting shared by the CSV artifacts.
std::string format_double(double v);

// CSV writer: one '#' comment line (config hash + seed), then a header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& comment,
            const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void close();

  static std::string num(double v) { return format_double(v); }
  static std::string num(int v) { return std::to_string(v); }
  static std::string num(long v) { return std::to_string(v); }
  static std::string num(size_t v) { return std::to_string(v); }

 private:
  std::ofstream out_;
};

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }
  double seconds() const { return ms() / 1000.0; }

 private:
  std::chrono::steady_clock::time_point start_;
};

// FNV-1a over a string; used for config hashes in artifact names.
uint64_t fnv1a(const std::string& text);
std::string hex64(uint64_t v);

}  // namespace scneugm
