#include "scneugm/util.hpp"

#include <atomic>
#include <cstdio>
#include <cstring>
#include <stdexcept>
#include <thread>

namespace scneugm {

namespace {
std::atomic<int> g_thread_cap{0};

const char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}  // namespace

void set_thread_cap(int n) { g_thread_cap.store(n < 0 ? 0 : n); }

int effective_threads() {
  int cap = g_thread_cap.load();
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (cap <= 0) return hw;
  return cap < hw ? cap : hw;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int workers = effective_threads();
  if (workers > n) workers = n;
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const int chunk = (n + workers - 1) / workers;
  auto run = [&fn, n, chunk](int w) {
    const int lo = w * chunk;
    const int hi = std::min(n, lo + chunk);
    for (int i = lo; i < hi; ++i) fn(i);
  };
  for (int w = 1; w < workers; ++w) pool.emplace_back(run, w);
  run(0);
  for (auto& t : pool) t.join();
}

std::string base64_encode(const uint8_t* data, size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (size_t i = 0; i < len; i += 3) {
    uint32_t chunk = static_cast<uint32_t>(data[i]) << 16;
    if (i + 1 < len) chunk |= static_cast<uint32_t>(data[i + 1]) << 8;
    if (i + 2 < len) chunk |= static_cast<uint32_t>(data[i + 2]);
    out.push_back(kB64Alphabet[(chunk >> 18) & 0x3f]);
    out.push_back(kB64Alphabet[(chunk >> 12) & 0x3f]);
    out.push_back(i + 1 < len ? kB64Alphabet[(chunk >> 6) & 0x3f] : '=');
    out.push_back(i + 2 < len ? kB64Alphabet[chunk & 0x3f] : '=');
  }
  return out;
}

std::vector<uint8_t> base64_decode(const std::string& text) {
  int lut[256];
  std::memset(lut, -1, sizeof(lut));
  for (int i = 0; i < 64; ++i) lut[static_cast<uint8_t>(kB64Alphabet[i])] = i;
  std::vector<uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  uint32_t chunk = 0;
  int have = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = lut[static_cast<uint8_t>(c)];
    if (v < 0) throw std::runtime_error("invalid base64 character");
    chunk = (chunk << 6) | static_cast<uint32_t>(v);
    if (++have == 4) {
      out.push_back(static_cast<uint8_t>(chunk >> 16));
      out.push_back(static_cast<uint8_t>(chunk >> 8));
      out.push_back(static_cast<uint8_t>(chunk));
      have = 0;
      chunk = 0;
    }
  }
  if (have == 2) {
    out.push_back(static_cast<uint8_t>(chunk >> 4));
  } else if (have == 3) {
    out.push_back(static_cast<uint8_t>(chunk >> 10));
    out.push_back(static_cast<uint8_t>(chunk >> 2));
  } else if (have != 0) {
    throw std::runtime_error("truncated base64 payload");
  }
  return out;
}

std::string encode_doubles_b64(const std::vector<double>& values) {
  // little-endian float64 payload
  std::vector<uint8_t> bytes(values.size() * sizeof(double));
  std::memcpy(bytes.data(), values.data(), bytes.size());
  return base64_encode(bytes.data(), bytes.size());
}

std::vector<double> decode_doubles_b64(const std::string& text) {
  const std::vector<uint8_t> bytes = base64_decode(text);
  if (bytes.size() % sizeof(double) != 0)
    throw std::runtime_error("float64 payload size not a multiple of 8");
  std::vector<double> values(bytes.size() / sizeof(double));
  std::memcpy(values.data(), bytes.data(), bytes.size());
  return values;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::string& comment,
                     const std::vector<std::string>& header) {
  std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::trunc);
  if (!out_) throw std::runtime_error("cannot open " + path.string());
  out_ << "# " << comment << "\n";
  for (size_t i = 0; i < header.size(); ++i)
    out_ << header[i] << (i + 1 < header.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i)
    out_ << cells[i] << (i + 1 < cells.size() ? "," : "\n");
}

void CsvWriter::close() { out_.close(); }

uint64_t fnv1a(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace scneugm
