#include "nnl/io.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "nnl/data.hpp"

namespace nnl {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw DataError("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& contents) {
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(contents.data()), contents.size()));
}

}  // namespace nnl
