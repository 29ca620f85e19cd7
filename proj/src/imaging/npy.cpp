#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include "sharpmask/codec.hpp"
#include "sharpmask/error.hpp"

namespace fs = std::filesystem;

namespace sharpmask {

namespace {
constexpr char kMagic[] = "\x93NUMPY";
}

void save_npy(const fs::path& path, const torch::Tensor& array) {
  const auto t = array.detach().to(torch::kCPU).contiguous();
  std::string descr;
  if (t.scalar_type() == torch::kFloat) {
    descr = "<f4";
  } else if (t.scalar_type() == torch::kDouble) {
    descr = "<f8";
  } else {
    throw Error(ErrorKind::Validation, "save_npy: only float32/float64 arrays are supported");
  }
  std::ostringstream shape;
  shape << '(';
  for (int64_t d = 0; d < t.dim(); ++d) {
    shape << t.size(d) << (t.dim() == 1 || d + 1 < t.dim() ? ", " : "");
  }
  shape << ')';
  std::string header = "{'descr': '" + descr + "', 'fortran_order': False, 'shape': " +
                       shape.str() + ", }";
  // magic(6) + version(2) + length(2) + header + '\n' padded to 64 bytes.
  const size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(kMagic, 6);
  const char version[2] = {1, 0};
  out.write(version, 2);
  const auto len = static_cast<uint16_t>(header.size());
  const char len_bytes[2] = {static_cast<char>(len & 0xff), static_cast<char>(len >> 8)};
  out.write(len_bytes, 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(static_cast<const char*>(t.data_ptr()),
            static_cast<std::streamsize>(t.numel() * t.element_size()));
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

torch::Tensor load_npy(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  char magic[6];
  char version[2];
  unsigned char len_bytes[2];
  in.read(magic, 6);
  in.read(version, 2);
  in.read(reinterpret_cast<char*>(len_bytes), 2);
  if (!in || std::memcmp(magic, kMagic, 6) != 0 || version[0] != 1) {
    throw Error(ErrorKind::Io, path.string() + ": not a version-1 .npy file");
  }
  const size_t len = len_bytes[0] | (static_cast<size_t>(len_bytes[1]) << 8);
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));

  std::smatch m;
  if (!std::regex_search(header, m, std::regex(R"('descr':\s*'([<|][fF][48])')"))) {
    throw Error(ErrorKind::Io, path.string() + ": unsupported dtype");
  }
  const auto dtype = m[1].str().back() == '4' ? torch::kFloat : torch::kDouble;
  if (header.find("'fortran_order': False") == std::string::npos) {
    throw Error(ErrorKind::Io, path.string() + ": fortran order is not supported");
  }
  if (!std::regex_search(header, m, std::regex(R"('shape':\s*\(([^)]*)\))"))) {
    throw Error(ErrorKind::Io, path.string() + ": missing shape");
  }
  std::vector<int64_t> shape;
  const std::string dims = m[1].str();
  const std::regex num(R"(\d+)");
  for (auto it = std::sregex_iterator(dims.begin(), dims.end(), num); it != std::sregex_iterator();
       ++it) {
    shape.push_back(std::stoll(it->str()));
  }
  auto t = torch::empty(shape, dtype);
  in.read(static_cast<char*>(t.data_ptr()), static_cast<std::streamsize>(t.numel() * t.element_size()));
  if (!in) throw Error(ErrorKind::Io, path.string() + ": truncated data");
  return t;
}

}  // namespace sharpmask
