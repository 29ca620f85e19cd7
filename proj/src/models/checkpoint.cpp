#include <cstring>
#include <fstream>

#include "sharpmask/checkpoint.hpp"
#include "sharpmask/error.hpp"

namespace fs = std::filesystem;

namespace sharpmask {

namespace {

constexpr char kMagic[16] = {'S', 'H', 'A', 'R', 'P', 'M', 'A', 'S',
                             'K', '-', 'C', 'K', 'P', 'T', '\n', '\x01'};

torch::ScalarType parse_dtype(const std::string& name) {
  if (name == "Float") return torch::kFloat;
  if (name == "Double") return torch::kDouble;
  if (name == "Long") return torch::kLong;
  throw Error(ErrorKind::Io, "checkpoint: unsupported dtype " + name);
}

}  // namespace

std::string_view to_string(StageTag tag) {
  switch (tag) {
    case StageTag::FdnG1: return "FDN_G1";
    case StageTag::FdnD1: return "FDN_D1";
    case StageTag::VenG2: return "VEN_G2";
    case StageTag::VenD2: return "VEN_D2";
    case StageTag::Detector: return "DETECTOR";
  }
  return "UNKNOWN";
}

StageTag parse_stage_tag(std::string_view text) {
  for (auto t : {StageTag::FdnG1, StageTag::FdnD1, StageTag::VenG2, StageTag::VenD2,
                 StageTag::Detector}) {
    if (text == to_string(t)) return t;
  }
  throw Error(ErrorKind::Io, "checkpoint: unknown stage tag '" + std::string(text) + "'");
}

StageCheckpoint capture_checkpoint(const torch::nn::Module& module, StageTag stage,
                                   nlohmann::json architecture, nlohmann::json metadata) {
  StageCheckpoint ckpt;
  ckpt.stage = stage;
  ckpt.architecture = std::move(architecture);
  ckpt.metadata = std::move(metadata);
  for (const auto& p : module.named_parameters()) {
    ckpt.tensors.emplace_back(p.key(), p.value().detach().clone());
  }
  for (const auto& b : module.named_buffers()) {
    ckpt.tensors.emplace_back(b.key(), b.value().detach().clone());
  }
  std::sort(ckpt.tensors.begin(), ckpt.tensors.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  ckpt.digest = tensor_digest(ckpt.tensors);
  return ckpt;
}

void restore_checkpoint(torch::nn::Module& module, const StageCheckpoint& checkpoint) {
  torch::NoGradGuard no_grad;
  std::map<std::string, torch::Tensor> targets;
  for (auto& p : module.named_parameters()) targets.emplace(p.key(), p.value());
  for (auto& b : module.named_buffers()) targets.emplace(b.key(), b.value());
  if (targets.size() != checkpoint.tensors.size()) {
    throw Error(ErrorKind::Contract, "checkpoint: tensor count does not match the module");
  }
  for (const auto& [name, value] : checkpoint.tensors) {
    auto it = targets.find(name);
    if (it == targets.end() || it->second.sizes() != value.sizes()) {
      throw Error(ErrorKind::Contract, "checkpoint: tensor '" + name + "' missing or mis-shaped");
    }
    it->second.copy_(value);
  }
}

void save_checkpoint(const fs::path& path, const StageCheckpoint& checkpoint) {
  nlohmann::json header;
  header["format_version"] = 1;
  header["stage"] = std::string(to_string(checkpoint.stage));
  header["architecture"] = checkpoint.architecture;
  header["metadata"] = checkpoint.metadata;
  header["digest"] = {{"algorithm", "sha256"}, {"hex", checkpoint.digest}};
  auto index = nlohmann::json::array();
  uint64_t offset = 0;
  std::vector<torch::Tensor> blobs;
  for (const auto& [name, value] : checkpoint.tensors) {
    auto t = value.detach().to(torch::kCPU).contiguous();
    const auto nbytes = static_cast<uint64_t>(t.numel() * t.element_size());
    index.push_back({{"name", name},
                     {"dtype", c10::toString(t.scalar_type())},
                     {"shape", t.sizes().vec()},
                     {"offset", offset},
                     {"nbytes", nbytes}});
    offset += nbytes;
    blobs.push_back(std::move(t));
  }
  header["tensors"] = index;
  const std::string text = header.dump();

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  unsigned char len[8];
  for (int i = 0; i < 8; ++i) len[i] = static_cast<unsigned char>(text.size() >> (8 * i));
  out.write(reinterpret_cast<const char*>(len), 8);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : blobs) {
    out.write(static_cast<const char*>(t.data_ptr()),
              static_cast<std::streamsize>(t.numel() * t.element_size()));
  }
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

StageCheckpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read checkpoint " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  unsigned char len[8];
  in.read(reinterpret_cast<char*>(len), 8);
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::Io, path.string() + ": not a checkpoint file");
  }
  uint64_t header_len = 0;
  for (int i = 0; i < 8; ++i) header_len |= static_cast<uint64_t>(len[i]) << (8 * i);
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));

  StageCheckpoint ckpt;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
    ckpt.stage = parse_stage_tag(header.at("stage").get<std::string>());
    ckpt.architecture = header.at("architecture");
    ckpt.metadata = header.at("metadata");
    ckpt.digest = header.at("digest").at("hex").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, path.string() + ": corrupt header: " + e.what());
  }
  for (const auto& entry : header.at("tensors")) {
    auto t = torch::empty(entry.at("shape").get<std::vector<int64_t>>(),
                          parse_dtype(entry.at("dtype").get<std::string>()));
    const auto nbytes = entry.at("nbytes").get<uint64_t>();
    if (nbytes != static_cast<uint64_t>(t.numel() * t.element_size())) {
      throw Error(ErrorKind::Io, path.string() + ": tensor size mismatch in index");
    }
    in.read(static_cast<char*>(t.data_ptr()), static_cast<std::streamsize>(nbytes));
    ckpt.tensors.emplace_back(entry.at("name").get<std::string>(), std::move(t));
  }
  if (!in) throw Error(ErrorKind::Io, path.string() + ": truncated tensor blob");

  const auto recomputed = tensor_digest(ckpt.tensors);
  if (recomputed != ckpt.digest) {
    throw Error(ErrorKind::Contract, path.string() + ": parameter digest mismatch (stored " +
                                         ckpt.digest.substr(0, 12) + ", computed " +
                                         recomputed.substr(0, 12) + ")");
  }
  return ckpt;
}

StageCheckpoint load_checkpoint(const fs::path& path, StageTag expected) {
  auto ckpt = load_checkpoint(path);
  if (ckpt.stage != expected) {
    throw Error(ErrorKind::Contract, path.string() + ": stage tag " +
                                         std::string(to_string(ckpt.stage)) + " cannot fill a " +
                                         std::string(to_string(expected)) + " slot");
  }
  return ckpt;
}

}  // namespace sharpmask
