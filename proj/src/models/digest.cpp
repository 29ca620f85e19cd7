#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <memory>

#include "sharpmask/checkpoint.hpp"
#include "sharpmask/error.hpp"

namespace sharpmask {

namespace {

struct Sha256 {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx{EVP_MD_CTX_new(), &EVP_MD_CTX_free};

  Sha256() {
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorKind::Contract, "sha256: initialization failed");
    }
  }
  void update(const void* data, size_t n) { EVP_DigestUpdate(ctx.get(), data, n); }
  void update(std::string_view s) { update(s.data(), s.size()); }
  void update_u64(uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    update(b, 8);
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int n = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &n);
    std::string out;
    char buf[3];
    for (unsigned int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), "%02x", md[i]);
      out += buf;
    }
    return out;
  }
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes);
  return h.hex();
}

std::string tensor_digest(const std::vector<std::pair<std::string, torch::Tensor>>& named) {
  std::vector<const std::pair<std::string, torch::Tensor>*> order;
  for (const auto& entry : named) order.push_back(&entry);
  std::sort(order.begin(), order.end(),
            [](const auto* a, const auto* b) { return a->first < b->first; });
  Sha256 h;
  for (const auto* entry : order) {
    const auto t = entry->second.detach().to(torch::kCPU).contiguous();
    h.update(entry->first);
    h.update("\0", 1);
    h.update(c10::toString(t.scalar_type()));
    h.update_u64(static_cast<uint64_t>(t.dim()));
    for (int64_t d = 0; d < t.dim(); ++d) h.update_u64(static_cast<uint64_t>(t.size(d)));
    h.update(t.data_ptr(), static_cast<size_t>(t.numel() * t.element_size()));
  }
  return h.hex();
}

std::string parameter_digest(const torch::nn::Module& module) {
  std::vector<std::pair<std::string, torch::Tensor>> named;
  for (const auto& p : module.named_parameters()) named.emplace_back(p.key(), p.value());
  for (const auto& b : module.named_buffers()) named.emplace_back(b.key(), b.value());
  return tensor_digest(named);
}

}  // namespace sharpmask
