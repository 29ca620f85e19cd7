#include <numeric>

#include "sharpmask/codec.hpp"
#include "sharpmask/data.hpp"
#include "sharpmask/error.hpp"

namespace sharpmask {

BatchIterator::BatchIterator(Manifest manifest, int64_t batch_size,
                             std::optional<uint64_t> shuffle_seed)
    : manifest_(std::move(manifest)), batch_size_(batch_size), shuffle_seed_(shuffle_seed) {
  if (batch_size_ < 1) {
    throw Error(ErrorKind::Validation, "batch_size must be >= 1");
  }
  if (manifest_.empty()) {
    throw Error(ErrorKind::Validation, "cannot iterate an empty manifest");
  }
  start_epoch(0);
}

void BatchIterator::start_epoch(int64_t epoch) {
  epoch_ = epoch;
  cursor_ = 0;
  order_.resize(manifest_.size());
  std::iota(order_.begin(), order_.end(), size_t{0});
  if (shuffle_seed_) {
    deterministic_shuffle(order_, *shuffle_seed_ ^ (0xA24BAED4963EE407ULL * static_cast<uint64_t>(epoch + 1)));
  }
}

std::optional<PairBatch> BatchIterator::next() {
  std::vector<ImageBatch> reals;
  std::vector<ImageBatch> fakes;
  PairBatch batch{ImageBatch::from_tensor(torch::zeros({1, 3, 1, 1})),
                  ImageBatch::from_tensor(torch::zeros({1, 3, 1, 1})), {}, {}};
  while (cursor_ < order_.size() && static_cast<int64_t>(reals.size()) < batch_size_) {
    const size_t idx = order_[cursor_++];
    try {
      auto real = load_image(manifest_.real_file(idx), manifest_.resolution);
      auto fake = load_image(manifest_.fake_file(idx), manifest_.resolution);
      reals.push_back(std::move(real));
      fakes.push_back(std::move(fake));
      batch.indices.push_back(idx);
      batch.source_ids.push_back(manifest_.samples[idx].source_id);
    } catch (const Error&) {
      ++skipped_;
    }
  }
  if (reals.empty()) return std::nullopt;
  batch.real = concat(reals);
  batch.fake = concat(fakes);
  return batch;
}

PairBatch BatchIterator::next_cycling() {
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (auto b = next()) return std::move(*b);
    start_epoch(epoch_ + 1);
  }
  throw Error(ErrorKind::Io, "no decodable samples in manifest");
}

}  // namespace sharpmask
