#include "sharpmask/runtime.hpp"

#include <malloc.h>

#include <torch/torch.h>

namespace sharpmask {

void configure_runtime() {
  torch::set_num_threads(1);
  mallopt(M_MMAP_MAX, 0);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
}

}  // namespace sharpmask
