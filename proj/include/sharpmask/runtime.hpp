#pragma once

namespace sharpmask {

/// Process-wide settings every entry point applies before touching tensors:
/// one intra-op thread, and a heap that keeps large tensor buffers instead of
/// returning them to the OS after every step.
void configure_runtime();

}  // namespace sharpmask
