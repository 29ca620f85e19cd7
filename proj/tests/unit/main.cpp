#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "sharpmask/runtime.hpp"

int main(int argc, char** argv) {
  sharpmask::configure_runtime();
  doctest::Context context(argc, argv);
  return context.run();
}
