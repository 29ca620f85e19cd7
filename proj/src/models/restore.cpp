#include "sharpmask/checkpoint.hpp"
#include "sharpmask/error.hpp"
#include "sharpmask/models.hpp"

namespace sharpmask {

GeneratorG1 restore_g1(const StageCheckpoint& checkpoint) {
  if (checkpoint.stage != StageTag::FdnG1) {
    throw Error(ErrorKind::Contract, "restore_g1: checkpoint stage is " +
                                         std::string(to_string(checkpoint.stage)));
  }
  GeneratorG1 g1(checkpoint.architecture.get<G1Config>());
  restore_checkpoint(*g1, checkpoint);
  g1->eval();
  return g1;
}

GeneratorG2 restore_g2(const StageCheckpoint& checkpoint) {
  if (checkpoint.stage != StageTag::VenG2) {
    throw Error(ErrorKind::Contract, "restore_g2: checkpoint stage is " +
                                         std::string(to_string(checkpoint.stage)));
  }
  GeneratorG2 g2(checkpoint.architecture.get<G2Config>());
  restore_checkpoint(*g2, checkpoint);
  g2->eval();
  return g2;
}

}  // namespace sharpmask
