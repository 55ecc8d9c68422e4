#pragma once

// Reads back the PRISM subset produced by the emitter, so emitted text can
// be compared semantically with the network it came from. Test use only.

#include <string>
#include <vector>

#include "chorprism/prism.hpp"

namespace chorprism::testing {

struct ReadModel {
  ModelKind kind = ModelKind::Ctmc;
  ConstEnv consts;
  std::vector<PrismModule> modules;
};

ReadModel read_prism(const std::string& text);

}  // namespace chorprism::testing
