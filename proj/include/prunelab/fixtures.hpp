#pragma once

#include <string>
#include <vector>

#include "prunelab/stats.hpp"

namespace prunelab {

// Bundled reference tables of minimum matching weights-remaining (%),
// mean +/- std per (model, dimensionality) cell. They feed the analysis
// pipeline without requiring any training:
//   table1: ResNet20 widths 16/32/64 across input resolutions (extrinsic)
//   table2: ResNet20 widths 8/16/32 across latent dimensions (intrinsic)
//   table3: MLP-P-Q models across task dimensions
const std::vector<GroupStat>& fixture_table(const std::string& name);

std::vector<std::string> fixture_names();

}  // namespace prunelab
