#pragma once

#include <string>

#include "prunelab/datagen.hpp"

namespace prunelab {

/// Binary dataset container: header (spec fields, seed, balance-resample
/// count), generation provenance (embedding matrix, hyperplane, latents), then
/// row-major input matrices and label vectors for both splits. Byte layout in
/// the README; little-endian, format version 1.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Inspection export: one CSV per split with columns x0..x{D-1},label.
void export_dataset_csv(const Dataset& ds, const std::string& train_path,
                        const std::string& test_path);

}  // namespace prunelab
