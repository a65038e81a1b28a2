#pragma once

namespace prunelab {

inline constexpr const char* kArtifactVersion = "1.0.0";

}  // namespace prunelab
