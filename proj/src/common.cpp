#include "prunelab/common.hpp"

#include <charconv>

namespace prunelab {

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

}  // namespace prunelab
