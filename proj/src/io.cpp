#include "bloomlab/io.hpp"

#include <cstdio>

namespace bloomlab {

std::string fmt12(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace bloomlab
