#pragma once

#include <string>

namespace bloomlab {

/// CSV cell text with 12 significant digits.
std::string fmt12(double v);

}  // namespace bloomlab
