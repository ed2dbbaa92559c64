#include "rfmm/errors.hpp"

#include <iostream>

namespace rfmm {

void warn(std::string_view message) { std::cerr << "warning: " << message << '\n'; }

}  // namespace rfmm
