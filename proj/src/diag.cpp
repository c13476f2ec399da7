#include "flowphd/diag.hpp"

#include <iostream>

namespace flowphd::diag {

void warn(const std::string& message) {
    std::cerr << "flowphd: warning: " << message << '\n';
}

}  // namespace flowphd::diag
