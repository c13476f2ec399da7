#pragma once

#include <string>

namespace flowphd::diag {

/// Writes a one-line diagnostic to stderr.
void warn(const std::string& message);

}  // namespace flowphd::diag
