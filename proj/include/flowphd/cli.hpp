#pragma once

namespace flowphd {

/// Entry point of the flowphd command line tool. Exit codes: 0 success,
/// 2 configuration error, 3 runtime numerical failure.
int cli_main(int argc, const char* const* argv);

}  // namespace flowphd
