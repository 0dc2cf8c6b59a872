#pragma once

namespace aggrlab {

// Batch CLI entry point.  Exit codes: 0 success, 1 validation/usage error,
// 2 verification-battery failure.
int cli_main(int argc, const char* const* argv);

}  // namespace aggrlab
