#pragma once

namespace hgn::cli {

// Exit status: 0 success, 2 usage error, 1 runtime failure (with a
// machine-readable category on stderr).
int run(int argc, const char* const* argv);

}  // namespace hgn::cli
