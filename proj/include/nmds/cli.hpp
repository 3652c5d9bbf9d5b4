// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace nmds::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the nmds binary and the CLI tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nmds::cli
