// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "nmds/cli.hpp"

int main(int argc, char** argv) { return nmds::cli::run(argc, argv, std::cout, std::cerr); }
