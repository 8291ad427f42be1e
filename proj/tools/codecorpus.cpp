// SPDX-License-Identifier: Apache-2.0
#include "codecorpus/cli/cli.hpp"

int main(int argc, char** argv) { return codecorpus::cli::run(argc, argv); }
