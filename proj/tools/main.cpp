// SPDX-License-Identifier: Apache-2.0

#include "sst/cli.hpp"

int main(int argc, char** argv) { return sst::run_cli(argc, argv); }
