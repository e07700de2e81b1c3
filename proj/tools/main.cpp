// Copyright (C) 2026 The tokrecover Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "tokrecover/cli.hpp"

int main(int argc, char** argv) { return tokrecover::cli::run(argc, argv, std::cout, std::cerr); }
