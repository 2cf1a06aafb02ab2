// SPDX-License-Identifier: Apache-2.0
#include <string>
#include <vector>

#include "sgm/cli.hpp"

int main(int argc, char** argv) {
  return sgm::cli::run_cli(std::vector<std::string>(argv, argv + argc));
}
