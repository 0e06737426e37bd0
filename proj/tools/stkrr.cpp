#include <iostream>

#include "stkrr/cli.hpp"

int main(int argc, char** argv) {
  const auto parsed = stkrr::cli::parse_args(argc, argv);
  if (!parsed.config) {
    (parsed.exit_code == 0 ? std::cout : std::cerr) << parsed.message;
    return parsed.exit_code;
  }
  return stkrr::cli::execute(*parsed.config, std::cout, std::cerr);
}
