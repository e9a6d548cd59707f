#include <iostream>

#include "aqsim/app/cli.hpp"

int main(int argc, char** argv) {
  return aqsim::app::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
