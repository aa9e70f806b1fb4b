#include <cstdlib>
#include <iostream>
#include <string>

#include "onc/acceptance.hpp"

int main(int argc, char** argv) {
  onc::acceptance::Options opts;
  opts.scratch_dir = std::filesystem::current_path() / "acceptance-scratch";
  for (int i = 1; i < argc; ++i) opts.only.push_back(std::atoi(argv[i]));
  bool ok = true;
  for (const auto& r : onc::acceptance::run_all(opts)) {
    std::cout << onc::acceptance::format(r) << "\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : 3;
}
