#include <iostream>

#include "coase/acceptance.hpp"
#include "coase/bandit_env.hpp"

int main(int argc, char** argv) {
  const std::string suite = argc > 1 ? argv[1] : "all";
  try {
    bool ok = true;
    for (const auto& r : coase::run_acceptance(suite)) {
      std::cout << coase::format_result(r) << std::endl;
      ok = ok && r.passed;
    }
    return ok ? 0 : 2;
  } catch (const coase::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
