#include <iostream>

#include "fwave/acceptance.hpp"

int main() {
  const auto results = fwave::run_acceptance();
  fwave::print_results(std::cout, results);
  for (const auto& r : results)
    if (!r.pass) return 3;
  return 0;
}
