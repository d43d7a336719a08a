#include "acceptance.hpp"

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

// Usage: etcdos_acceptance [criterion ids...]
int main(int argc, char** argv) {
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    return etcdos::acceptance::run_suite(std::cout, only);
}
