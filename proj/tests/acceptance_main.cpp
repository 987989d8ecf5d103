#include <iostream>

#include "acceptance_suite.hpp"

int main() { return acceptance::run_all(std::cout) ? 0 : 1; }
