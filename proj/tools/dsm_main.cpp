#include <string>
#include <vector>

#include "dsm/cli.hpp"

int main(int argc, char** argv) { return dsm::cli::run(std::vector<std::string>(argv, argv + argc)); }
