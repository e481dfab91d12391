#include "mvg/cli.hpp"

int main(int argc, char** argv) { return mvg::cli::run(argc, argv); }
