#include "vizsim/cli.hpp"

int main(int argc, char** argv) { return vizsim::cli::run(argc, argv); }
