#include "benthic/cli.hpp"

int main(int argc, char** argv) { return benthic::cli::run(argc, argv); }
