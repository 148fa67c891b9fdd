#include "bbmlab/cli.hpp"

int main(int argc, char** argv) { return bbmlab::cli::run_main(argc, argv); }
