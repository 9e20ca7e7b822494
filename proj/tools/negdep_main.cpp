#include "negdep/cli.hpp"

int main(int argc, char** argv) { return negdep::cli::run(argc, argv); }
