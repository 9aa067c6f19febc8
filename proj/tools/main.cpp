#include "rydion/cli.hpp"

int main(int argc, char** argv) { return rydion::cli::run(argc, argv); }
