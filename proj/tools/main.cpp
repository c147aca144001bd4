#include "pixforge/cli.hpp"

int main(int argc, char** argv) { return pixforge::cli::run(argc, argv); }
