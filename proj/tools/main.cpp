#include "cli.hpp"

int main(int argc, char** argv) { return evid::cli::run(argc, argv); }
