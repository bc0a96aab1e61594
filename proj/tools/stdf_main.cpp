#include "stdf/cli.hpp"

int main(int argc, char** argv) { return stdf::cli::run(argc, argv); }
