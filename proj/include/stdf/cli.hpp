// Command line front end. run() returns the process exit code:
//   0 success, 1 usage error, 2 configuration or runtime error.
#pragma once

#include <string>
#include <vector>

namespace stdf::cli {

int run(const std::vector<std::string>& args);  // args without the program name
int run(int argc, char** argv);

}  // namespace stdf::cli
