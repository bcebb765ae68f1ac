#include "gwasdl/cli/commands.hpp"

int main(int argc, char** argv) { return gwasdl::cli::run(argc, argv); }
