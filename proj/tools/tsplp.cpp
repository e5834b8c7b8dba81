#include <tsplp/cli.hpp>

int main(int argc, char** argv) { return tsplp::cli::main(argc, argv); }
