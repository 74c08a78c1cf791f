#include "ghdpp/cli.hpp"

int main(int argc, char** argv) { return ghdpp::cli::dispatch(argc, argv); }
