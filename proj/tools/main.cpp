#include "qgraph/cli.hpp"

int main(int argc, char** argv) { return qgraph::cli_main(argc, argv); }
