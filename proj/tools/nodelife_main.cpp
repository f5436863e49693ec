#include "nodelife/cli.hpp"

int main(int argc, char** argv) { return nodelife::cli::main(argc, argv); }
