#include "archetype/cli.hpp"

int main(int argc, char** argv) { return archetype::cli_main(argc, argv); }
