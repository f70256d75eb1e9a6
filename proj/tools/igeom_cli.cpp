#include "igeom/cli/commands.hpp"

int main(int argc, char** argv) { return igeom::cli::run(argc, argv); }
