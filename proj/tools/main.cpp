#include "segsem_cli.hpp"

int main(int argc, char** argv) { return segsem::cli::run(argc, argv); }
