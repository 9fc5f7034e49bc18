#include "annulus_moduli/cli.hpp"

int main(int argc, char** argv) { return annulus_moduli::cli::run(argc, argv); }
