#include "qhecke/cli.hpp"

int main(int argc, char** argv) { return qhecke::cli::run(argc, argv); }
