#include "cli.hpp"

int main(int argc, char** argv) { return ferkit::cli::run(argc, argv); }
