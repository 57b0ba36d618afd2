#include "cli.hpp"

int main(int argc, char** argv) { return deltabox::cli::run(argc, argv); }
