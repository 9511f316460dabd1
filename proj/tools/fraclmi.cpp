#include "cli_app.hpp"

int main(int argc, char** argv) { return fraclmi::cli::run(argc, argv); }
