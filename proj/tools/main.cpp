#include "cmpsmooth/cli_app.hpp"

int main(int argc, char** argv) { return cmpsmooth::cli::run(argc, argv); }
