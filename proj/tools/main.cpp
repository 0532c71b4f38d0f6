#include "ld/cli_app.hpp"

int main(int argc, char** argv) { return ld::cli_main(argc, argv); }
