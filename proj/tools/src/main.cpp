#include "sosdec_cli/app.hpp"

int main(int argc, char** argv) { return sosdec::cli::run_main(argc, argv); }
