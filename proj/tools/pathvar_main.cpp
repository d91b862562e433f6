#include "pathvar/cli_app.hpp"

int main(int argc, char** argv) { return pathvar::run_cli(argc, argv); }
