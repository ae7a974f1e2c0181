#include "dpw/cli_app.hpp"

int main(int argc, char** argv) { return dpw::run_cli(argc, argv); }
