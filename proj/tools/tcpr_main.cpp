#include "tcpr/cli.hpp"

int main(int argc, char** argv) { return tcpr::run_cli(argc, argv); }
