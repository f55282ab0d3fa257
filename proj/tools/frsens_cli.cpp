#include "frsens/cli.hpp"

int main(int argc, char** argv) { return frsens::run_cli(argc, argv); }
