#include "oneshot/cli.hpp"

int main(int argc, char** argv) { return oneshot::run_cli(argc, argv); }
