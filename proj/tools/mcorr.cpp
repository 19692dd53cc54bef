#include "mcorr/harness/commands.hpp"

int main(int argc, char** argv) { return mcorr::harness::run_cli(argc, argv); }
