#include "graphnls/cli.hpp"

int main(int argc, char** argv) { return graphnls::run_main(argc, argv); }
