#include "ccp/cli.hpp"

int main(int argc, char** argv) { return ccp::run_cli(argc, argv); }
