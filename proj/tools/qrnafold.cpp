#include "qrna/cli.hpp"

int main(int argc, char** argv) { return qrna::run_cli(argc, argv); }
