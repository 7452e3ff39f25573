#include "confpinch/cli.hpp"

int main(int argc, char** argv) { return confpinch::main_cli(argc, argv); }
