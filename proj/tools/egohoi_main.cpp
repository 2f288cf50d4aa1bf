#include "egohoi/harness.hpp"

int main(int argc, char** argv) { return egohoi::run_cli(argc, argv); }
