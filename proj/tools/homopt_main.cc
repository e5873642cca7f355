#include "homopt/cli.h"

int main(int argc, char** argv) { return homopt::cli::Run(argc, argv); }
