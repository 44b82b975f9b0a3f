#include "mice/cli/commands.h"

int main(int argc, char** argv) { return mice::cli::Main(argc, argv); }
