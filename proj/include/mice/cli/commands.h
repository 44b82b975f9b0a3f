#ifndef MICE_CLI_COMMANDS_H_
#define MICE_CLI_COMMANDS_H_

namespace mice::cli {

// Entry point of the `mice` tool. Returns the process exit status: 0 on
// success, nonzero when any command failed.
int Main(int argc, char** argv);

}  // namespace mice::cli

#endif  // MICE_CLI_COMMANDS_H_
