#pragma once

// The `rppg` command-line tool. Subcommands:
//   keygen, synth, perturb, estimate, hr, evaluate, keyspace, compare, replay

#include <ostream>
#include <string>
#include <vector>

namespace rppg::cli {

/// Runs one invocation (arguments without the program name). Errors are
/// reported as a JSON object on `err`; the return value is the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace rppg::cli
