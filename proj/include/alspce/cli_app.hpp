#pragma once

namespace alspce {

// Entry point of the alspce command-line tool; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace alspce
