#pragma once

#include <string>
#include <vector>

namespace eegmatch {

// Runs one command line (program name first). Returns 0 on success, 2 on
// usage errors and 1 when the command fails on its data.
int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace eegmatch
