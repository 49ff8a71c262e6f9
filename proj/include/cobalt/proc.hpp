#pragma once

#include <string>
#include <vector>

namespace cobalt {

struct ProcessResult {
    int exit_code = -1;  // -1 when the process was killed (timeout/signal)
    bool timed_out = false;
    std::string out;
    std::string err;
};

// Runs argv[0] with the given arguments (no shell), capturing stdout/stderr.
// timeout_ms <= 0 means no deadline. On expiry the child is SIGKILLed and the
// partial output is returned with timed_out set. Failure to spawn the binary
// at all throws InfraError.
ProcessResult run_process(const std::vector<std::string>& argv, int timeout_ms = 0);

// Splits a command string on whitespace into argv parts (no quoting rules).
std::vector<std::string> split_command(const std::string& command);

}  // namespace cobalt
