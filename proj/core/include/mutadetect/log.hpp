#pragma once

#include <string>

namespace mutadetect {

// Diagnostics go to stderr so stdout and output files stay reproducible.
void log_info(const std::string& msg);
void log_warn(const std::string& msg);
void set_log_quiet(bool quiet);

}  // namespace mutadetect
