#include "mutadetect/log.hpp"

#include <cstdio>

namespace mutadetect {

namespace {
bool g_quiet = false;
}

void set_log_quiet(bool quiet) { g_quiet = quiet; }

void log_info(const std::string& msg) {
  if (!g_quiet) std::fprintf(stderr, "[info] %s\n", msg.c_str());
}

void log_warn(const std::string& msg) {
  if (!g_quiet) std::fprintf(stderr, "[warn] %s\n", msg.c_str());
}

}  // namespace mutadetect
