#include "cutstefan/log.hpp"

#include <iostream>
#include <mutex>

namespace cutstefan {

namespace {

std::mutex g_mutex;

void to_stderr(LogLevel level, const std::string& m) {
  std::cerr << (level == LogLevel::Warning ? "warning: " : "") << m << '\n';
}

LogSink& sink() {
  static LogSink s = to_stderr;
  return s;
}

} // namespace

void set_log_sink(LogSink s) {
  std::lock_guard lock(g_mutex);
  sink() = std::move(s);
}

void reset_log_sink() { set_log_sink(to_stderr); }

void log_message(LogLevel level, const std::string& message) {
  std::lock_guard lock(g_mutex);
  if (sink()) sink()(level, message);
}

} // namespace cutstefan
