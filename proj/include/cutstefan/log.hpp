#pragma once

#include <functional>
#include <string>

namespace cutstefan {

enum class LogLevel { Info, Warning };

using LogSink = std::function<void(LogLevel, const std::string&)>;

/// Replaces the process-wide sink (stderr by default). An empty sink mutes output.
void set_log_sink(LogSink sink);
/// Back to the stderr sink.
void reset_log_sink();
void log_message(LogLevel level, const std::string& message);

inline void log_info(const std::string& m) { log_message(LogLevel::Info, m); }
inline void log_warning(const std::string& m) { log_message(LogLevel::Warning, m); }

} // namespace cutstefan
