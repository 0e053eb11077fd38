#pragma once

#include <string>

namespace relaybf::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

/// Current threshold, parsed once from RELAY_BEAMFORM_LOG (error|info|debug).
Level threshold();

void write(Level level, const std::string& msg);

inline void error(const std::string& msg) { write(Level::Error, msg); }
inline void info(const std::string& msg) { write(Level::Info, msg); }
inline void debug(const std::string& msg) { write(Level::Debug, msg); }

}  // namespace relaybf::log
