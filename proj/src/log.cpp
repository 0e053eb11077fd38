#include "relaybf/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

namespace relaybf::log {

Level threshold() {
    static const Level cached = [] {
        const char* env = std::getenv("RELAY_BEAMFORM_LOG");
        if (env == nullptr) return Level::Error;
        if (std::strcmp(env, "debug") == 0) return Level::Debug;
        if (std::strcmp(env, "info") == 0) return Level::Info;
        return Level::Error;
    }();
    return cached;
}

void write(Level level, const std::string& msg) {
    if (level > threshold()) return;
    static std::mutex mu;
    static const char* const tags[] = {"error", "info", "debug"};
    std::scoped_lock lock(mu);
    std::fprintf(stderr, "[relay-beamform %s] %s\n", tags[static_cast<int>(level)], msg.c_str());
}

}  // namespace relaybf::log
