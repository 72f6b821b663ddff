#include "audvault/log.hpp"

#include <iostream>
#include <mutex>

namespace audvault {

namespace {
std::mutex sink_mutex;
WarningSink sink;
}  // namespace

void set_warning_sink(WarningSink s) {
    std::lock_guard lk(sink_mutex);
    sink = std::move(s);
}

void warn(const std::string& message) {
    std::lock_guard lk(sink_mutex);
    if (sink) {
        sink(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

}  // namespace audvault
