#include "naop/log.hpp"

#include <iostream>
#include <mutex>

namespace naop {

namespace {
std::mutex g_mutex;
void to_stderr(const std::string& m) { std::cerr << "naop: warning: " << m << '\n'; }
WarningSink g_sink = to_stderr;
}  // namespace

void set_warning_sink(WarningSink sink) {
    std::lock_guard lock(g_mutex);
    g_sink = std::move(sink);
}

void reset_warning_sink() { set_warning_sink(to_stderr); }

void warn(const std::string& message) {
    std::lock_guard lock(g_mutex);
    if (g_sink) g_sink(message);
}

}  // namespace naop
