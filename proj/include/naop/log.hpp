#pragma once

#include <functional>
#include <string>

namespace naop {

using WarningSink = std::function<void(const std::string&)>;

/// Replaces the warning sink (default: stderr). Pass nullptr to silence warnings.
void set_warning_sink(WarningSink sink);
/// Restores the default stderr sink.
void reset_warning_sink();
void warn(const std::string& message);

}  // namespace naop
