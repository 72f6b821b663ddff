#pragma once

#include <functional>
#include <string>

namespace audvault {

using WarningSink = std::function<void(const std::string&)>;

/// Replaces the warning sink; an empty function restores the stderr default.
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace audvault
