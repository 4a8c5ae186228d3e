#pragma once

#include <functional>
#include <string_view>

namespace cdcache {

using WarningSink = std::function<void(std::string_view)>;

// Warnings go to stderr unless a sink is installed. Passing an empty sink
// restores the default.
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace cdcache
