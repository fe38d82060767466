#pragma once

#include <functional>
#include <string>

namespace fmloc {

using WarningSink = std::function<void(const std::string&)>;

/// Route library warnings somewhere other than stderr. Passing an empty
/// function restores the default. Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);

void warn(const std::string& message);

} // namespace fmloc
