#pragma once

#include <functional>
#include <string>

namespace nnl {

/// Non-fatal warnings (constant weight init, ragged stride, ...). The default
/// sink writes "warning: <msg>" to stderr.
using WarningSink = std::function<void(const std::string&)>;

void warn(const std::string& message);

/// Installs `sink` and returns the previous one.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace nnl
