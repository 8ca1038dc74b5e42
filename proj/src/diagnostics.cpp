#include "nnl/diagnostics.hpp"

#include <iostream>
#include <utility>

namespace nnl {

namespace {

WarningSink& current_sink() {
  static WarningSink sink = [](const std::string& msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return sink;
}

}  // namespace

void warn(const std::string& message) {
  if (current_sink()) current_sink()(message);
}

WarningSink set_warning_sink(WarningSink sink) {
  return std::exchange(current_sink(), std::move(sink));
}

}  // namespace nnl
