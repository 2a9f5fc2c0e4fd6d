#include "convexflow/log.hpp"

#include <iostream>
#include <utility>

namespace convexflow {
namespace {

WarningSink& sink() {
  static WarningSink s = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return s;
}

}  // namespace

WarningSink set_warning_sink(WarningSink s) { return std::exchange(sink(), std::move(s)); }

void warn(std::string_view message) {
  if (sink()) sink()(message);
}

}  // namespace convexflow
