#include "solvlab/error.hpp"

#include <iostream>
#include <mutex>

namespace solvlab {

namespace {
std::mutex g_sink_mutex;
WarningSink g_sink = [](const std::string& msg) { std::cerr << "solvlab warning: " << msg << '\n'; };
}  // namespace

void set_warning_sink(WarningSink sink) {
  std::lock_guard lock(g_sink_mutex);
  g_sink = sink ? std::move(sink) : [](const std::string&) {};
}

void warn(const std::string& message) {
  std::lock_guard lock(g_sink_mutex);
  g_sink(message);
}

}  // namespace solvlab
