#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <cstdarg>

// Minimal stderr logger. Level comes from the GAZELOAD_LOG environment
// variable (error|warn|info|debug); default is warn. stdout stays clean for
// pipe-mode streaming.

namespace gazeload::log {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline Level threshold() {
  static Level lvl = [] {
    const char* e = std::getenv("GAZELOAD_LOG");
    if (!e) return Level::Warn;
    if (std::strcmp(e, "error") == 0) return Level::Error;
    if (std::strcmp(e, "warn") == 0) return Level::Warn;
    if (std::strcmp(e, "info") == 0) return Level::Info;
    if (std::strcmp(e, "debug") == 0) return Level::Debug;
    return Level::Warn;
  }();
  return lvl;
}

inline void emit(Level lvl, const char* tag, const char* fmt, va_list ap) {
  if (lvl > threshold()) return;
  std::fprintf(stderr, "[gazeload %s] ", tag);
  std::vfprintf(stderr, fmt, ap);
  std::fputc('\n', stderr);
}

#define GAZELOAD_DEFINE_LOG_FN(name, level, tag)        \
  inline void name(const char* fmt, ...) {              \
    va_list ap;                                         \
    va_start(ap, fmt);                                  \
    emit(level, tag, fmt, ap);                          \
    va_end(ap);                                         \
  }

GAZELOAD_DEFINE_LOG_FN(error, Level::Error, "error")
GAZELOAD_DEFINE_LOG_FN(warn, Level::Warn, "warn")
GAZELOAD_DEFINE_LOG_FN(info, Level::Info, "info")
GAZELOAD_DEFINE_LOG_FN(debug, Level::Debug, "debug")

#undef GAZELOAD_DEFINE_LOG_FN

}  // namespace gazeload::log
