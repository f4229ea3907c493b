#pragma once

namespace fairkm {

inline constexpr const char* kVersion = "0.1.0";

#if defined(__VERSION__)
inline constexpr const char* kCompiler = __VERSION__;
#else
inline constexpr const char* kCompiler = "unknown";
#endif

}  // namespace fairkm
