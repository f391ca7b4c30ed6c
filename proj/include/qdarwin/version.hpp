#pragma once

namespace qdarwin {

inline constexpr const char* kToolName = "qdarwin";
inline constexpr const char* kToolVersion = "0.1.0";

// Version tag of the deterministic random-number scheme. Bump whenever the
// stream derivation or the normal-variate algorithm changes, since output
// files are only reproducible for a fixed tag.
inline constexpr const char* kRngVersion = "qdrng-v1";

} // namespace qdarwin
