#pragma once
namespace cpdg {
inline constexpr const char* kVersion = "0.1.0";
}
