#pragma once

#include <complex>
#include <cstdint>
#include <string_view>
#include <vector>

namespace goldenphy {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

inline constexpr std::string_view kToolName = "goldenphy";
inline constexpr std::string_view kToolVersion = "0.1.0";

}  // namespace goldenphy
