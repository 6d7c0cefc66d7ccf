#pragma once

#include <string_view>

namespace kdisc {

/// The four seed families of translation-invariant kernels.
enum class Family { Exponential, Multiquadric, Gaussian, Truncated };

constexpr std::string_view family_tag(Family f) {
  switch (f) {
    case Family::Exponential: return "exp";
    case Family::Multiquadric: return "mq";
    case Family::Gaussian: return "gauss";
    case Family::Truncated: return "trunc";
  }
  return "?";
}

}  // namespace kdisc
