#pragma once

// Declarative grid functions: resolution-independent descriptions that can be
// realized on any grid. Used for projector directions and FWT probes.

#include <string>
#include <variant>

#include "silt/grid_space.hpp"

namespace silt {

struct ZeroFunction {};

struct ConstantFunction {
  double value = 1.0;
};

// 1_[a,b], ends snapped to grid nodes.
struct IndicatorFunction {
  double a = 0.0;
  double b = 1.0;
};

// sin(m * pi * t), sampled at cell midpoints.
struct SinusoidFunction {
  int m = 1;
};

// t^p for p >= 1, sampled at cell midpoints.
struct PowerFunction {
  double p = 1.0;
};

using FunctionSpec =
    std::variant<ZeroFunction, ConstantFunction, IndicatorFunction, SinusoidFunction, PowerFunction>;

GridFunction realize(const FunctionSpec& spec, const GridContext& ctx);

// Step functions are those whose continuum version is piecewise constant
// (constants and indicators); sinusoids and powers are declared smooth.
bool is_step(const FunctionSpec& spec) noexcept;
bool is_zero(const FunctionSpec& spec) noexcept;

std::string describe(const FunctionSpec& spec);

}  // namespace silt
