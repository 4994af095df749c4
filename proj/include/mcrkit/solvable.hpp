#pragma once

#include <memory>

#include "mcrkit/model.hpp"

namespace mcrkit {

/// Result of one combination solve: the global minimizer of
/// xi_orig * e_orig(f) + xi_switch * e_switch(f) over the class, together
/// with that model's exact empirical losses.
struct ProbeOutcome {
    ModelPtr model;
    double objective_value = 0.0;
    double e_orig = 0.0;
    double e_switch = 0.0;
};

/// A model class over a fixed dataset that can globally minimize linear
/// combinations of the original and switched empirical losses.
class SolvableClass {
  public:
    virtual ~SolvableClass() = default;
    virtual ProbeOutcome minimize_combination(double xi_orig, double xi_switch) const = 0;
};

} // namespace mcrkit
