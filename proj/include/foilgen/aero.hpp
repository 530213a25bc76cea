#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foilgen/geometry.hpp"

namespace foilgen::aero {

inline constexpr double kMinAlphaDeg = -10.0;
inline constexpr double kMaxAlphaDeg = 15.0;

// Free stream of unit speed at angle of attack alpha (degrees).
struct FlowCondition {
    double alpha_deg = 5.0;

    void validate() const;
    friend bool operator==(const FlowCondition&, const FlowCondition&) = default;
};

struct PanelSolution {
    std::vector<double> gamma;  // vortex strength per node, counter-clockwise order
    std::vector<double> cp;     // pressure coefficient per panel
    double c_l = 0.0;

    double kutta_residual() const { return gamma.front() + gamma.back(); }
};

// Linear-strength vortex panel method in stream function form, with a Kutta
// condition at the trailing edge. The lift coefficient comes from the total bound circulation.
PanelSolution solve_lift(const geometry::AirfoilShape& shape, const FlowCondition& flow);

struct LabelOutcome {
    std::optional<double> c_l;
    std::string error;  // empty when c_l is set

    bool ok() const { return c_l.has_value(); }
};

// One outcome per shape, in input order. Solver failures are recorded, not thrown.
std::vector<LabelOutcome> label_dataset(std::span<const geometry::AirfoilShape> shapes, const FlowCondition& flow);

}  // namespace foilgen::aero
