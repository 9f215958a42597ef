#pragma once

#include "core/poly.hpp"

namespace cdgl {

enum class LinVerdict { Valid, Invalid, Unsupported };

// Decides validity of a quantifier-free sequent over rational linear
// arithmetic: hyps |- goal holds in the reals iff Valid. Ground rational
// equalities are propagated first, so products that collapse to linear form
// under them stay inside the fragment. Unsupported when some atom remains
// nonlinear or a formula is not quantifier-free first-order.
LinVerdict decide_linear_sequent(const std::vector<FormulaPtr>& hyps, const FormulaPtr& goal);

}  // namespace cdgl
