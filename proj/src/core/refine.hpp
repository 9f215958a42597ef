#pragma once

#include "core/kernel.hpp"

namespace cdgl {

// Forward rule application: instantiate a refinement rule's metavariables,
// get its conclusion and the exact premise obligations back. Assembling a
// derivation node whose premises check yields an accepted derivation.
struct Instantiation {
    GamePtr alpha, beta, gamma, delta;
    FormulaPtr phi, psi;           // test conditions, cut formula, invariant
    TermPtr term, eps;             // assignment rhs / duration / epsilon
    VarId var, m0;                 // assigned variable / metric ghost
    std::optional<unsigned> rank;  // for the elimination rules
};

struct PremiseGoal {
    bool is_proof;  // kernel proof premise vs sub-derivation premise
    Context ctx;
    FormulaPtr goal;
};

struct RuleApplication {
    FormulaPtr conclusion;
    std::vector<PremiseGoal> premises;
};

struct SchemaMismatch : std::runtime_error {
    explicit SchemaMismatch(const std::string& what) : std::runtime_error(what) {}
};

RuleApplication apply_rule(RuleName rule, const Instantiation& inst, const Context& ctx);

// Premise obligations of a derivation node against a concrete goal.
// Throws RejectError when the goal does not match the rule schema or a side
// condition fails.
std::vector<PremiseGoal> rule_premises(const Context& ctx, const Derivation& d,
                                       const FormulaPtr& goal, const std::string& path);

// Hypothesis labels the loopInline rule introduces in its premise contexts.
inline constexpr const char* kInvLabel = "_inv";
inline constexpr const char* kDecLabel = "_dec";
inline constexpr const char* kGuardLabel = "_grd";

}  // namespace cdgl
