#pragma once

#include <map>

#include "core/prooft.hpp"

namespace cdgl {

// An arithmetic or side-condition fact the kernel could not discharge
// internally, routed through the first-order oracle.
struct Obligation {
    enum class Status { DecidedTrue, DecidedFalse, Assumed };
    Context context;  // first-order hypotheses in scope (informational)
    FormulaPtr claim;
    Status status;
    std::string origin;  // rule tag
    std::string path;    // proof-term path
};

struct CheckReport {
    bool accepted = false;
    std::string reason;  // nonempty when rejected
    std::string path;    // rejection path
    std::vector<Obligation> obligations;

    int assumed_count() const;
    // One line per obligation, final line VERDICT ACCEPTED|REJECTED <n>.
    std::string render() const;
};

struct RejectError {
    std::string reason;
    std::string path;
};

// Shared checking engine for proofs (kernel.cpp) and refinement derivations
// (refine.cpp); the two calculi reference each other through boxref/byref.
class Engine {
public:
    std::vector<Obligation> obligations;
    bool infer_mode = false;
    std::map<std::string, unsigned> inferred_ranks;  // path of elim node -> rank

    void check(const Context& ctx, const ProofPtr& p, const FormulaPtr& goal,
               const std::string& path);
    FormulaPtr synth(const Context& ctx, const ProofPtr& p, const std::string& path);
    void check_deriv(const Context& ctx, const DerivPtr& d, const FormulaPtr& goal,
                     const std::string& path);

    Obligation::Status decide(const Context& ctx, const FormulaPtr& claim,
                              const std::string& path);
    void push_obligation(const Context& ctx, const FormulaPtr& claim, const std::string& origin,
                         const std::string& path);

private:
    void check_refine_elim(const Context& ctx, bool boxMode, std::optional<unsigned> rank,
                           const GamePtr& alpha, const ProofPtr& main, const DerivPtr& deriv,
                           const FormulaPtr& goal, const std::string& path);
    void check_solve_side(const std::vector<std::pair<VarId, TermPtr>>& slns,
                          const GamePtr& ode, const VarId& timeVar, const std::string& path);
};

// Validate p against ctx |- goal, recording the oracle obligations.
CheckReport check_proof(const Context& ctx, const ProofPtr& p, const FormulaPtr& goal);

// Validate a refinement derivation against ctx |- goal.
CheckReport check_refinement(const Context& ctx, const DerivPtr& d, const FormulaPtr& goal);

// First-order oracle: Decided for ground comparisons and quantifier-free
// linear-rational sequents, Assumed otherwise. Throws RejectError when a
// modality appears (NotFirstOrder).
Obligation::Status check_arith(const Context& ctx, const FormulaPtr& claim);

// Per-equation solution check: d(sln_i)/d(timeVar) == f_i composed with the
// solution, and sln_i at timeVar=0 is the initial variable.
std::vector<bool> check_solution(const std::vector<std::pair<VarId, TermPtr>>& slns,
                                 const std::vector<OdeEquation>& equations, const VarId& timeVar);

// Rank inference: fills every unannotated refinement elimination with the
// least admissible rank and annotates refinement formulas in the goal.
struct RankedProof {
    FormulaPtr goal;
    ProofPtr proof;
};
RankedProof infer_ranks(const Context& ctx, const ProofPtr& p, const FormulaPtr& goal);

// (phi)' for the DI rule: comparisons map to their differential counterparts,
// conjunctions distribute; anything else is not differentiable here.
FormulaPtr formula_differential(const FormulaPtr& f);

// Assignment order such that no solution term reads an already-overwritten
// ODE variable; empty when the dependencies are cyclic.
std::vector<size_t> solution_assign_order(const std::vector<std::pair<VarId, TermPtr>>& slns);

// The constructed premiss of the demonic solve rule (exposed for reuse by the
// strategy compiler and for diagnostics).
FormulaPtr bsolve_premiss(const GamePtr& ode, const std::vector<std::pair<VarId, TermPtr>>& slns,
                          const VarId& timeVar, const VarId& boundVar, const FormulaPtr& post);

VarId solve_time_var(const Context& ctx, const FormulaPtr& goal,
                     const std::vector<std::pair<VarId, TermPtr>>& slns);

std::string fresh_label(const Context& ctx, const std::string& stem);

}  // namespace cdgl
