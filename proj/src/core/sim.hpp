#pragma once

#include <map>

#include "core/ast.hpp"

namespace cdgl {

// Numeric executor for dual-free systems against scripted demon decisions.
// Discrete steps evaluate exactly over rationals; ODE integration promotes to
// doubles (classical fixed-step RK4) unless every right-hand side is constant
// over the run, in which case the exact linear closed form applies.

struct SimState {
    std::map<VarId, Rational> values;
    bool inexact = false;  // passed through floating-point integration

    const Rational& get(const VarId& v) const;
    void set(const VarId& v, Rational r) { values[v] = std::move(r); }
};

struct DemonDecision {
    enum class Kind { ChoiceLeft, ChoiceRight, Value, Duration, Continue, Stop };
    Kind kind;
    Rational value;  // Value / Duration
};

struct DemonScript {
    std::vector<DemonDecision> decisions;
    int iteration_cap = 1000;
};

struct SimOptions {
    int ode_steps = 1024;       // fixed RK4 steps per ODE run
    double tolerance = 1e-9;    // comparison slack for inexact states
    bool force_rk4 = false;     // skip the constant-rhs closed form
};

struct TraceStep {
    std::string point;
    SimState state;
};

struct Trace {
    enum class Verdict {
        PostconditionHolds,
        PostconditionFails,
        TestFailed,
        DomainViolated,
        ScriptExhausted,
        NonSystemGame,
        EvalError,
    };
    Verdict verdict;
    std::string detail;
    SimState final_state;
    std::vector<TraceStep> steps;
};

const char* verdict_str(Trace::Verdict v);

Trace run_system(const GamePtr& g, const SimState& init, const DemonScript& script,
                 const FormulaPtr& post, const SimOptions& opts = {});

// One decision per line: L / R / V <rational> / D <rational> / C / S.
DemonScript parse_script(const std::string& text);
// Lines of the form `var = rational`.
SimState parse_init(const std::string& text);
// Tab-separated (step, variable=value ...) lines plus a VERDICT line.
std::string render_trace(const Trace& t);

}  // namespace cdgl
