#include "core/sim.hpp"

#include <cmath>
#include <sstream>

#include "core/analysis.hpp"
#include "core/poly.hpp"
#include "core/surface.hpp"

namespace cdgl {

const Rational& SimState::get(const VarId& v) const {
    auto it = values.find(v);
    if (it == values.end()) throw std::out_of_range("uninitialized variable " + v.str());
    return it->second;
}

const char* verdict_str(Trace::Verdict v) {
    switch (v) {
        case Trace::Verdict::PostconditionHolds: return "POSTCONDITION-HOLDS";
        case Trace::Verdict::PostconditionFails: return "POSTCONDITION-FAILS";
        case Trace::Verdict::TestFailed: return "TEST-FAILED";
        case Trace::Verdict::DomainViolated: return "DOMAIN-VIOLATED";
        case Trace::Verdict::ScriptExhausted: return "SCRIPT-EXHAUSTED";
        case Trace::Verdict::NonSystemGame: return "NON-SYSTEM-GAME";
        case Trace::Verdict::EvalError: return "EVAL-ERROR";
    }
    return "?";
}

namespace {

struct Interrupt {
    Trace::Verdict verdict;
    std::string detail;
};

bool cmp_holds(CompareOp op, const Rational& l, const Rational& r, bool inexact, double tol) {
    if (!inexact) {
        switch (op) {
            case CompareOp::Le: return l <= r;
            case CompareOp::Lt: return l < r;
            case CompareOp::Eq: return l == r;
            case CompareOp::Ne: return l != r;
            case CompareOp::Gt: return l > r;
            case CompareOp::Ge: return l >= r;
        }
        return false;
    }
    double dl = l.to_double(), dr = r.to_double();
    switch (op) {
        case CompareOp::Le: return dl <= dr + tol;
        case CompareOp::Lt: return dl < dr + tol;
        case CompareOp::Eq: return std::fabs(dl - dr) <= tol;
        case CompareOp::Ne: return std::fabs(dl - dr) > tol;
        case CompareOp::Gt: return dl > dr - tol;
        case CompareOp::Ge: return dl >= dr - tol;
    }
    return false;
}

bool eval_fo(const FormulaPtr& f, const SimState& s, double tol) {
    FormulaPtr a, b;
    if (match_not(f, a)) return !eval_fo(a, s, tol);
    if (match_and(f, a, b)) return eval_fo(a, s, tol) && eval_fo(b, s, tol);
    if (match_or(f, a, b)) return eval_fo(a, s, tol) || eval_fo(b, s, tol);
    if (match_imp(f, a, b)) return !eval_fo(a, s, tol) || eval_fo(b, s, tol);
    if (f->kind == Formula::Kind::Compare)
        return cmp_holds(f->op, eval_term(f->lhs, s.values), eval_term(f->rhs, s.values),
                         s.inexact, tol);
    throw Interrupt{Trace::Verdict::EvalError,
                    "tests must be quantifier-free first-order: " + pretty(f)};
}

class Runner {
public:
    Runner(const DemonScript& script, const SimOptions& opts, Trace& trace)
        : script_(script), opts_(opts), trace_(trace) {}

    void run(const GamePtr& g, SimState& s) {
        switch (g->kind) {
            case Game::Kind::Test: {
                if (!eval_fo(g->cond, s, opts_.tolerance))
                    throw Interrupt{Trace::Verdict::TestFailed, pretty(g->cond)};
                log("?" + pretty(g->cond), s);
                return;
            }
            case Game::Kind::Assign: {
                Rational v = eval_term(g->rhs, s.values);
                s.set(g->var, std::move(v));
                log(g->var.str() + " := " + pretty(g->rhs), s);
                return;
            }
            case Game::Kind::NondetAssign: {
                DemonDecision d = take(DemonDecision::Kind::Value, "V for " + g->var.str());
                s.set(g->var, d.value);
                log(g->var.str() + " := *", s);
                return;
            }
            case Game::Kind::Ode:
                run_ode(g, s);
                return;
            case Game::Kind::Choice: {
                DemonDecision d = take2(DemonDecision::Kind::ChoiceLeft,
                                        DemonDecision::Kind::ChoiceRight, "L or R");
                run(d.kind == DemonDecision::Kind::ChoiceLeft ? g->left : g->right, s);
                return;
            }
            case Game::Kind::Seq:
                run(g->left, s);
                run(g->right, s);
                return;
            case Game::Kind::Repeat: {
                for (int i = 0;; ++i) {
                    if (i >= script_.iteration_cap)
                        throw Interrupt{Trace::Verdict::ScriptExhausted, "iteration cap reached"};
                    DemonDecision d = take2(DemonDecision::Kind::Continue,
                                            DemonDecision::Kind::Stop, "C or S");
                    if (d.kind == DemonDecision::Kind::Stop) return;
                    run(g->body, s);
                }
            }
            case Game::Kind::Dual:
                throw Interrupt{Trace::Verdict::NonSystemGame, pretty(g)};
        }
    }

private:
    const DemonScript& script_;
    const SimOptions& opts_;
    Trace& trace_;
    size_t cursor_ = 0;

    void log(std::string point, const SimState& s) {
        trace_.steps.push_back({std::move(point), s});
    }

    DemonDecision take(DemonDecision::Kind want, const std::string& what) {
        if (cursor_ >= script_.decisions.size())
            throw Interrupt{Trace::Verdict::ScriptExhausted, "expected " + what};
        DemonDecision d = script_.decisions[cursor_++];
        if (d.kind != want) throw Interrupt{Trace::Verdict::ScriptExhausted, "expected " + what};
        return d;
    }

    DemonDecision take2(DemonDecision::Kind a, DemonDecision::Kind b, const std::string& what) {
        if (cursor_ >= script_.decisions.size())
            throw Interrupt{Trace::Verdict::ScriptExhausted, "expected " + what};
        DemonDecision d = script_.decisions[cursor_++];
        if (d.kind != a && d.kind != b)
            throw Interrupt{Trace::Verdict::ScriptExhausted, "expected " + what};
        return d;
    }

    void check_domain(const GamePtr& ode, const SimState& s, const Rational& time) {
        if (!eval_fo(ode->cond, s, opts_.tolerance))
            throw Interrupt{Trace::Verdict::DomainViolated,
                            "t = " + time.to_string() + ": " + pretty(ode->cond)};
    }

    void run_ode(const GamePtr& g, SimState& s) {
        DemonDecision d = take(DemonDecision::Kind::Duration, "D (duration)");
        const Rational& dur = d.value;
        if (dur.is_negative())
            throw Interrupt{Trace::Verdict::ScriptExhausted, "negative duration"};
        VarSet bound;
        for (const auto& eq : g->equations) {
            bound.insert(eq.var);
            bound.insert(primed_var(eq.var.name));
        }
        bool constantRhs = true;
        for (const auto& eq : g->equations)
            for (const auto& v : free_vars(eq.rhs)) constantRhs = constantRhs && !bound.count(v);
        if (constantRhs && !opts_.force_rk4) {
            // exact linear closed form x(t) = x0 + f * t
            std::vector<Rational> rates, starts;
            for (const auto& eq : g->equations) rates.push_back(eval_term(eq.rhs, s.values));
            for (const auto& eq : g->equations) starts.push_back(s.get(eq.var));
            Rational step = dur / Rational(opts_.ode_steps);
            for (int k = 0; k <= opts_.ode_steps; ++k) {
                Rational tk = step * Rational(k);
                SimState probe = s;
                for (size_t i = 0; i < g->equations.size(); ++i)
                    probe.set(g->equations[i].var, starts[i] + rates[i] * tk);
                check_domain(g, probe, tk);
            }
            for (size_t i = 0; i < g->equations.size(); ++i) {
                s.set(g->equations[i].var, starts[i] + rates[i] * dur);
                s.set(primed_var(g->equations[i].var.name), rates[i]);
            }
            log("{ode for " + dur.to_string() + "}", s);
            return;
        }
        // classical fixed-step fourth-order integration in doubles
        std::map<VarId, double> ds;
        for (const auto& [v, r] : s.values) ds[v] = r.to_double();
        for (const auto& eq : g->equations)
            if (!ds.count(eq.var)) throw std::out_of_range("uninitialized variable " + eq.var.str());
        double h = dur.to_double() / opts_.ode_steps;
        auto deriv = [&](const std::map<VarId, double>& st, const TermPtr& rhs) {
            SimState tmp;
            for (const auto& [vv, dv] : st) tmp.set(vv, Rational::from_double(dv));
            return eval_term(rhs, tmp.values).to_double();
        };
        auto domain_at = [&](const std::map<VarId, double>& st, double tk) {
            SimState probe = s;
            probe.inexact = true;
            for (const auto& [vv, dv] : st) probe.set(vv, Rational::from_double(dv));
            check_domain(g, probe, Rational::from_double(tk));
        };
        domain_at(ds, 0.0);
        for (int k = 0; k < opts_.ode_steps; ++k) {
            std::map<VarId, double> k1, k2, k3, k4, tmp;
            for (const auto& eq : g->equations) k1[eq.var] = deriv(ds, eq.rhs);
            tmp = ds;
            for (const auto& eq : g->equations) tmp[eq.var] = ds[eq.var] + h / 2 * k1[eq.var];
            for (const auto& eq : g->equations) k2[eq.var] = deriv(tmp, eq.rhs);
            tmp = ds;
            for (const auto& eq : g->equations) tmp[eq.var] = ds[eq.var] + h / 2 * k2[eq.var];
            for (const auto& eq : g->equations) k3[eq.var] = deriv(tmp, eq.rhs);
            tmp = ds;
            for (const auto& eq : g->equations) tmp[eq.var] = ds[eq.var] + h * k3[eq.var];
            for (const auto& eq : g->equations) k4[eq.var] = deriv(tmp, eq.rhs);
            for (const auto& eq : g->equations)
                ds[eq.var] += h / 6 * (k1[eq.var] + 2 * k2[eq.var] + 2 * k3[eq.var] + k4[eq.var]);
            domain_at(ds, (k + 1) * h);
        }
        for (const auto& eq : g->equations) s.set(eq.var, Rational::from_double(ds[eq.var]));
        SimState endpoint = s;
        for (const auto& eq : g->equations)
            s.set(primed_var(eq.var.name), eval_term(eq.rhs, endpoint.values));
        s.inexact = true;
        log("{ode for " + dur.to_string() + " (rk4)}", s);
    }
};

}  // namespace

Trace run_system(const GamePtr& g, const SimState& init, const DemonScript& script,
                 const FormulaPtr& post, const SimOptions& opts) {
    Trace trace;
    SimState s = init;
    try {
        if (!is_system(g)) throw Interrupt{Trace::Verdict::NonSystemGame, pretty(g)};
        Runner runner(script, opts, trace);
        runner.run(g, s);
        if (eval_fo(post, s, opts.tolerance)) {
            trace.verdict = Trace::Verdict::PostconditionHolds;
        } else {
            trace.verdict = Trace::Verdict::PostconditionFails;
            trace.detail = pretty(post);
        }
    } catch (const Interrupt& i) {
        trace.verdict = i.verdict;
        trace.detail = i.detail;
    } catch (const std::out_of_range& e) {
        trace.verdict = Trace::Verdict::EvalError;
        trace.detail = e.what();
    }
    trace.final_state = s;
    return trace;
}

DemonScript parse_script(const std::string& text) {
    DemonScript script;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok) || tok.rfind("--", 0) == 0) continue;
        DemonDecision d;
        if (tok == "L") {
            d.kind = DemonDecision::Kind::ChoiceLeft;
        } else if (tok == "R") {
            d.kind = DemonDecision::Kind::ChoiceRight;
        } else if (tok == "C") {
            d.kind = DemonDecision::Kind::Continue;
        } else if (tok == "S") {
            d.kind = DemonDecision::Kind::Stop;
        } else if (tok == "V" || tok == "D") {
            std::string num;
            if (!(ls >> num)) throw std::invalid_argument("script: missing rational after " + tok);
            d.kind = tok == "V" ? DemonDecision::Kind::Value : DemonDecision::Kind::Duration;
            d.value = Rational::parse(num);
            if (d.kind == DemonDecision::Kind::Duration && d.value.is_negative())
                throw std::invalid_argument("script: durations must be nonnegative");
        } else {
            throw std::invalid_argument("script: unknown decision " + tok);
        }
        script.decisions.push_back(d);
    }
    return script;
}

SimState parse_init(const std::string& text) {
    SimState s;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string name, eq, num;
        if (!(ls >> name) || name.rfind("--", 0) == 0) continue;
        if (!(ls >> eq >> num) || eq != "=")
            throw std::invalid_argument("init: expected `var = rational`, got: " + line);
        VarId v =
            name.back() == '\'' ? primed_var(name.substr(0, name.size() - 1)) : base_var(name);
        s.set(v, Rational::parse(num));
    }
    return s;
}

std::string render_trace(const Trace& t) {
    std::ostringstream os;
    int i = 0;
    for (const auto& step : t.steps) {
        os << i++ << "\t" << step.point;
        for (const auto& [v, r] : step.state.values) os << "\t" << v.str() << "=" << r.to_string();
        os << "\n";
    }
    os << "VERDICT " << verdict_str(t.verdict);
    if (!t.detail.empty()) os << " " << t.detail;
    os << "\n";
    return os.str();
}

}  // namespace cdgl
