#include "core/kernel.hpp"

#include <algorithm>
#include <sstream>

#include "core/analysis.hpp"
#include "core/linarith.hpp"
#include "core/poly.hpp"
#include "core/surface.hpp"

namespace cdgl {

int CheckReport::assumed_count() const {
    int n = 0;
    for (const auto& o : obligations)
        if (o.status == Obligation::Status::Assumed) ++n;
    return n;
}

std::string CheckReport::render() const {
    std::ostringstream os;
    for (const auto& o : obligations) {
        const char* st = o.status == Obligation::Status::DecidedTrue    ? "DECIDED"
                         : o.status == Obligation::Status::DecidedFalse ? "DECIDED-FALSE"
                                                                        : "ASSUMED";
        os << "OBLIGATION " << st << " " << o.origin << "@" << o.path << " ⊢ "
           << pretty(o.claim) << "\n";
    }
    if (accepted) {
        os << "VERDICT ACCEPTED " << assumed_count() << "\n";
    } else {
        os << "REASON " << reason << " at " << path << "\n";
        os << "VERDICT REJECTED " << assumed_count() << "\n";
    }
    return os.str();
}

namespace {

[[noreturn]] void reject(const std::string& reason, const std::string& path) {
    throw RejectError{reason, path};
}

VarSet sequent_vars(const Context& ctx, const FormulaPtr& goal) {
    VarSet vs = vars_of(ctx);
    VarSet gv = vars_of(goal);
    vs.insert(gv.begin(), gv.end());
    return vs;
}

bool base_name_used(const VarSet& vs, const std::string& name) {
    for (const auto& v : vs)
        if (v.name == name) return true;
    return false;
}

void require_fresh_var(const VarId& v, const VarSet& used, const std::string& what,
                       const std::string& path) {
    if (base_name_used(used, v.name))
        reject(what + " " + v.str() + " is not fresh in the sequent", path);
}

Context fo_subset(const Context& ctx) {
    Context out;
    for (const auto& a : ctx.items)
        if (is_first_order(a.formula)) out.items.push_back(a);
    return out;
}

FormulaPtr box1(GamePtr g, FormulaPtr f) { return mk_box(std::move(g), std::move(f)); }

}  // namespace

std::string fresh_label(const Context& ctx, const std::string& stem) {
    if (!ctx.has_label(stem)) return stem;
    for (unsigned i = 1;; ++i) {
        std::string cand = stem + "_" + std::to_string(i);
        if (!ctx.has_label(cand)) return cand;
    }
}

Obligation::Status check_arith(const Context& ctx, const FormulaPtr& claim) {
    if (!is_first_order(claim)) throw RejectError{"NotFirstOrder: claim contains a modality", ""};
    for (const auto& a : ctx.items)
        if (!is_first_order(a.formula))
            throw RejectError{"NotFirstOrder: hypothesis " + a.label + " contains a modality", ""};
    if (!is_quantifier_free_fo(claim)) return Obligation::Status::Assumed;
    std::vector<FormulaPtr> hyps;
    for (const auto& a : ctx.items) {
        if (!is_quantifier_free_fo(a.formula)) return Obligation::Status::Assumed;
        hyps.push_back(a.formula);
    }
    switch (decide_linear_sequent(hyps, claim)) {
        case LinVerdict::Valid:
            return Obligation::Status::DecidedTrue;
        case LinVerdict::Invalid:
            return Obligation::Status::DecidedFalse;
        case LinVerdict::Unsupported:
            return Obligation::Status::Assumed;
    }
    return Obligation::Status::Assumed;
}

Obligation::Status Engine::decide(const Context& ctx, const FormulaPtr& claim,
                                  const std::string& path) {
    try {
        return check_arith(ctx, claim);
    } catch (RejectError e) {
        e.path = path;
        throw e;
    }
}

void Engine::push_obligation(const Context& ctx, const FormulaPtr& claim, const std::string& origin,
                             const std::string& path) {
    Context fo = fo_subset(ctx);
    Obligation ob{fo, claim, decide(fo, claim, path), origin, path};
    obligations.push_back(ob);
    if (ob.status == Obligation::Status::DecidedFalse)
        reject("obligation for " + origin + " decided false: " + pretty(claim), path);
}

std::vector<bool> check_solution(const std::vector<std::pair<VarId, TermPtr>>& slns,
                                 const std::vector<OdeEquation>& equations, const VarId& timeVar) {
    std::map<VarId, Poly> composition;
    std::map<VarId, Poly> slnPolys;
    for (const auto& [v, t] : slns) {
        Poly p = Poly::from_term(t);
        slnPolys.emplace(v, p);
        composition.emplace(v, p);
    }
    std::vector<bool> verdicts;
    verdicts.reserve(equations.size());
    for (const auto& eq : equations) {
        auto it = slnPolys.find(eq.var);
        if (it == slnPolys.end()) {
            verdicts.push_back(false);
            continue;
        }
        const Poly& sln = it->second;
        Poly dt = sln.partial_derivative(timeVar);
        Poly rhs = Poly::from_term(eq.rhs).compose(composition);
        bool derivative_ok = dt == rhs;
        Poly at0 = sln.compose({{timeVar, Poly::constant(Rational(0))}});
        // a clock evolving as its own time parameter starts at zero
        Poly initial = eq.var == timeVar ? Poly::constant(Rational(0)) : Poly::variable(eq.var);
        verdicts.push_back(derivative_ok && at0 == initial);
    }
    return verdicts;
}

std::vector<size_t> solution_assign_order(const std::vector<std::pair<VarId, TermPtr>>& slns) {
    size_t n = slns.size();
    // j must precede i when sln_j reads the initial value of slns[i].var
    std::vector<VarSet> reads(n);
    for (size_t j = 0; j < n; ++j) reads[j] = free_vars(slns[j].second);
    std::vector<size_t> indeg(n, 0);
    std::vector<std::vector<size_t>> succ(n);
    for (size_t j = 0; j < n; ++j) {
        for (size_t i = 0; i < n; ++i) {
            if (i == j) continue;
            if (reads[j].count(slns[i].first)) {
                succ[j].push_back(i);
                ++indeg[i];
            }
        }
    }
    std::vector<size_t> order, queue;
    for (size_t i = 0; i < n; ++i)
        if (indeg[i] == 0) queue.push_back(i);
    std::sort(queue.begin(), queue.end());
    while (!queue.empty()) {
        size_t j = queue.front();
        queue.erase(queue.begin());
        order.push_back(j);
        for (size_t i : succ[j])
            if (--indeg[i] == 0) queue.push_back(i);
        std::sort(queue.begin(), queue.end());
    }
    if (order.size() != n) return {};
    return order;
}

VarId solve_time_var(const Context& ctx, const FormulaPtr& goal,
                     const std::vector<std::pair<VarId, TermPtr>>& slns) {
    (void)slns;  // the solutions are the only place the parameter may occur
    return base_var(fresh_name("t", sequent_vars(ctx, goal)));
}

FormulaPtr formula_differential(const FormulaPtr& f) {
    if (f->kind == Formula::Kind::Compare) {
        CompareOp op;
        switch (f->op) {
            case CompareOp::Le:
            case CompareOp::Lt:
                op = CompareOp::Le;
                break;
            case CompareOp::Ge:
            case CompareOp::Gt:
                op = CompareOp::Ge;
                break;
            case CompareOp::Eq:
                op = CompareOp::Eq;
                break;
            default:
                throw UnsupportedTerm("differential of a disequality");
        }
        return mk_compare(op, differentiate(f->lhs), differentiate(f->rhs));
    }
    FormulaPtr a, b;
    if (match_and(f, a, b)) return mk_and(formula_differential(a), formula_differential(b));
    throw UnsupportedTerm("postcondition shape is not differentiable");
}

FormulaPtr bsolve_premiss(const GamePtr& ode, const std::vector<std::pair<VarId, TermPtr>>& slns,
                          const VarId& timeVar, const VarId& boundVar, const FormulaPtr& post) {
    std::vector<size_t> order = solution_assign_order(slns);
    if (order.empty() && !slns.empty())
        throw UnsupportedTerm("solution terms are cyclically dependent");
    TermPtr tv = mk_var(timeVar);
    TermPtr rv = mk_var(boundVar);
    // [x := sln(r)] psi, the domain hypothesis at intermediate times
    FormulaPtr domAt = ode->cond;
    for (size_t k = order.size(); k-- > 0;) {
        const auto& [v, sln] = slns[order[k]];
        domAt = box1(mk_assign(v, substitute(sln, timeVar, rv)), domAt);
    }
    FormulaPtr domAll =
        mk_forall(boundVar, mk_imp(mk_and(mk_compare(CompareOp::Le, mk_int(0), rv),
                                          mk_compare(CompareOp::Le, rv, tv)),
                                   domAt));
    // [x := sln(t)][x' := f] post
    FormulaPtr inner = post;
    for (size_t k = ode->equations.size(); k-- > 0;) {
        const auto& eq = ode->equations[k];
        inner = box1(mk_assign(primed_var(eq.var.name), eq.rhs), inner);
    }
    for (size_t k = order.size(); k-- > 0;) {
        const auto& [v, sln] = slns[order[k]];
        inner = box1(mk_assign(v, sln), inner);
    }
    return mk_forall(timeVar,
                     mk_imp(mk_compare(CompareOp::Ge, tv, mk_int(0)), mk_imp(domAll, inner)));
}

void Engine::check_solve_side(const std::vector<std::pair<VarId, TermPtr>>& slns,
                              const GamePtr& ode, const VarId& timeVar, const std::string& path) {
    if (slns.size() != ode->equations.size())
        reject("solution list does not cover the ODE system", path);
    for (const auto& eq : ode->equations) {
        bool found = false;
        for (const auto& [v, t] : slns) found = found || v == eq.var;
        if (!found) reject("no solution term for " + eq.var.str(), path);
    }
    std::vector<bool> ok = check_solution(slns, ode->equations, timeVar);
    for (size_t i = 0; i < ok.size(); ++i) {
        if (!ok[i])
            reject("solution term does not solve " + ode->equations[i].var.str() + "' = " +
                       pretty(ode->equations[i].rhs) + " (time variable " + timeVar.str() + ")",
                   path);
    }
    for (const auto& [v, t] : slns) {
        for (const auto& fv : free_vars(t))
            if (fv.primed) reject("solution term for " + v.str() + " mentions " + fv.str(), path);
    }
}

FormulaPtr Engine::synth(const Context& ctx, const ProofPtr& p, const std::string& path) {
    using K = ProofTerm::Kind;
    switch (p->kind) {
        case K::Hyp: {
            const FormulaPtr* f = ctx.lookup(p->label);
            if (!f) reject("unbound hypothesis label " + p->label, path);
            return *f;
        }
        case K::Triv:
            return mk_verum();
        case K::Pair: {
            FormulaPtr a = synth(ctx, p->sub, path + "/left");
            FormulaPtr b = synth(ctx, p->sub2, path + "/right");
            return mk_and(a, b);
        }
        case K::App: {
            FormulaPtr fn = synth(ctx, p->sub, path + "/fn");
            FormulaPtr hyp, out;
            if (!match_imp(fn, hyp, out)) reject("applied proof is not an implication", path);
            check(ctx, p->sub2, hyp, path + "/arg");
            return out;
        }
        case K::AppTerm: {
            FormulaPtr fn = synth(ctx, p->sub, path + "/fn");
            VarId v;
            FormulaPtr body;
            if (!match_forall(fn, v, body)) reject("instantiated proof is not a universal", path);
            try {
                return substitute(body, v, p->term);
            } catch (const AdmissibilityError& e) {
                reject(std::string("inadmissible instantiation: ") + e.what(), path);
            }
        }
        case K::ProjL: {
            FormulaPtr f = synth(ctx, p->sub, path + "/sub");
            FormulaPtr a, b;
            if (match_and(f, a, b)) return a;
            if (f->kind == Formula::Kind::Box && f->game->kind == Game::Kind::Choice)
                return mk_box(f->game->left, f->post);
            if (f->kind == Formula::Kind::Box && f->game->kind == Game::Kind::Repeat)
                return f->post;
            reject("projL applies to pairs, [a++b] or [a*]", path);
        }
        case K::ProjR: {
            FormulaPtr f = synth(ctx, p->sub, path + "/sub");
            FormulaPtr a, b;
            if (match_and(f, a, b)) return b;
            if (f->kind == Formula::Kind::Box && f->game->kind == Game::Kind::Choice)
                return mk_box(f->game->right, f->post);
            if (f->kind == Formula::Kind::Box && f->game->kind == Game::Kind::Repeat)
                return mk_box(f->game->body, mk_box(f->game, f->post));
            reject("projR applies to pairs, [a++b] or [a*]", path);
        }
        case K::SeqElim: {
            FormulaPtr f = synth(ctx, p->sub, path + "/sub");
            if (f->kind == Formula::Kind::Box && f->game->kind == Game::Kind::Seq)
                return mk_box(f->game->left, mk_box(f->game->right, f->post));
            if (f->kind == Formula::Kind::Diamond && f->game->kind == Game::Kind::Seq)
                return mk_diamond(f->game->left, mk_diamond(f->game->right, f->post));
            reject("seqE applies to sequence modalities", path);
        }
        case K::DualElim: {
            FormulaPtr f = synth(ctx, p->sub, path + "/sub");
            if (f->kind == Formula::Kind::Box && f->game->kind == Game::Kind::Dual)
                return mk_diamond(f->game->body, f->post);
            if (f->kind == Formula::Kind::Diamond && f->game->kind == Game::Kind::Dual)
                return mk_box(f->game->body, f->post);
            reject("dualE applies to dual modalities", path);
        }
        case K::AssignElim: {
            FormulaPtr f = synth(ctx, p->sub, path + "/sub");
            if ((f->kind == Formula::Kind::Box || f->kind == Formula::Kind::Diamond) &&
                f->game->kind == Game::Kind::Assign) {
                try {
                    return substitute(f->post, f->game->var, f->game->rhs);
                } catch (const AdmissibilityError& e) {
                    reject(std::string("inadmissible assignment elimination: ") + e.what(), path);
                }
            }
            reject("asgnE applies to assignment modalities", path);
        }
        case K::QE:
        case K::Dec: {
            check(ctx, p, p->formula, path);
            return p->formula;
        }
        case K::RefProof: {
            if (!p->deriv || !p->deriv->goal)
                reject("byref needs a pinned goal to synthesize", path);
            check_deriv(ctx, p->deriv, *p->deriv->goal, path + "/deriv");
            return *p->deriv->goal;
        }
        default:
            reject("proof term is not synthesizable here (annotate with qe or use a hypothesis)",
                   path);
    }
}

void Engine::check_refine_elim(const Context& ctx, bool boxMode, std::optional<unsigned> rank,
                               const GamePtr& alpha, const ProofPtr& main, const DerivPtr& deriv,
                               const FormulaPtr& goal, const std::string& path) {
    if ((boxMode && goal->kind != Formula::Kind::Box) ||
        (!boxMode && goal->kind != Formula::Kind::Diamond))
        reject("refinement elimination against the wrong modality", path);
    const GamePtr& beta = goal->game;
    const FormulaPtr& post = goal->post;
    unsigned needed = std::max({rank_of(post), rank_of(alpha), rank_of(beta)});
    if (rank && *rank < needed)
        reject("RankInferenceError: annotation " + std::to_string(*rank) + " is below required " +
                   std::to_string(needed),
               path);
    if (infer_mode && !rank) inferred_ranks[path] = needed;
    check(ctx, main, boxMode ? mk_box(alpha, post) : mk_diamond(alpha, post), path + "/main");
    // an unannotated elimination keeps the refinement goal unannotated; the
    // required rank was validated above and is reported by infer_ranks
    FormulaPtr refGoal =
        boxMode ? mk_refine(rank, alpha, beta) : mk_refine(rank, mk_dual(alpha), mk_dual(beta));
    check_deriv(ctx, deriv, refGoal, path + "/ref");
}

void Engine::check(const Context& ctx, const ProofPtr& p, const FormulaPtr& goal,
                   const std::string& path) {
    using K = ProofTerm::Kind;
    using FK = Formula::Kind;
    using GK = Game::Kind;
    switch (p->kind) {
        case K::App:
            // a cut encoded as a redex: app(lam(b : T, body), arg)
            if (p->sub->kind == K::LamProof && p->sub->formula) {
                check(ctx, p->sub2, p->sub->formula, path + "/arg");
                if (ctx.has_label(p->sub->binder))
                    reject("binder " + p->sub->binder + " is not fresh", path);
                check(ctx.extended(p->sub->binder, p->sub->formula), p->sub->sub, goal,
                      path + "/fn/sub");
                return;
            }
            [[fallthrough]];
        case K::Hyp:
        case K::Triv:
        case K::AppTerm:
        case K::ProjL:
        case K::ProjR:
        case K::SeqElim:
        case K::DualElim:
        case K::AssignElim: {
            FormulaPtr got = synth(ctx, p, path);
            if (!formula_eq(got, goal))
                reject("synthesized " + pretty(got) + " but goal is " + pretty(goal), path);
            return;
        }
        case K::InjL:
        case K::InjR: {
            if (goal->kind != FK::Diamond || goal->game->kind != GK::Choice)
                reject("rule-mismatch: injections prove diamond choices", path);
            const GamePtr& branch = p->kind == K::InjL ? goal->game->left : goal->game->right;
            check(ctx, p->sub, mk_diamond(branch, goal->post), path + "/sub");
            return;
        }
        case K::Stop: {
            if (goal->kind != FK::Diamond || goal->game->kind != GK::Repeat)
                reject("rule-mismatch: stop proves diamond repetitions", path);
            check(ctx, p->sub, goal->post, path + "/sub");
            return;
        }
        case K::Go: {
            if (goal->kind != FK::Diamond || goal->game->kind != GK::Repeat)
                reject("rule-mismatch: go proves diamond repetitions", path);
            check(ctx, p->sub, mk_diamond(goal->game->body, goal), path + "/sub");
            return;
        }
        case K::Case: {
            FormulaPtr scrut = synth(ctx, p->sub, path + "/scrutinee");
            if (scrut->kind != FK::Diamond || scrut->game->kind != GK::Choice)
                reject("case scrutinee must prove a diamond choice", path);
            if (ctx.has_label(p->binder) || ctx.has_label(p->binder2) || p->binder == p->binder2)
                reject("case binders must be fresh labels", path);
            check(ctx.extended(p->binder, mk_diamond(scrut->game->left, scrut->post)), p->sub2,
                  goal, path + "/left");
            check(ctx.extended(p->binder2, mk_diamond(scrut->game->right, scrut->post)), p->sub3,
                  goal, path + "/right");
            return;
        }
        case K::RepCase: {
            FormulaPtr scrut = synth(ctx, p->sub, path + "/scrutinee");
            if (scrut->kind != FK::Diamond || scrut->game->kind != GK::Repeat)
                reject("repcase scrutinee must prove a diamond repetition", path);
            if (ctx.has_label(p->binder) || ctx.has_label(p->binder2) || p->binder == p->binder2)
                reject("repcase binders must be fresh labels", path);
            check(ctx.extended(p->binder, scrut->post), p->sub2, goal, path + "/stop");
            check(ctx.extended(p->binder2, mk_diamond(scrut->game->body, scrut)), p->sub3, goal,
                  path + "/go");
            return;
        }
        case K::FP: {
            FormulaPtr scrut = synth(ctx, p->sub, path + "/scrutinee");
            if (scrut->kind != FK::Diamond || scrut->game->kind != GK::Repeat)
                reject("fp scrutinee must prove a diamond repetition", path);
            Context stopCtx;
            stopCtx.items.push_back({p->binder, scrut->post});
            check(stopCtx, p->sub2, goal, path + "/stop");
            Context goCtx;
            goCtx.items.push_back({p->binder2, mk_diamond(scrut->game->body, goal)});
            check(goCtx, p->sub3, goal, path + "/go");
            return;
        }
        case K::LamReal: {
            if (goal->kind != FK::Box || goal->game->kind != GK::NondetAssign)
                reject("rule-mismatch: lam over R proves [x := *]", path);
            if (!(p->var == goal->game->var))
                reject("lambda binds " + p->var.str() + " but the game assigns " +
                           goal->game->var.str(),
                       path);
            VarSet used = sequent_vars(ctx, goal);
            VarSet pv = vars_of(p->sub);
            used.insert(pv.begin(), pv.end());
            VarId ghost{fresh_name(p->var.name, used), p->var.primed};
            check(rename_one(ctx, p->var, ghost), p->sub, goal->post, path + "/sub");
            return;
        }
        case K::LamProof: {
            if (goal->kind != FK::Box || goal->game->kind != GK::Test)
                reject("rule-mismatch: lam over a formula proves [?phi]", path);
            if (p->formula && !formula_eq(p->formula, goal->game->cond))
                reject("lambda annotation differs from the test condition", path);
            if (ctx.has_label(p->binder)) reject("binder " + p->binder + " is not fresh", path);
            check(ctx.extended(p->binder, goal->game->cond), p->sub, goal->post, path + "/sub");
            return;
        }
        case K::Pair: {
            if (goal->kind == FK::Diamond && goal->game->kind == GK::Test) {
                check(ctx, p->sub, goal->game->cond, path + "/left");
                check(ctx, p->sub2, goal->post, path + "/right");
                return;
            }
            if (goal->kind == FK::Box && goal->game->kind == GK::Choice) {
                check(ctx, p->sub, mk_box(goal->game->left, goal->post), path + "/left");
                check(ctx, p->sub2, mk_box(goal->game->right, goal->post), path + "/right");
                return;
            }
            if (goal->kind == FK::Box && goal->game->kind == GK::Repeat) {
                check(ctx, p->sub, goal->post, path + "/left");
                check(ctx, p->sub2, mk_box(goal->game->body, goal), path + "/right");
                return;
            }
            reject("rule-mismatch: pairs prove <?a>b, [a++b] or [a*]", path);
        }
        case K::AssignIntro: {
            if (!(goal->kind == FK::Box || goal->kind == FK::Diamond) ||
                goal->game->kind != GK::Assign)
                reject("rule-mismatch: asgn proves assignment modalities", path);
            if (!(p->var2 == goal->game->var))
                reject("asgn targets " + p->var2.str() + " but the game assigns " +
                           goal->game->var.str(),
                       path);
            VarSet used = sequent_vars(ctx, goal);
            require_fresh_var(p->var, used, "ghost", path);
            VarId ghost{p->var.name, goal->game->var.primed};
            if (ctx.has_label(p->binder)) reject("binder " + p->binder + " is not fresh", path);
            Context renamed = rename_one(ctx, goal->game->var, ghost);
            FormulaPtr eq = mk_compare(CompareOp::Eq, mk_var(goal->game->var),
                                       rename_one(goal->game->rhs, goal->game->var, ghost));
            check(renamed.extended(p->binder, eq), p->sub, goal->post, path + "/sub");
            return;
        }
        case K::DAssignIntro: {
            if (goal->kind != FK::Diamond || goal->game->kind != GK::NondetAssign)
                reject("rule-mismatch: wit proves <x := *>", path);
            VarSet used = sequent_vars(ctx, goal);
            VarSet wv = vars_of(p->term);
            used.insert(wv.begin(), wv.end());
            require_fresh_var(p->var, used, "ghost", path);
            VarId ghost{p->var.name, goal->game->var.primed};
            if (ctx.has_label(p->binder)) reject("binder " + p->binder + " is not fresh", path);
            Context renamed = rename_one(ctx, goal->game->var, ghost);
            FormulaPtr eq = mk_compare(CompareOp::Eq, mk_var(goal->game->var),
                                       rename_one(p->term, goal->game->var, ghost));
            check(renamed.extended(p->binder, eq), p->sub, goal->post, path + "/sub");
            return;
        }
        case K::SeqIntro: {
            if (!(goal->kind == FK::Box || goal->kind == FK::Diamond) ||
                goal->game->kind != GK::Seq)
                reject("rule-mismatch: seq proves sequence modalities", path);
            FormulaPtr inner =
                goal->kind == FK::Box
                    ? mk_box(goal->game->left, mk_box(goal->game->right, goal->post))
                    : mk_diamond(goal->game->left, mk_diamond(goal->game->right, goal->post));
            check(ctx, p->sub, inner, path + "/sub");
            return;
        }
        case K::DualIntro: {
            if (!(goal->kind == FK::Box || goal->kind == FK::Diamond) ||
                goal->game->kind != GK::Dual)
                reject("rule-mismatch: dual proves dual modalities", path);
            FormulaPtr inner = goal->kind == FK::Box ? mk_diamond(goal->game->body, goal->post)
                                                     : mk_box(goal->game->body, goal->post);
            check(ctx, p->sub, inner, path + "/sub");
            return;
        }
        case K::Rep: {
            if (goal->kind != FK::Box || goal->game->kind != GK::Repeat)
                reject("rule-mismatch: rep proves box repetitions", path);
            check(ctx, p->sub, p->formula, path + "/base");
            Context stepCtx;
            stepCtx.items.push_back({p->binder, p->formula});
            check(stepCtx, p->sub2, mk_box(goal->game->body, p->formula), path + "/step");
            Context postCtx;
            postCtx.items.push_back({p->binder2, p->formula});
            check(postCtx, p->sub3, goal->post, path + "/post");
            return;
        }
        case K::For: {
            if (goal->kind != FK::Diamond || goal->game->kind != GK::Repeat)
                reject("rule-mismatch: for proves diamond repetitions", path);
            VarSet used = sequent_vars(ctx, goal);
            VarSet mv = vars_of(p->term);
            used.insert(mv.begin(), mv.end());
            VarSet vv = vars_of(p->formula);
            used.insert(vv.begin(), vv.end());
            require_fresh_var(p->var, used, "metric ghost", path);
            if (p->binder == p->binder2) reject("for binders must differ", path);
            // concrete epsilon-gapped instantiation of the abstract metric
            // ordering; flagged in the report
            push_obligation(ctx, mk_compare(CompareOp::Gt, mk_rat(p->rat), mk_int(0)),
                            "METRIC-EPSILON", path);
            check(ctx, p->sub, p->formula, path + "/base");
            TermPtr m0 = mk_var(p->var);
            Context stepCtx;
            stepCtx.items.push_back({p->binder, p->formula});
            stepCtx.items.push_back(
                {p->binder2, mk_and(mk_compare(CompareOp::Eq, m0, p->term),
                                    mk_compare(CompareOp::Gt, p->term, mk_int(0)))});
            FormulaPtr stepPost = mk_and(
                p->formula, mk_compare(CompareOp::Ge, m0, mk_sum(p->term, mk_rat(p->rat))));
            check(stepCtx, p->sub2, mk_diamond(goal->game->body, stepPost), path + "/step");
            Context postCtx;
            postCtx.items.push_back({p->binder, p->formula});
            postCtx.items.push_back({p->binder2, mk_compare(CompareOp::Eq, p->term, mk_int(0))});
            check(postCtx, p->sub3, goal->post, path + "/post");
            return;
        }
        case K::Unpack: {
            FormulaPtr packed = synth(ctx, p->sub, path + "/packed");
            VarId x;
            FormulaPtr body;
            if (!match_exists(packed, x, body))
                reject("unpack scrutinee must prove an existential", path);
            if (free_vars(goal).count(x))
                reject("existential variable " + x.str() + " escapes into the goal", path);
            VarSet used = sequent_vars(ctx, goal);
            require_fresh_var(p->var, used, "witness name", path);
            if (ctx.has_label(p->binder)) reject("binder " + p->binder + " is not fresh", path);
            Context renamed = rename_one(ctx, x, VarId{p->var.name, x.primed});
            check(renamed.extended(p->binder, body), p->sub2, goal, path + "/sub");
            return;
        }
        case K::QE:
        case K::Dec: {
            if (!formula_eq(p->formula, goal))
                reject("target annotation differs from the goal", path);
            if (p->kind == K::Dec) {
                FormulaPtr a, b;
                if (!match_or(goal, a, b)) reject("dec proves decidable disjunctions", path);
            }
            FormulaPtr rho = synth(ctx, p->sub, path + "/sub");
            if (!is_first_order(rho))
                reject("NotFirstOrder: premiss of the oracle step contains a modality", path);
            if (!is_first_order(goal))
                reject("NotFirstOrder: oracle goal contains a modality", path);
            push_obligation(Context{}, mk_imp(rho, goal), p->kind == K::QE ? "FO" : "Dec", path);
            return;
        }
        case K::Split: {
            FormulaPtr a, b;
            if (!match_or(goal, a, b)) reject("split proves f > g | f < h", path);
            if (a->kind != FK::Compare || a->op != CompareOp::Gt || b->kind != FK::Compare ||
                b->op != CompareOp::Lt)
                reject("split proves f > g | f < h", path);
            if (!term_eq(a->lhs, p->term) || !term_eq(b->lhs, p->term) ||
                !term_eq(b->rhs, p->term2))
                reject("split sides do not match the goal", path);
            TermPtr eps = poly_normalize(mk_minus(p->term2, a->rhs));
            check(ctx, p->sub, mk_compare(CompareOp::Gt, eps, mk_int(0)), path + "/sub");
            return;
        }
        case K::Ghost: {
            VarSet used = sequent_vars(ctx, goal);
            VarSet fv = vars_of(p->term);
            used.insert(fv.begin(), fv.end());
            require_fresh_var(p->var, used, "ghost", path);
            if (ctx.has_label(p->binder)) reject("binder " + p->binder + " is not fresh", path);
            check(ctx.extended(p->binder, mk_compare(CompareOp::Eq, mk_var(p->var), p->term)),
                  p->sub, goal, path + "/sub");
            return;
        }
        case K::Mon: {
            FormulaPtr main;
            if (p->formula) {
                check(ctx, p->sub, p->formula, path + "/main");
                main = p->formula;
            } else {
                main = synth(ctx, p->sub, path + "/main");
            }
            if (main->kind != goal->kind || !(main->kind == FK::Box || main->kind == FK::Diamond) ||
                !game_eq(main->game, goal->game))
                reject("mon needs a proof of the same modality and game", path);
            // rename everything the game can write before assuming phi
            Context renamed = ctx;
            VarSet used = sequent_vars(ctx, goal);
            VarSet bv = bound_vars(goal->game);
            std::set<std::string> bases;
            for (const auto& v : bv) bases.insert(v.name);
            for (const auto& b : bases) {
                std::string g = fresh_name(b, used);
                used.insert(base_var(g));
                renamed = rename(renamed, b, g);
            }
            if (renamed.has_label(p->binder)) reject("binder " + p->binder + " is not fresh", path);
            check(renamed.extended(p->binder, main->post), p->sub2, goal->post, path + "/sub");
            return;
        }
        case K::DI: {
            if (goal->kind != FK::Box || goal->game->kind != GK::Ode)
                reject("rule-mismatch: di proves box ODE modalities", path);
            FormulaPtr diff;
            try {
                diff = formula_differential(goal->post);
            } catch (const UnsupportedTerm& e) {
                reject(std::string("di: ") + e.what(), path);
            }
            check(ctx, p->sub, goal->post, path + "/base");
            FormulaPtr step = diff;
            for (size_t k = goal->game->equations.size(); k-- > 0;) {
                const auto& eq = goal->game->equations[k];
                step = box1(mk_assign(primed_var(eq.var.name), eq.rhs), step);
            }
            step = mk_imp(goal->game->cond, step);
            for (size_t k = goal->game->equations.size(); k-- > 0;)
                step = mk_forall(goal->game->equations[k].var, step);
            check(ctx, p->sub2, step, path + "/step");
            return;
        }
        case K::DC: {
            if (goal->kind != FK::Box || goal->game->kind != GK::Ode)
                reject("rule-mismatch: dc proves box ODE modalities", path);
            check(ctx, p->sub, mk_box(goal->game, p->formula), path + "/show");
            GamePtr cutOde = mk_ode(goal->game->equations, mk_and(goal->game->cond, p->formula));
            check(ctx, p->sub2, mk_box(cutOde, goal->post), path + "/use");
            return;
        }
        case K::DW: {
            if (goal->kind != FK::Box || goal->game->kind != GK::Ode)
                reject("rule-mismatch: dw proves box ODE modalities", path);
            FormulaPtr prem = mk_imp(goal->game->cond, goal->post);
            for (size_t k = goal->game->equations.size(); k-- > 0;)
                prem = mk_forall(primed_var(goal->game->equations[k].var.name), prem);
            for (size_t k = goal->game->equations.size(); k-- > 0;)
                prem = mk_forall(goal->game->equations[k].var, prem);
            check(ctx, p->sub, prem, path + "/sub");
            return;
        }
        case K::DG: {
            if (goal->kind != FK::Box || goal->game->kind != GK::Ode)
                reject("rule-mismatch: dg proves box ODE modalities", path);
            VarSet used = sequent_vars(ctx, goal);
            VarSet extra = vars_of(p->term);
            VarSet av = vars_of(p->term2), bv2 = vars_of(p->term3);
            extra.insert(av.begin(), av.end());
            extra.insert(bv2.begin(), bv2.end());
            used.insert(extra.begin(), extra.end());
            require_fresh_var(p->var, used, "differential ghost", path);
            if (p->var.primed) reject("differential ghost must be a base variable", path);
            for (const auto& v : av)
                if (v.primed) reject("ghost coefficient mentions a primed variable", path);
            for (const auto& v : bv2)
                if (v.primed) reject("ghost offset mentions a primed variable", path);
            std::vector<OdeEquation> eqs = goal->game->equations;
            eqs.push_back({p->var, mk_sum(mk_product(p->term2, mk_var(p->var)), p->term3)});
            GamePtr ode = mk_ode(std::move(eqs), goal->game->cond);
            std::string lbl = fresh_label(ctx, "_dg");
            check(ctx.extended(lbl, mk_compare(CompareOp::Eq, mk_var(p->var), p->term)), p->sub,
                  mk_box(ode, goal->post), path + "/sub");
            return;
        }
        case K::BSolve: {
            if (goal->kind != FK::Box || goal->game->kind != GK::Ode)
                reject("rule-mismatch: bsolve proves box ODE modalities", path);
            VarSet postFv = free_vars(goal->post);
            for (const auto& eq : goal->game->equations)
                if (postFv.count(primed_var(eq.var.name)))
                    reject(eq.var.str() + "' occurs free in the postcondition", path);
            VarId timeVar = solve_time_var(ctx, goal, p->solutions);
            check_solve_side(p->solutions, goal->game, timeVar, path);
            VarSet used = sequent_vars(ctx, goal);
            used.insert(timeVar);
            for (const auto& [v, t] : p->solutions) {
                VarSet sv = vars_of(t);
                used.insert(sv.begin(), sv.end());
            }
            VarId boundVar = base_var(fresh_name("r", used));
            FormulaPtr prem;
            try {
                prem = bsolve_premiss(goal->game, p->solutions, timeVar, boundVar, goal->post);
            } catch (const UnsupportedTerm& e) {
                reject(std::string("bsolve: ") + e.what(), path);
            }
            check(ctx, p->sub, prem, path + "/sub");
            return;
        }
        case K::DSolve: {
            if (goal->kind != FK::Diamond || goal->game->kind != GK::Ode)
                reject("rule-mismatch: dsolve proves diamond ODE modalities", path);
            VarSet postFv = free_vars(goal->post);
            for (const auto& eq : goal->game->equations)
                if (postFv.count(primed_var(eq.var.name)))
                    reject(eq.var.str() + "' occurs free in the postcondition", path);
            VarId timeVar = solve_time_var(ctx, goal, p->solutions);
            check_solve_side(p->solutions, goal->game, timeVar, path);
            VarSet dv = free_vars(p->term);
            if (dv.count(timeVar)) reject("duration mentions the time parameter", path);
            for (const auto& eq : goal->game->equations) {
                if (dv.count(eq.var) || dv.count(primed_var(eq.var.name)))
                    reject("duration mentions ODE-bound variable " + eq.var.str(), path);
            }
            push_obligation(ctx, mk_compare(CompareOp::Ge, p->term, mk_int(0)), "dsolve-duration",
                            path);
            std::vector<size_t> order = solution_assign_order(p->solutions);
            if (order.empty() && !p->solutions.empty())
                reject("dsolve: solution terms are cyclically dependent", path);
            VarSet used = sequent_vars(ctx, goal);
            used.insert(timeVar);
            for (const auto& [v2, t2] : p->solutions) {
                VarSet sv = vars_of(t2);
                used.insert(sv.begin(), sv.end());
            }
            VarId boundVar = base_var(fresh_name("r", used));
            TermPtr rv = mk_var(boundVar);
            // domain proof: forall r (0 <= r <= d -> [x := sln(r)] psi)
            FormulaPtr domAt = goal->game->cond;
            for (size_t k = order.size(); k-- > 0;) {
                const auto& [v2, sln] = p->solutions[order[k]];
                domAt = box1(mk_assign(v2, substitute(sln, timeVar, rv)), domAt);
            }
            FormulaPtr domAll =
                mk_forall(boundVar, mk_imp(mk_and(mk_compare(CompareOp::Le, mk_int(0), rv),
                                                  mk_compare(CompareOp::Le, rv, p->term)),
                                           domAt));
            check(ctx, p->sub, domAll, path + "/dom");
            // postcondition proof: [x := sln(d)][x' := f] post
            FormulaPtr inner = goal->post;
            for (size_t k = goal->game->equations.size(); k-- > 0;) {
                const auto& eq = goal->game->equations[k];
                inner = box1(mk_assign(primed_var(eq.var.name), eq.rhs), inner);
            }
            for (size_t k = order.size(); k-- > 0;) {
                const auto& [v2, sln] = p->solutions[order[k]];
                inner = box1(mk_assign(v2, substitute(sln, timeVar, p->term)), inner);
            }
            check(ctx, p->sub2, inner, path + "/post");
            return;
        }
        case K::BoxRef:
            check_refine_elim(ctx, true, p->rank, p->game, p->sub, p->deriv, goal, path);
            return;
        case K::DiamondRef:
            check_refine_elim(ctx, false, p->rank, p->game, p->sub, p->deriv, goal, path);
            return;
        case K::RefProof:
            check_deriv(ctx, p->deriv, goal, path + "/deriv");
            return;
    }
    reject("unhandled proof term", path);
}

CheckReport check_proof(const Context& ctx, const ProofPtr& p, const FormulaPtr& goal) {
    CheckReport report;
    Engine e;
    try {
        e.check(ctx, p, goal, "root");
        report.accepted = true;
    } catch (const RejectError& err) {
        report.accepted = false;
        report.reason = err.reason;
        report.path = err.path;
    }
    report.obligations = std::move(e.obligations);
    return report;
}

CheckReport check_refinement(const Context& ctx, const DerivPtr& d, const FormulaPtr& goal) {
    CheckReport report;
    Engine e;
    try {
        e.check_deriv(ctx, d, goal, "root");
        report.accepted = true;
    } catch (const RejectError& err) {
        report.accepted = false;
        report.reason = err.reason;
        report.path = err.path;
    }
    report.obligations = std::move(e.obligations);
    return report;
}

namespace {

FormulaPtr annotate_formula_ranks(const FormulaPtr& f);

GamePtr annotate_game_ranks(const GamePtr& g) {
    switch (g->kind) {
        case Game::Kind::Test:
            return mk_test(annotate_formula_ranks(g->cond));
        case Game::Kind::Assign:
        case Game::Kind::NondetAssign:
            return g;
        case Game::Kind::Ode:
            return mk_ode(g->equations, annotate_formula_ranks(g->cond));
        case Game::Kind::Choice:
            return mk_choice(annotate_game_ranks(g->left), annotate_game_ranks(g->right));
        case Game::Kind::Seq:
            return mk_seq(annotate_game_ranks(g->left), annotate_game_ranks(g->right));
        case Game::Kind::Repeat:
            return mk_repeat(annotate_game_ranks(g->body));
        case Game::Kind::Dual:
            return mk_dual(annotate_game_ranks(g->body));
    }
    return g;
}

FormulaPtr annotate_formula_ranks(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Compare:
            return f;
        case Formula::Kind::Box:
            return mk_box(annotate_game_ranks(f->game), annotate_formula_ranks(f->post));
        case Formula::Kind::Diamond:
            return mk_diamond(annotate_game_ranks(f->game), annotate_formula_ranks(f->post));
        case Formula::Kind::Refine: {
            GamePtr l = annotate_game_ranks(f->rleft);
            GamePtr r = annotate_game_ranks(f->rright);
            unsigned base = std::max(rank_of(l), rank_of(r));
            return mk_refine(f->rank ? *f->rank : base, std::move(l), std::move(r));
        }
    }
    return f;
}

ProofPtr apply_ranks(const ProofPtr& p, const std::map<std::string, unsigned>& ranks,
                     const std::string& path);

DerivPtr apply_ranks_d(const DerivPtr& d, const std::map<std::string, unsigned>& ranks,
                       const std::string& path) {
    if (!d) return d;
    auto c = std::make_shared<Derivation>(*d);
    auto it = ranks.find(path);
    if (it != ranks.end() && !c->rank) c->rank = it->second;
    for (size_t i = 0; i < c->subs.size(); ++i)
        c->subs[i] = apply_ranks_d(c->subs[i], ranks, path + "/sub" + std::to_string(i));
    for (size_t i = 0; i < c->proofs.size(); ++i)
        c->proofs[i] = apply_ranks(c->proofs[i], ranks, path + "/p" + std::to_string(i));
    return c;
}

// child path segments mirror the ones used by Engine::check
ProofPtr apply_ranks(const ProofPtr& p, const std::map<std::string, unsigned>& ranks,
                     const std::string& path) {
    if (!p) return p;
    auto c = std::make_shared<ProofTerm>(*p);
    auto it = ranks.find(path);
    if (it != ranks.end() && !c->rank) c->rank = it->second;
    using K = ProofTerm::Kind;
    auto at = [&](const char* seg) { return path + "/" + seg; };
    switch (p->kind) {
        case K::Case:
            c->sub = apply_ranks(p->sub, ranks, at("scrutinee"));
            c->sub2 = apply_ranks(p->sub2, ranks, at("left"));
            c->sub3 = apply_ranks(p->sub3, ranks, at("right"));
            break;
        case K::RepCase:
        case K::FP:
            c->sub = apply_ranks(p->sub, ranks, at("scrutinee"));
            c->sub2 = apply_ranks(p->sub2, ranks, at("stop"));
            c->sub3 = apply_ranks(p->sub3, ranks, at("go"));
            break;
        case K::Pair:
            c->sub = apply_ranks(p->sub, ranks, at("left"));
            c->sub2 = apply_ranks(p->sub2, ranks, at("right"));
            break;
        case K::Rep:
        case K::For:
        case K::DI:
            c->sub = apply_ranks(p->sub, ranks, at(p->kind == K::DI ? "base" : "base"));
            c->sub2 = apply_ranks(p->sub2, ranks, at("step"));
            if (p->sub3) c->sub3 = apply_ranks(p->sub3, ranks, at("post"));
            break;
        case K::App:
            c->sub = apply_ranks(p->sub, ranks, at("fn"));
            c->sub2 = apply_ranks(p->sub2, ranks, at("arg"));
            break;
        case K::AppTerm:
            c->sub = apply_ranks(p->sub, ranks, at("fn"));
            break;
        case K::Unpack:
            c->sub = apply_ranks(p->sub, ranks, at("packed"));
            c->sub2 = apply_ranks(p->sub2, ranks, at("sub"));
            break;
        case K::Mon:
            c->sub = apply_ranks(p->sub, ranks, at("main"));
            c->sub2 = apply_ranks(p->sub2, ranks, at("sub"));
            break;
        case K::DC:
            c->sub = apply_ranks(p->sub, ranks, at("show"));
            c->sub2 = apply_ranks(p->sub2, ranks, at("use"));
            break;
        case K::DSolve:
            c->sub = apply_ranks(p->sub, ranks, at("dom"));
            c->sub2 = apply_ranks(p->sub2, ranks, at("post"));
            break;
        case K::BoxRef:
        case K::DiamondRef:
            c->sub = apply_ranks(p->sub, ranks, at("main"));
            c->deriv = apply_ranks_d(p->deriv, ranks, at("ref"));
            break;
        case K::RefProof:
            c->deriv = apply_ranks_d(p->deriv, ranks, at("deriv"));
            break;
        default:
            if (p->sub) c->sub = apply_ranks(p->sub, ranks, at("sub"));
            if (p->sub2) c->sub2 = apply_ranks(p->sub2, ranks, at("sub2"));
            if (p->sub3) c->sub3 = apply_ranks(p->sub3, ranks, at("sub3"));
            break;
    }
    return c;
}

}  // namespace

RankedProof infer_ranks(const Context& ctx, const ProofPtr& p, const FormulaPtr& goal) {
    Engine e;
    e.infer_mode = true;
    e.check(ctx, p, goal, "root");  // throws RejectError when p does not check
    ProofPtr annotated = apply_ranks(p, e.inferred_ranks, "root");
    return RankedProof{annotate_formula_ranks(goal), annotated};
}

}  // namespace cdgl
