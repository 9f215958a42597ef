#include "core/analysis.hpp"

#include <algorithm>

namespace cdgl {

static void set_union_into(VarSet& a, const VarSet& b) { a.insert(b.begin(), b.end()); }

static VarSet set_minus(const VarSet& a, const VarSet& b) {
    VarSet r;
    for (const auto& v : a)
        if (!b.count(v)) r.insert(v);
    return r;
}

VarSet free_vars(const TermPtr& t) {
    switch (t->kind) {
        case Term::Kind::Rational:
            return {};
        case Term::Kind::Variable:
            return {t->var};
        case Term::Kind::Sum:
        case Term::Kind::Product: {
            VarSet r = free_vars(t->lhs);
            set_union_into(r, free_vars(t->rhs));
            return r;
        }
        case Term::Kind::Differential: {
            // (f)' reads x and x' for every x free in f
            VarSet inner = free_vars(t->inner);
            VarSet r = inner;
            for (const auto& v : inner) r.insert(VarId{v.name, true});
            return r;
        }
    }
    return {};
}

VarSet must_bound_vars(const GamePtr& g) {
    switch (g->kind) {
        case Game::Kind::Test:
            return {};
        case Game::Kind::Assign:
        case Game::Kind::NondetAssign:
            return {g->var};
        case Game::Kind::Ode: {
            VarSet r;
            for (const auto& eq : g->equations) {
                r.insert(eq.var);
                r.insert(VarId{eq.var.name, true});
            }
            return r;
        }
        case Game::Kind::Choice: {
            VarSet l = must_bound_vars(g->left), r = must_bound_vars(g->right), out;
            for (const auto& v : l)
                if (r.count(v)) out.insert(v);
            return out;
        }
        case Game::Kind::Seq: {
            VarSet r = must_bound_vars(g->left);
            set_union_into(r, must_bound_vars(g->right));
            return r;
        }
        case Game::Kind::Repeat:
            return {};
        case Game::Kind::Dual:
            return must_bound_vars(g->body);
    }
    return {};
}

VarSet bound_vars(const GamePtr& g) {
    switch (g->kind) {
        case Game::Kind::Test:
            return {};
        case Game::Kind::Assign:
        case Game::Kind::NondetAssign:
            return {g->var};
        case Game::Kind::Ode: {
            VarSet r;
            for (const auto& eq : g->equations) {
                r.insert(eq.var);
                r.insert(VarId{eq.var.name, true});
            }
            return r;
        }
        case Game::Kind::Choice:
        case Game::Kind::Seq: {
            VarSet r = bound_vars(g->left);
            set_union_into(r, bound_vars(g->right));
            return r;
        }
        case Game::Kind::Repeat:
        case Game::Kind::Dual:
            return bound_vars(g->body);
    }
    return {};
}

VarSet free_vars(const GamePtr& g) {
    switch (g->kind) {
        case Game::Kind::Test:
            return free_vars(g->cond);
        case Game::Kind::Assign:
            return free_vars(g->rhs);
        case Game::Kind::NondetAssign:
            return {};
        case Game::Kind::Ode: {
            VarSet r;
            for (const auto& eq : g->equations) {
                r.insert(eq.var);
                set_union_into(r, free_vars(eq.rhs));
            }
            set_union_into(r, free_vars(g->cond));
            return r;
        }
        case Game::Kind::Choice: {
            VarSet r = free_vars(g->left);
            set_union_into(r, free_vars(g->right));
            return r;
        }
        case Game::Kind::Seq: {
            VarSet r = free_vars(g->left);
            set_union_into(r, set_minus(free_vars(g->right), must_bound_vars(g->left)));
            return r;
        }
        case Game::Kind::Repeat:
        case Game::Kind::Dual:
            return free_vars(g->body);
    }
    return {};
}

VarSet free_vars(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Compare: {
            VarSet r = free_vars(f->lhs);
            set_union_into(r, free_vars(f->rhs));
            return r;
        }
        case Formula::Kind::Box:
        case Formula::Kind::Diamond: {
            VarSet r = free_vars(f->game);
            set_union_into(r, set_minus(free_vars(f->post), must_bound_vars(f->game)));
            return r;
        }
        case Formula::Kind::Refine: {
            VarSet r = free_vars(f->rleft);
            set_union_into(r, free_vars(f->rright));
            return r;
        }
    }
    return {};
}

VarSet free_vars(const Context& ctx) {
    VarSet r;
    for (const auto& a : ctx.items) set_union_into(r, free_vars(a.formula));
    return r;
}

VarSet vars_of(const TermPtr& t) {
    switch (t->kind) {
        case Term::Kind::Rational:
            return {};
        case Term::Kind::Variable:
            return {t->var};
        case Term::Kind::Sum:
        case Term::Kind::Product: {
            VarSet r = vars_of(t->lhs);
            set_union_into(r, vars_of(t->rhs));
            return r;
        }
        case Term::Kind::Differential:
            return free_vars(t);  // includes generated primes
    }
    return {};
}

VarSet vars_of(const GamePtr& g) {
    switch (g->kind) {
        case Game::Kind::Test:
            return vars_of(g->cond);
        case Game::Kind::Assign: {
            VarSet r = vars_of(g->rhs);
            r.insert(g->var);
            return r;
        }
        case Game::Kind::NondetAssign:
            return {g->var};
        case Game::Kind::Ode: {
            VarSet r = vars_of(g->cond);
            for (const auto& eq : g->equations) {
                r.insert(eq.var);
                r.insert(VarId{eq.var.name, true});
                set_union_into(r, vars_of(eq.rhs));
            }
            return r;
        }
        case Game::Kind::Choice:
        case Game::Kind::Seq: {
            VarSet r = vars_of(g->left);
            set_union_into(r, vars_of(g->right));
            return r;
        }
        case Game::Kind::Repeat:
        case Game::Kind::Dual:
            return vars_of(g->body);
    }
    return {};
}

VarSet vars_of(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Compare: {
            VarSet r = vars_of(f->lhs);
            set_union_into(r, vars_of(f->rhs));
            return r;
        }
        case Formula::Kind::Box:
        case Formula::Kind::Diamond: {
            VarSet r = vars_of(f->game);
            set_union_into(r, vars_of(f->post));
            return r;
        }
        case Formula::Kind::Refine: {
            VarSet r = vars_of(f->rleft);
            set_union_into(r, vars_of(f->rright));
            return r;
        }
    }
    return {};
}

VarSet vars_of(const Context& ctx) {
    VarSet r;
    for (const auto& a : ctx.items) set_union_into(r, vars_of(a.formula));
    return r;
}

// ---- renaming ----

VarId rename_var(const VarId& v, const std::string& x, const std::string& y) {
    if (v.name == x) return VarId{y, v.primed};
    if (v.name == y) return VarId{x, v.primed};
    return v;
}

TermPtr rename(const TermPtr& t, const std::string& x, const std::string& y) {
    switch (t->kind) {
        case Term::Kind::Rational:
            return t;
        case Term::Kind::Variable: {
            VarId nv = rename_var(t->var, x, y);
            return nv == t->var ? t : mk_var(nv);
        }
        case Term::Kind::Sum:
            return mk_sum(rename(t->lhs, x, y), rename(t->rhs, x, y));
        case Term::Kind::Product:
            return mk_product(rename(t->lhs, x, y), rename(t->rhs, x, y));
        case Term::Kind::Differential:
            return mk_differential(rename(t->inner, x, y));
    }
    return t;
}

GamePtr rename(const GamePtr& g, const std::string& x, const std::string& y) {
    switch (g->kind) {
        case Game::Kind::Test:
            return mk_test(rename(g->cond, x, y));
        case Game::Kind::Assign:
            return mk_assign(rename_var(g->var, x, y), rename(g->rhs, x, y));
        case Game::Kind::NondetAssign:
            return mk_nondet(rename_var(g->var, x, y));
        case Game::Kind::Ode: {
            std::vector<OdeEquation> eqs;
            eqs.reserve(g->equations.size());
            for (const auto& eq : g->equations)
                eqs.push_back({rename_var(eq.var, x, y), rename(eq.rhs, x, y)});
            return mk_ode(std::move(eqs), rename(g->cond, x, y));
        }
        case Game::Kind::Choice:
            return mk_choice(rename(g->left, x, y), rename(g->right, x, y));
        case Game::Kind::Seq:
            return mk_seq(rename(g->left, x, y), rename(g->right, x, y));
        case Game::Kind::Repeat:
            return mk_repeat(rename(g->body, x, y));
        case Game::Kind::Dual:
            return mk_dual(rename(g->body, x, y));
    }
    return g;
}

FormulaPtr rename(const FormulaPtr& f, const std::string& x, const std::string& y) {
    switch (f->kind) {
        case Formula::Kind::Compare:
            return mk_compare(f->op, rename(f->lhs, x, y), rename(f->rhs, x, y));
        case Formula::Kind::Box:
            return mk_box(rename(f->game, x, y), rename(f->post, x, y));
        case Formula::Kind::Diamond:
            return mk_diamond(rename(f->game, x, y), rename(f->post, x, y));
        case Formula::Kind::Refine:
            return mk_refine(f->rank, rename(f->rleft, x, y), rename(f->rright, x, y));
    }
    return f;
}

Context rename(const Context& ctx, const std::string& x, const std::string& y) {
    Context out;
    out.items.reserve(ctx.items.size());
    for (const auto& a : ctx.items) out.items.push_back({a.label, rename(a.formula, x, y)});
    return out;
}

static VarId swap_one(const VarId& v, const VarId& a, const VarId& b) {
    if (v == a) return b;
    if (v == b) return a;
    return v;
}

TermPtr rename_one(const TermPtr& t, const VarId& a, const VarId& b) {
    switch (t->kind) {
        case Term::Kind::Rational:
            return t;
        case Term::Kind::Variable: {
            VarId nv = swap_one(t->var, a, b);
            return nv == t->var ? t : mk_var(nv);
        }
        case Term::Kind::Sum:
            return mk_sum(rename_one(t->lhs, a, b), rename_one(t->rhs, a, b));
        case Term::Kind::Product:
            return mk_product(rename_one(t->lhs, a, b), rename_one(t->rhs, a, b));
        case Term::Kind::Differential:
            return mk_differential(rename_one(t->inner, a, b));
    }
    return t;
}

GamePtr rename_one(const GamePtr& g, const VarId& a, const VarId& b) {
    switch (g->kind) {
        case Game::Kind::Test:
            return mk_test(rename_one(g->cond, a, b));
        case Game::Kind::Assign:
            return mk_assign(swap_one(g->var, a, b), rename_one(g->rhs, a, b));
        case Game::Kind::NondetAssign:
            return mk_nondet(swap_one(g->var, a, b));
        case Game::Kind::Ode: {
            std::vector<OdeEquation> eqs;
            eqs.reserve(g->equations.size());
            for (const auto& eq : g->equations)
                eqs.push_back({swap_one(eq.var, a, b), rename_one(eq.rhs, a, b)});
            return mk_ode(std::move(eqs), rename_one(g->cond, a, b));
        }
        case Game::Kind::Choice:
            return mk_choice(rename_one(g->left, a, b), rename_one(g->right, a, b));
        case Game::Kind::Seq:
            return mk_seq(rename_one(g->left, a, b), rename_one(g->right, a, b));
        case Game::Kind::Repeat:
            return mk_repeat(rename_one(g->body, a, b));
        case Game::Kind::Dual:
            return mk_dual(rename_one(g->body, a, b));
    }
    return g;
}

FormulaPtr rename_one(const FormulaPtr& f, const VarId& a, const VarId& b) {
    switch (f->kind) {
        case Formula::Kind::Compare:
            return mk_compare(f->op, rename_one(f->lhs, a, b), rename_one(f->rhs, a, b));
        case Formula::Kind::Box:
            return mk_box(rename_one(f->game, a, b), rename_one(f->post, a, b));
        case Formula::Kind::Diamond:
            return mk_diamond(rename_one(f->game, a, b), rename_one(f->post, a, b));
        case Formula::Kind::Refine:
            return mk_refine(f->rank, rename_one(f->rleft, a, b), rename_one(f->rright, a, b));
    }
    return f;
}

Context rename_one(const Context& ctx, const VarId& a, const VarId& b) {
    Context out;
    out.items.reserve(ctx.items.size());
    for (const auto& it : ctx.items) out.items.push_back({it.label, rename_one(it.formula, a, b)});
    return out;
}

// ---- substitution ----

namespace {

// Binding state along an execution path: `must` are variables rebound on
// every path so far, `may` those rebound on some path. An occurrence of the
// substituted variable is skipped when must-bound, an error when only
// may-bound, and replaced otherwise (after a capture check).
struct BindState {
    VarSet must, may;
};

struct Subst {
    const VarId& var;
    const TermPtr& repl;
    VarSet repl_fv;

    TermPtr term(const TermPtr& t, const BindState& bs) const {
        switch (t->kind) {
            case Term::Kind::Rational:
                return t;
            case Term::Kind::Variable:
                if (t->var == var) {
                    if (bs.must.count(var)) return t;
                    if (bs.may.count(var))
                        throw AdmissibilityError("occurrence of " + var.str() +
                                                 " may or may not be rebound along its path");
                    for (const auto& b : repl_fv)
                        if (bs.may.count(b) || bs.must.count(b))
                            throw AdmissibilityError("substitution of " + var.str() + " captures " +
                                                     b.str());
                    return repl;
                }
                return t;
            case Term::Kind::Sum:
                return mk_sum(term(t->lhs, bs), term(t->rhs, bs));
            case Term::Kind::Product:
                return mk_product(term(t->lhs, bs), term(t->rhs, bs));
            case Term::Kind::Differential:
                return mk_differential(term(t->inner, bs));
        }
        return t;
    }

    GamePtr game(const GamePtr& g, BindState& bs) const {
        switch (g->kind) {
            case Game::Kind::Test:
                return mk_test(formula(g->cond, bs));
            case Game::Kind::Assign: {
                TermPtr r = term(g->rhs, bs);
                bs.must.insert(g->var);
                bs.may.insert(g->var);
                return mk_assign(g->var, std::move(r));
            }
            case Game::Kind::NondetAssign:
                bs.must.insert(g->var);
                bs.may.insert(g->var);
                return g;
            case Game::Kind::Ode: {
                VarSet odeBound;
                for (const auto& eq : g->equations) {
                    odeBound.insert(eq.var);
                    odeBound.insert(VarId{eq.var.name, true});
                }
                // the initial value of an ODE-bound variable is read
                // implicitly; there is no occurrence to replace
                if (odeBound.count(var) && !bs.must.count(var))
                    throw AdmissibilityError("cannot substitute " + var.str() +
                                             " into an ODE that binds it");
                BindState inner = bs;
                set_union_into(inner.must, odeBound);
                set_union_into(inner.may, odeBound);
                std::vector<OdeEquation> eqs;
                for (const auto& eq : g->equations) eqs.push_back({eq.var, term(eq.rhs, inner)});
                FormulaPtr cond = formula(g->cond, inner);
                set_union_into(bs.must, odeBound);
                set_union_into(bs.may, odeBound);
                return mk_ode(std::move(eqs), std::move(cond));
            }
            case Game::Kind::Choice: {
                BindState bl = bs, br = bs;
                GamePtr l = game(g->left, bl), r = game(g->right, br);
                VarSet mustBoth;
                for (const auto& v : bl.must)
                    if (br.must.count(v)) mustBoth.insert(v);
                bs.must = std::move(mustBoth);
                bs.may = bl.may;
                set_union_into(bs.may, br.may);
                return mk_choice(std::move(l), std::move(r));
            }
            case Game::Kind::Seq: {
                GamePtr l = game(g->left, bs);
                GamePtr r = game(g->right, bs);
                return mk_seq(std::move(l), std::move(r));
            }
            case Game::Kind::Repeat: {
                // inside the body, anything the body binds may already have
                // been rebound by earlier iterations
                BindState inner = bs;
                set_union_into(inner.may, bound_vars(g->body));
                GamePtr b = game(g->body, inner);
                set_union_into(bs.may, bound_vars(g->body));
                return mk_repeat(std::move(b));
            }
            case Game::Kind::Dual: {
                GamePtr b = game(g->body, bs);
                return mk_dual(std::move(b));
            }
        }
        return g;
    }

    FormulaPtr formula(const FormulaPtr& f, const BindState& bs) const {
        switch (f->kind) {
            case Formula::Kind::Compare:
                return mk_compare(f->op, term(f->lhs, bs), term(f->rhs, bs));
            case Formula::Kind::Box: {
                BindState b = bs;
                GamePtr g = game(f->game, b);
                return mk_box(std::move(g), formula(f->post, b));
            }
            case Formula::Kind::Diamond: {
                BindState b = bs;
                GamePtr g = game(f->game, b);
                return mk_diamond(std::move(g), formula(f->post, b));
            }
            case Formula::Kind::Refine: {
                BindState bl = bs, br = bs;
                GamePtr l = game(f->rleft, bl), r = game(f->rright, br);
                return mk_refine(f->rank, std::move(l), std::move(r));
            }
        }
        return f;
    }
};

}  // namespace

TermPtr substitute(const TermPtr& t, const VarId& var, const TermPtr& repl) {
    Subst s{var, repl, free_vars(repl)};
    return s.term(t, BindState{});
}

FormulaPtr substitute(const FormulaPtr& f, const VarId& var, const TermPtr& repl) {
    Subst s{var, repl, free_vars(repl)};
    return s.formula(f, BindState{});
}

// ---- systemhood / first-order ----

static bool formula_has_dual(const FormulaPtr& f);

static bool game_has_dual(const GamePtr& g) {
    switch (g->kind) {
        case Game::Kind::Test:
            return formula_has_dual(g->cond);
        case Game::Kind::Assign:
        case Game::Kind::NondetAssign:
            return false;
        case Game::Kind::Ode:
            return formula_has_dual(g->cond);
        case Game::Kind::Choice:
        case Game::Kind::Seq:
            return game_has_dual(g->left) || game_has_dual(g->right);
        case Game::Kind::Repeat:
            return game_has_dual(g->body);
        case Game::Kind::Dual:
            return true;
    }
    return false;
}

static bool formula_has_dual(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Compare:
            return false;
        case Formula::Kind::Box:
        case Formula::Kind::Diamond:
            return game_has_dual(f->game) || formula_has_dual(f->post);
        case Formula::Kind::Refine:
            return game_has_dual(f->rleft) || game_has_dual(f->rright);
    }
    return false;
}

bool is_system(const GamePtr& g) { return !game_has_dual(g); }

static bool first_order_impl(const FormulaPtr& f, bool allow_quantifiers) {
    if (f->kind == Formula::Kind::Compare) return true;
    if (f->kind == Formula::Kind::Refine) return false;
    FormulaPtr a, b;
    if (match_and(f, a, b) || match_or(f, a, b) || match_imp(f, a, b))
        return first_order_impl(a, allow_quantifiers) && first_order_impl(b, allow_quantifiers);
    VarId v;
    FormulaPtr body;
    if (match_forall(f, v, body) || match_exists(f, v, body))
        return allow_quantifiers && first_order_impl(body, allow_quantifiers);
    return false;
}

bool is_first_order(const FormulaPtr& f) { return first_order_impl(f, true); }
bool is_quantifier_free_fo(const FormulaPtr& f) { return first_order_impl(f, false); }

std::string fresh_name(const std::string& stem, const VarSet& used) {
    std::set<std::string> names;
    for (const auto& v : used) names.insert(v.name);
    if (!names.count(stem)) return stem;
    for (unsigned i = 1;; ++i) {
        std::string cand = stem + "_" + std::to_string(i);
        if (!names.count(cand)) return cand;
    }
}

}  // namespace cdgl
