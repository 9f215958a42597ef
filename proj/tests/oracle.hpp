#pragma once

// Brute-force semantic refinement oracle over a 2-point value domain.
// Dormant winning sets are computed exactly for dual-free discrete games, and
// demonic refinement a =< b is checked by quantifying over every postcondition
// of the finite state space.

#include <functional>
#include <set>

#include "core/ast.hpp"
#include "gen.hpp"

namespace cdgl::oracle {

struct Space {
    std::vector<std::string> vars;  // <= 3
    int domain = 2;                 // values 0..domain-1

    int num_states() const {
        int n = 1;
        for (size_t i = 0; i < vars.size(); ++i) n *= domain;
        return n;
    }
    int value(int state, size_t varIdx) const {
        for (size_t i = 0; i < varIdx; ++i) state /= domain;
        return state % domain;
    }
    int with_value(int state, size_t varIdx, int v) const {
        int scale = 1;
        for (size_t i = 0; i < varIdx; ++i) scale *= domain;
        int old = value(state, varIdx);
        return state + (v - old) * scale;
    }
    size_t index_of(const VarId& v) const {
        for (size_t i = 0; i < vars.size(); ++i)
            if (vars[i] == v.name && !v.primed) return i;
        throw std::out_of_range("oracle: unknown variable " + v.str());
    }
};

using StateSet = std::set<int>;

inline int eval_term(const Space& sp, const TermPtr& t, int state) {
    switch (t->kind) {
        case Term::Kind::Rational: {
            long long v;
            if (!t->value.is_integer() || !t->value.num().fits_longlong(v))
                throw std::out_of_range("oracle: non-integer literal");
            return static_cast<int>(v);
        }
        case Term::Kind::Variable:
            return sp.value(state, sp.index_of(t->var));
        case Term::Kind::Sum:
            return eval_term(sp, t->lhs, state) + eval_term(sp, t->rhs, state);
        case Term::Kind::Product:
            return eval_term(sp, t->lhs, state) * eval_term(sp, t->rhs, state);
        default:
            throw std::out_of_range("oracle: unsupported term");
    }
}

inline bool eval_formula(const Space& sp, const FormulaPtr& f, int state);

// dormant winning states of [g]post
inline StateSet win(const Space& sp, const GamePtr& g, const StateSet& post) {
    StateSet out;
    switch (g->kind) {
        case Game::Kind::Test:
            for (int s = 0; s < sp.num_states(); ++s)
                if (!eval_formula(sp, g->cond, s) || post.count(s)) out.insert(s);
            return out;
        case Game::Kind::Assign: {
            size_t idx = sp.index_of(g->var);
            for (int s = 0; s < sp.num_states(); ++s) {
                int v = eval_term(sp, g->rhs, s);
                if (v >= 0 && v < sp.domain && post.count(sp.with_value(s, idx, v)))
                    out.insert(s);
            }
            return out;
        }
        case Game::Kind::NondetAssign: {
            size_t idx = sp.index_of(g->var);
            for (int s = 0; s < sp.num_states(); ++s) {
                bool all = true;
                for (int v = 0; v < sp.domain; ++v) all = all && post.count(sp.with_value(s, idx, v));
                if (all) out.insert(s);
            }
            return out;
        }
        case Game::Kind::Choice: {
            StateSet l = win(sp, g->left, post), r = win(sp, g->right, post);
            for (int s : l)
                if (r.count(s)) out.insert(s);
            return out;
        }
        case Game::Kind::Seq:
            return win(sp, g->left, win(sp, g->right, post));
        case Game::Kind::Repeat: {
            StateSet x;
            for (int s = 0; s < sp.num_states(); ++s) x.insert(s);
            for (;;) {
                StateSet stepped = win(sp, g->body, x);
                StateSet next;
                for (int s : post)
                    if (stepped.count(s)) next.insert(s);
                if (next == x) return x;
                x = std::move(next);
            }
        }
        default:
            throw std::out_of_range("oracle: games must be discrete and dual-free");
    }
}

inline bool eval_formula(const Space& sp, const FormulaPtr& f, int state) {
    switch (f->kind) {
        case Formula::Kind::Compare: {
            int l = eval_term(sp, f->lhs, state), r = eval_term(sp, f->rhs, state);
            switch (f->op) {
                case CompareOp::Le: return l <= r;
                case CompareOp::Lt: return l < r;
                case CompareOp::Eq: return l == r;
                case CompareOp::Ne: return l != r;
                case CompareOp::Gt: return l > r;
                case CompareOp::Ge: return l >= r;
            }
            return false;
        }
        case Formula::Kind::Box: {
            StateSet post;
            for (int s = 0; s < sp.num_states(); ++s)
                if (eval_formula(sp, f->post, s)) post.insert(s);
            return win(sp, f->game, post).count(state) > 0;
        }
        default:
            throw std::out_of_range("oracle: unsupported formula");
    }
}

// true iff for every postcondition P and state s, winning [lhs]P implies
// winning [rhs]P
inline bool refines(const Space& sp, const GamePtr& lhs, const GamePtr& rhs) {
    int n = sp.num_states();
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        StateSet post;
        for (int s = 0; s < n; ++s)
            if (mask & (1u << s)) post.insert(s);
        StateSet wl = win(sp, lhs, post), wr = win(sp, rhs, post);
        for (int s : wl)
            if (!wr.count(s)) return false;
    }
    return true;
}

// random dual-free discrete games closed over the 2-point domain
inline GamePtr rand_small_game(gen::Rng& rng, const Space& sp, int depth) {
    auto rand_var = [&] { return base_var(sp.vars[rng.pick(0, (int)sp.vars.size() - 1)]); };
    auto rand_val = [&]() -> TermPtr {
        if (rng.coin()) return mk_int(rng.pick(0, sp.domain - 1));
        return mk_var(rand_var());
    };
    if (depth <= 0 || rng.pick(0, 3) == 0) {
        switch (rng.pick(0, 2)) {
            case 0:
                return mk_assign(rand_var(), rand_val());
            case 1:
                return mk_nondet(rand_var());
            default:
                return mk_test(mk_compare(static_cast<CompareOp>(rng.pick(0, 5)),
                                          rand_val(), rand_val()));
        }
    }
    switch (rng.pick(0, 2)) {
        case 0:
            return mk_choice(rand_small_game(rng, sp, depth - 1),
                             rand_small_game(rng, sp, depth - 1));
        case 1:
            return mk_seq(rand_small_game(rng, sp, depth - 1),
                          rand_small_game(rng, sp, depth - 1));
        default:
            return mk_repeat(rand_small_game(rng, sp, depth - 1));
    }
}

}  // namespace cdgl::oracle
