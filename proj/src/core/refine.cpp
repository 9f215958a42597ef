#include "core/refine.hpp"

#include <algorithm>

#include "core/analysis.hpp"
#include "core/poly.hpp"
#include "core/surface.hpp"

namespace cdgl {

namespace {

[[noreturn]] void bad(const std::string& what, const std::string& path) {
    throw RejectError{what, path};
}

struct RefGoal {
    std::optional<unsigned> rank;
    GamePtr lhs, rhs;
};

// A goal acceptable to a refinement rule: either one direction or the
// mutual-refinement conjunction (both directions of the same pair).
struct GoalShape {
    std::optional<unsigned> rank;
    GamePtr a, b;   // as written in the goal (first direction)
    bool mutual = false;
};

std::optional<GoalShape> as_ref_goal(const FormulaPtr& goal) {
    if (goal->kind == Formula::Kind::Refine)
        return GoalShape{goal->rank, goal->rleft, goal->rright, false};
    FormulaPtr l, r;
    if (match_and(goal, l, r) && l->kind == Formula::Kind::Refine &&
        r->kind == Formula::Kind::Refine && l->rank == r->rank &&
        game_eq(l->rleft, r->rright) && game_eq(l->rright, r->rleft))
        return GoalShape{l->rank, l->rleft, l->rright, true};
    return std::nullopt;
}

bool term_peq(const TermPtr& a, const TermPtr& b) { return poly_eq(a, b); }

// A game built from tests and choices of tests denotes a single test of the
// disjunction of its conditions; test refinement rules match through this
// view, which realizes the definitional reading of disjunction as a game.
std::optional<FormulaPtr> test_view(const GamePtr& g) {
    if (g->kind == Game::Kind::Test) return g->cond;
    if (g->kind == Game::Kind::Choice) {
        auto l = test_view(g->left), r = test_view(g->right);
        if (l && r) return mk_or(*l, *r);
        return std::nullopt;
    }
    return std::nullopt;
}

// variables whose value can influence a term, computed on the normal form
VarSet poly_vars(const TermPtr& t) { return Poly::from_term(t).variables(); }

using Matcher = bool (*)(const GamePtr&, const GamePtr&, const std::string& path);

// Try an axiom schema l ~~ r against the goal in either orientation (or both
// for a mutual goal). These axioms are semantic game equalities, so their
// dualled instances l^d ~~ r^d hold as well and are matched too.
bool match_axiom_dir(const GamePtr& a, const GamePtr& b, Matcher m, const std::string& path) {
    if (m(a, b, path) || m(b, a, path)) return true;
    if (a->kind == Game::Kind::Dual && b->kind == Game::Kind::Dual)
        return m(a->body, b->body, path) || m(b->body, a->body, path);
    return false;
}

void match_axiom(const GoalShape& gs, Matcher m, const char* rule, const std::string& path) {
    if (!match_axiom_dir(gs.a, gs.b, m, path))
        bad(std::string(rule) + ": goal does not match the rule shape", path);
}

bool m_dual_skip(const GamePtr& l, const GamePtr& r, const std::string&) {
    return l->kind == Game::Kind::Dual && is_skip(l->body) && is_skip(r);
}

bool m_dual_seq(const GamePtr& l, const GamePtr& r, const std::string&) {
    if (l->kind != Game::Kind::Dual || l->body->kind != Game::Kind::Seq) return false;
    if (r->kind != Game::Kind::Seq || r->left->kind != Game::Kind::Dual ||
        r->right->kind != Game::Kind::Dual)
        return false;
    return game_eq(l->body->left, r->left->body) && game_eq(l->body->right, r->right->body);
}

bool m_dual_assign(const GamePtr& l, const GamePtr& r, const std::string&) {
    return l->kind == Game::Kind::Dual && l->body->kind == Game::Kind::Assign &&
           game_eq(l->body, r);
}

bool m_dual_dne(const GamePtr& l, const GamePtr& r, const std::string&) {
    return l->kind == Game::Kind::Dual && l->body->kind == Game::Kind::Dual &&
           game_eq(l->body->body, r);
}

bool m_unroll(const GamePtr& l, const GamePtr& r, const std::string&) {
    if (r->kind != Game::Kind::Repeat) return false;
    if (l->kind != Game::Kind::Choice || !is_skip(l->left)) return false;
    if (l->right->kind != Game::Kind::Seq || l->right->right->kind != Game::Kind::Repeat)
        return false;
    return game_eq(l->right->left, r->body) && game_eq(l->right->right, r);
}

bool m_seq_id_l(const GamePtr& l, const GamePtr& r, const std::string&) {
    return l->kind == Game::Kind::Seq && is_skip(l->left) && game_eq(l->right, r);
}

bool m_seq_id_r(const GamePtr& l, const GamePtr& r, const std::string&) {
    return l->kind == Game::Kind::Seq && is_skip(l->right) && game_eq(l->left, r);
}

bool m_annih_l(const GamePtr& l, const GamePtr& r, const std::string&) {
    return l->kind == Game::Kind::Seq && l->left->kind == Game::Kind::Test &&
           is_falsum(l->left->cond) && r->kind == Game::Kind::Test && is_falsum(r->cond);
}

bool m_nop_assign(const GamePtr& l, const GamePtr& r, const std::string&) {
    return l->kind == Game::Kind::Assign && l->rhs->kind == Term::Kind::Variable &&
           l->rhs->var == l->var && is_skip(r);
}

bool m_seq_dist_r(const GamePtr& l, const GamePtr& r, const std::string&) {
    // {a ++ b}; c ~~ {a; c} ++ {b; c}
    if (l->kind != Game::Kind::Seq || l->left->kind != Game::Kind::Choice) return false;
    if (r->kind != Game::Kind::Choice || r->left->kind != Game::Kind::Seq ||
        r->right->kind != Game::Kind::Seq)
        return false;
    return game_eq(l->left->left, r->left->left) && game_eq(l->left->right, r->right->left) &&
           game_eq(l->right, r->left->right) && game_eq(l->right, r->right->right);
}

bool m_seq_assoc(const GamePtr& l, const GamePtr& r, const std::string&) {
    // {a; b}; c ~~ a; {b; c}
    if (l->kind != Game::Kind::Seq || l->left->kind != Game::Kind::Seq) return false;
    if (r->kind != Game::Kind::Seq || r->right->kind != Game::Kind::Seq) return false;
    return game_eq(l->left->left, r->left) && game_eq(l->left->right, r->right->left) &&
           game_eq(l->right, r->right->right);
}

bool m_assign_cancel(const GamePtr& l, const GamePtr& r, const std::string& path) {
    if (l->kind != Game::Kind::Seq || l->left->kind != Game::Kind::Assign ||
        l->right->kind != Game::Kind::Assign)
        return false;
    if (r->kind != Game::Kind::Assign) return false;
    if (!(l->left->var == l->right->var) || !(r->var == l->right->var)) return false;
    if (!term_peq(l->right->rhs, r->rhs)) return false;
    VarSet fv = poly_vars(l->right->rhs);
    VarSet fv2 = poly_vars(r->rhs);
    fv.insert(fv2.begin(), fv2.end());
    if (fv.count(r->var)) bad("assignCancel: assigned variable occurs free in the kept term", path);
    return true;
}

bool m_choice_assoc(const GamePtr& l, const GamePtr& r, const std::string&) {
    if (l->kind != Game::Kind::Choice || l->left->kind != Game::Kind::Choice) return false;
    if (r->kind != Game::Kind::Choice || r->right->kind != Game::Kind::Choice) return false;
    return game_eq(l->left->left, r->left) && game_eq(l->left->right, r->right->left) &&
           game_eq(l->right, r->right->right);
}

bool m_choice_comm(const GamePtr& l, const GamePtr& r, const std::string&) {
    return l->kind == Game::Kind::Choice && r->kind == Game::Kind::Choice &&
           game_eq(l->left, r->right) && game_eq(l->right, r->left);
}

bool m_choice_idem(const GamePtr& l, const GamePtr& r, const std::string&) {
    return l->kind == Game::Kind::Choice && game_eq(l->left, l->right) && game_eq(l->left, r);
}

// system-test系 helpers for sysK/sysKd/sysBoxAnd conclusions
bool match_sys_k(const FormulaPtr& goal, bool diamondInner, const std::string& path) {
    FormulaPtr a, rest, b, c;
    if (!match_imp(goal, a, rest) || !match_imp(rest, b, c)) return false;
    if (a->kind != Formula::Kind::Box) return false;
    FormulaPtr pq, q;
    if (!match_imp(a->post, pq, q)) return false;
    Formula::Kind inner = diamondInner ? Formula::Kind::Diamond : Formula::Kind::Box;
    if (b->kind != inner || c->kind != inner) return false;
    if (!game_eq(a->game, b->game) || !game_eq(a->game, c->game)) return false;
    if (!formula_eq(b->post, pq) || !formula_eq(c->post, q)) return false;
    if (!is_system(a->game)) bad("sysK family requires a dual-free game", path);
    return true;
}

bool match_sys_boxand_dir(const FormulaPtr& l, const FormulaPtr& r) {
    // [a]p & [a]q -> [a](p & q)
    FormulaPtr bl, br;
    if (!match_and(l, bl, br)) return false;
    if (bl->kind != Formula::Kind::Box || br->kind != Formula::Kind::Box) return false;
    if (r->kind != Formula::Kind::Box) return false;
    if (!game_eq(bl->game, r->game) || !game_eq(br->game, r->game)) return false;
    FormulaPtr p, q;
    if (!match_and(r->post, p, q)) return false;
    return formula_eq(bl->post, p) && formula_eq(br->post, q);
}

bool match_sys_boxand(const FormulaPtr& goal, const std::string& path) {
    auto check_game = [&](const FormulaPtr& side) {
        if (side->kind == Formula::Kind::Box && !is_system(side->game))
            bad("sysBoxAnd requires a dual-free game", path);
    };
    FormulaPtr l, r;
    if (match_imp(goal, l, r) && (match_sys_boxand_dir(l, r) || match_sys_boxand_dir(r, l))) {
        check_game(r->kind == Formula::Kind::Box ? r : l);
        return true;
    }
    FormulaPtr c1, c2;
    if (match_and(goal, c1, c2)) {
        FormulaPtr l1, r1, l2, r2;
        if (match_imp(c1, l1, r1) && match_imp(c2, l2, r2) && match_sys_boxand_dir(l1, r1) &&
            match_sys_boxand_dir(r2, l2) && formula_eq(l1, r2) && formula_eq(r1, l2)) {
            check_game(r1);
            return true;
        }
    }
    return false;
}

}  // namespace

std::vector<PremiseGoal> rule_premises(const Context& ctx, const Derivation& d,
                                       const FormulaPtr& goal, const std::string& path) {
    auto ref = [&]() -> GoalShape {
        auto gs = as_ref_goal(goal);
        if (!gs) bad("goal is not a refinement", path);
        return *gs;
    };
    auto one_dir = [&]() -> RefGoal {
        GoalShape gs = ref();
        if (gs.mutual) bad("rule proves a single refinement direction", path);
        return RefGoal{gs.rank, gs.a, gs.b};
    };
    auto deriv_premise = [&](const Context& c, std::optional<unsigned> rank, GamePtr l,
                             GamePtr r) {
        return PremiseGoal{false, c, mk_refine(rank, std::move(l), std::move(r))};
    };
    auto proof_premise = [&](const Context& c, FormulaPtr f) {
        return PremiseGoal{true, c, std::move(f)};
    };

    switch (d.rule) {
        case RuleName::RefRefl: {
            RefGoal g = one_dir();
            if (!game_eq(g.lhs, g.rhs)) bad("refl: games differ", path);
            return {};
        }
        case RuleName::RefTrans: {
            RefGoal g = one_dir();
            if (!d.game) bad("trans: missing middle game", path);
            return {deriv_premise(ctx, g.rank, g.lhs, d.game),
                    deriv_premise(ctx, g.rank, d.game, g.rhs)};
        }
        case RuleName::ArefTest: {
            RefGoal g = one_dir();
            if (g.lhs->kind != Game::Kind::Dual || g.rhs->kind != Game::Kind::Dual)
                bad("arefTest: goal must refine dualled tests", path);
            auto l = test_view(g.lhs->body), r = test_view(g.rhs->body);
            if (!l || !r) bad("arefTest: goal must refine dualled tests", path);
            return {proof_premise(ctx, mk_imp(*l, *r))};
        }
        case RuleName::DrefTest: {
            RefGoal g = one_dir();
            auto l = test_view(g.lhs), r = test_view(g.rhs);
            if (!l || !r) bad("drefTest: goal must refine tests", path);
            return {proof_premise(ctx, mk_imp(*r, *l))};
        }
        case RuleName::ArefRand: {
            RefGoal g = one_dir();
            if (g.lhs->kind != Game::Kind::Dual || g.lhs->body->kind != Game::Kind::Assign ||
                g.rhs->kind != Game::Kind::Dual ||
                g.rhs->body->kind != Game::Kind::NondetAssign ||
                !(g.lhs->body->var == g.rhs->body->var))
                bad("arefRand: expected {x := f}^d =< {x := *}^d", path);
            return {};
        }
        case RuleName::DrefRand: {
            RefGoal g = one_dir();
            if (g.lhs->kind != Game::Kind::NondetAssign || g.rhs->kind != Game::Kind::Assign ||
                !(g.lhs->var == g.rhs->var))
                bad("drefRand: expected x := * =< x := f", path);
            return {};
        }
        case RuleName::RefChoiceL1: {
            RefGoal g = one_dir();
            if (g.lhs->kind != Game::Kind::Choice || !game_eq(g.lhs->left, g.rhs))
                bad("choiceL1: expected a ++ b =< a", path);
            return {};
        }
        case RuleName::RefChoiceL2: {
            RefGoal g = one_dir();
            if (g.lhs->kind != Game::Kind::Choice || !game_eq(g.lhs->right, g.rhs))
                bad("choiceL2: expected a ++ b =< b", path);
            return {};
        }
        case RuleName::RefChoiceR: {
            RefGoal g = one_dir();
            if (g.rhs->kind != Game::Kind::Choice) bad("choiceR: expected a =< b ++ c", path);
            return {deriv_premise(ctx, g.rank, g.lhs, g.rhs->left),
                    deriv_premise(ctx, g.rank, g.lhs, g.rhs->right)};
        }
        case RuleName::ArefChoiceR1: {
            RefGoal g = one_dir();
            if (g.lhs->kind != Game::Kind::Dual || g.rhs->kind != Game::Kind::Dual ||
                g.rhs->body->kind != Game::Kind::Choice ||
                !game_eq(g.lhs->body, g.rhs->body->left))
                bad("achoiceR1: expected a^d =< {a ++ b}^d", path);
            return {};
        }
        case RuleName::ArefChoiceR2: {
            RefGoal g = one_dir();
            if (g.lhs->kind != Game::Kind::Dual || g.rhs->kind != Game::Kind::Dual ||
                g.rhs->body->kind != Game::Kind::Choice ||
                !game_eq(g.lhs->body, g.rhs->body->right))
                bad("achoiceR2: expected b^d =< {a ++ b}^d", path);
            return {};
        }
        case RuleName::ArefChoiceL: {
            RefGoal g = one_dir();
            if (g.lhs->kind != Game::Kind::Dual || g.lhs->body->kind != Game::Kind::Choice)
                bad("achoiceL: expected {a ++ b}^d on the left", path);
            return {deriv_premise(ctx, g.rank, mk_dual(g.lhs->body->left), g.rhs),
                    deriv_premise(ctx, g.rank, mk_dual(g.lhs->body->right), g.rhs)};
        }
        case RuleName::RefSeq: {
            RefGoal g = one_dir();
            if (g.lhs->kind != Game::Kind::Seq || g.rhs->kind != Game::Kind::Seq)
                bad("seqS: goal must refine sequences", path);
            if (!is_system(g.lhs->left))
                bad("seqS: first component must be a hybrid system", path);
            return {deriv_premise(ctx, g.rank, g.lhs->left, g.rhs->left),
                    proof_premise(ctx, mk_box(g.lhs->left,
                                              mk_refine(g.rank, g.lhs->right, g.rhs->right)))};
        }
        case RuleName::RefSeqG: {
            RefGoal g = one_dir();
            if (g.lhs->kind != Game::Kind::Seq || g.rhs->kind != Game::Kind::Seq)
                bad("seqG: goal must refine sequences", path);
            return {deriv_premise(ctx, g.rank, g.lhs->left, g.rhs->left),
                    deriv_premise(Context{}, g.rank, g.lhs->right, g.rhs->right)};
        }
        case RuleName::RefUnloop: {
            RefGoal g = one_dir();
            if (g.lhs->kind != Game::Kind::Repeat || g.rhs->kind != Game::Kind::Repeat)
                bad("unloop: goal must refine repetitions", path);
            if (!is_system(g.lhs->body)) bad("unloop: body must be a hybrid system", path);
            return {proof_premise(
                ctx, mk_box(g.lhs, mk_refine(g.rank, g.lhs->body, g.rhs->body)))};
        }
        case RuleName::UnrollL:
            match_axiom(ref(), m_unroll, "unrollL", path);
            return {};
        case RuleName::DualSkip:
            match_axiom(ref(), m_dual_skip, "dualSkip", path);
            return {};
        case RuleName::DualSeq:
            match_axiom(ref(), m_dual_seq, "dualSeq", path);
            return {};
        case RuleName::DualAssign:
            match_axiom(ref(), m_dual_assign, "dualAssign", path);
            return {};
        case RuleName::DualDNE:
            match_axiom(ref(), m_dual_dne, "dualDNE", path);
            return {};
        case RuleName::SeqIdL:
            match_axiom(ref(), m_seq_id_l, "seqIdL", path);
            return {};
        case RuleName::SeqIdR:
            match_axiom(ref(), m_seq_id_r, "seqIdR", path);
            return {};
        case RuleName::AnnihL:
            match_axiom(ref(), m_annih_l, "annihL", path);
            return {};
        case RuleName::NopAssign:
            match_axiom(ref(), m_nop_assign, "nopAssign", path);
            return {};
        case RuleName::SeqDistR:
            match_axiom(ref(), m_seq_dist_r, "seqDistR", path);
            return {};
        case RuleName::SeqAssoc:
            match_axiom(ref(), m_seq_assoc, "seqAssoc", path);
            return {};
        case RuleName::AssignCancel:
            match_axiom(ref(), m_assign_cancel, "assignCancel", path);
            return {};
        case RuleName::ChoiceAssoc:
            match_axiom(ref(), m_choice_assoc, "choiceAssoc", path);
            return {};
        case RuleName::ChoiceComm:
            match_axiom(ref(), m_choice_comm, "choiceComm", path);
            return {};
        case RuleName::ChoiceIdem:
            match_axiom(ref(), m_choice_idem, "choiceIdem", path);
            return {};
        case RuleName::RefDC: {
            GoalShape gs = ref();
            auto oriented = [&](const GamePtr& base, const GamePtr& cut)
                -> std::optional<FormulaPtr> {
                if (base->kind != Game::Kind::Ode || cut->kind != Game::Kind::Ode)
                    return std::nullopt;
                if (base->equations.size() != cut->equations.size()) return std::nullopt;
                for (size_t i = 0; i < base->equations.size(); ++i) {
                    if (!(base->equations[i].var == cut->equations[i].var) ||
                        !term_eq(base->equations[i].rhs, cut->equations[i].rhs))
                        return std::nullopt;
                }
                FormulaPtr a, b;
                if (!match_and(cut->cond, a, b) || !formula_eq(a, base->cond))
                    return std::nullopt;
                return mk_box(base, b);  // [ode & phi] psi
            };
            std::optional<FormulaPtr> prem = oriented(gs.a, gs.b);
            if (!prem) prem = oriented(gs.b, gs.a);
            if (!prem) bad("dcRef: goal must relate an ODE and its cut strengthening", path);
            return {proof_premise(ctx, *prem)};
        }
        case RuleName::RefDW: {
            RefGoal g = one_dir();
            if (g.rhs->kind != Game::Kind::Ode) bad("dwRef: right side must be an ODE", path);
            const auto& eqs = g.rhs->equations;
            // x1 := *; ..; x1' := f1; ..; ?psi  right-associated
            GamePtr expect = mk_test(g.rhs->cond);
            for (size_t k = eqs.size(); k-- > 0;)
                expect = mk_seq(mk_assign(primed_var(eqs[k].var.name), eqs[k].rhs), expect);
            for (size_t k = eqs.size(); k-- > 0;)
                expect = mk_seq(mk_nondet(eqs[k].var), expect);
            if (!game_eq(g.lhs, expect))
                bad("dwRef: left side must be the havoc relaxation " + pretty(expect), path);
            return {};
        }
        case RuleName::RefSolve: {
            RefGoal g = one_dir();
            if (g.rhs->kind != Game::Kind::Dual || g.rhs->body->kind != Game::Kind::Ode)
                bad("sol: right side must be a dualled ODE", path);
            GamePtr ode = g.rhs->body;
            if (ode->equations.empty()) bad("sol: empty ODE", path);
            // clock equation t' = 1 leads the system
            const OdeEquation& clock = ode->equations.front();
            auto oneP = Poly::constant(Rational(1));
            if (!(Poly::from_term(clock.rhs) == oneP))
                bad("sol: leading equation must be the clock t' = 1", path);
            VarId t = clock.var;
            // left side: t := d; x := sln ...; x' := f ...; t' := 1
            std::vector<GamePtr> parts;
            GamePtr cur = g.lhs;
            while (cur->kind == Game::Kind::Seq) {
                parts.push_back(cur->left);
                cur = cur->right;
            }
            parts.push_back(cur);
            size_t n = ode->equations.size() - 1;  // non-clock equations
            if (parts.size() != 2 * n + 2) bad("sol: left side has the wrong length", path);
            for (const auto& p : parts)
                if (p->kind != Game::Kind::Assign) bad("sol: left side must assign", path);
            if (!(parts[0]->var == t)) bad("sol: first assignment must set the clock", path);
            TermPtr dur = parts[0]->rhs;
            std::vector<std::pair<VarId, TermPtr>> slns{{t, mk_var(t)}};
            for (size_t i = 0; i < n; ++i) {
                const GamePtr& asn = parts[1 + i];
                if (!(asn->var == ode->equations[i + 1].var))
                    bad("sol: solution assignments must follow the ODE order", path);
                slns.emplace_back(asn->var, asn->rhs);
            }
            for (size_t i = 0; i < n; ++i) {
                const GamePtr& asn = parts[1 + n + i];
                if (!(asn->var == primed_var(ode->equations[i + 1].var.name)) ||
                    !term_peq(asn->rhs, ode->equations[i + 1].rhs))
                    bad("sol: derivative assignments must mirror the ODE", path);
            }
            const GamePtr& last = parts[2 * n + 1];
            if (!(last->var == primed_var(t.name)) || !(Poly::from_term(last->rhs) == oneP))
                bad("sol: final assignment must set the clock derivative to 1", path);
            // side conditions
            VarSet dv = free_vars(dur);
            if (dv.count(t) || dv.count(primed_var(t.name)))
                bad("sol: duration mentions the clock", path);
            for (size_t i = 1; i < ode->equations.size(); ++i) {
                const VarId& x = ode->equations[i].var;
                if (dv.count(x) || dv.count(primed_var(x.name)))
                    bad("sol: duration mentions ODE-bound variable " + x.str(), path);
            }
            std::vector<bool> ok = check_solution(slns, ode->equations, t);
            for (size_t i = 0; i < ok.size(); ++i)
                if (!ok[i])
                    bad("sol: terms do not solve " + ode->equations[i].var.str() + "'", path);
            // the rule applies where the clock starts at zero and the
            // duration is nonnegative; both go through the oracle
            std::vector<PremiseGoal> out;
            out.push_back(PremiseGoal{
                true, ctx, mk_compare(CompareOp::Eq, mk_var(t), mk_int(0))});
            out.push_back(PremiseGoal{true, ctx, mk_compare(CompareOp::Ge, dur, mk_int(0))});
            // domain premise: forall r (0 <= r <= d -> [x := sln(r)] psi)
            VarSet used = vars_of(ctx);
            VarSet gv = vars_of(goal);
            used.insert(gv.begin(), gv.end());
            VarId rf = base_var(fresh_name("r", used));
            TermPtr rv = mk_var(rf);
            FormulaPtr domAt = ode->cond;
            for (size_t i = n; i-- > 0;) {
                TermPtr at = substitute(slns[i + 1].second, t, rv);
                domAt = mk_box(mk_assign(slns[i + 1].first, at), domAt);
            }
            FormulaPtr domAll = mk_forall(
                rf, mk_imp(mk_and(mk_compare(CompareOp::Le, mk_int(0), rv),
                                  mk_compare(CompareOp::Le, rv, dur)),
                           domAt));
            out.push_back(proof_premise(ctx, domAll));
            return out;
        }
        case RuleName::RefDG: {
            RefGoal g = one_dir();
            // y := y0; {x' = f, y' = a y + b & psi}  =<  {x' = f & psi}; {y := *; y' := *}^d
            if (g.lhs->kind != Game::Kind::Seq || g.lhs->left->kind != Game::Kind::Assign ||
                g.lhs->right->kind != Game::Kind::Ode)
                bad("dgRef: left side must be y := y0; ODE", path);
            if (g.rhs->kind != Game::Kind::Seq || g.rhs->left->kind != Game::Kind::Ode ||
                g.rhs->right->kind != Game::Kind::Dual)
                bad("dgRef: right side must be ODE; {y := *; y' := *}^d", path);
            VarId y = g.lhs->left->var;
            const GamePtr& ghostOde = g.lhs->right;
            const GamePtr& baseOde = g.rhs->left;
            if (ghostOde->equations.size() != baseOde->equations.size() + 1)
                bad("dgRef: ghost ODE must extend the base ODE by one equation", path);
            for (size_t i = 0; i < baseOde->equations.size(); ++i) {
                if (!(ghostOde->equations[i].var == baseOde->equations[i].var) ||
                    !term_eq(ghostOde->equations[i].rhs, baseOde->equations[i].rhs))
                    bad("dgRef: base equations differ", path);
            }
            if (!formula_eq(ghostOde->cond, baseOde->cond))
                bad("dgRef: domain constraints differ", path);
            const OdeEquation& ghostEq = ghostOde->equations.back();
            if (!(ghostEq.var == y)) bad("dgRef: ghost equation must bind the assigned variable", path);
            // rhs must be linear in y: total degree in y at most 1
            Poly rhs = Poly::from_term(ghostEq.rhs);
            for (const auto& [m, c] : rhs.monomials()) {
                auto it = m.find(y);
                if (it != m.end() && it->second > 1)
                    bad("dgRef: ghost right-hand side must be linear in " + y.str(), path);
                if (m.count(primed_var(y.name)))
                    bad("dgRef: ghost right-hand side mentions " + y.str() + "'", path);
            }
            const GamePtr& havoc = g.rhs->right->body;
            if (havoc->kind != Game::Kind::Seq || havoc->left->kind != Game::Kind::NondetAssign ||
                havoc->right->kind != Game::Kind::NondetAssign ||
                !(havoc->left->var == y) || !(havoc->right->var == primed_var(y.name)))
                bad("dgRef: right side must end with {y := *; y' := *}^d", path);
            // freshness of y outside the ghost parts
            VarSet used = vars_of(baseOde);
            VarSet v0 = vars_of(g.lhs->left->rhs);
            used.insert(v0.begin(), v0.end());
            if (used.count(y) || used.count(primed_var(y.name)))
                bad("dgRef: ghost " + y.str() + " is not fresh", path);
            return {};
        }
        case RuleName::LoopInline: {
            RefGoal g = one_dir();
            // {?M > 0; B}*; ?M = 0  =<  {alpha*}^d
            if (g.lhs->kind != Game::Kind::Seq || g.lhs->left->kind != Game::Kind::Repeat ||
                g.lhs->right->kind != Game::Kind::Test)
                bad("loopInline: left side must be {?M > 0; B}*; ?M = 0", path);
            const GamePtr& body = g.lhs->left->body;
            if (body->kind != Game::Kind::Seq || body->left->kind != Game::Kind::Test)
                bad("loopInline: loop body must start with the metric guard", path);
            const FormulaPtr& guard = body->left->cond;
            if (guard->kind != Formula::Kind::Compare || guard->op != CompareOp::Gt ||
                !term_eq(guard->rhs, mk_int(0)))
                bad("loopInline: guard must be M > 0", path);
            TermPtr metric = guard->lhs;
            const FormulaPtr& exitq = g.lhs->right->cond;
            if (exitq->kind != Formula::Kind::Compare || exitq->op != CompareOp::Eq ||
                !term_eq(exitq->lhs, metric) || !term_eq(exitq->rhs, mk_int(0)))
                bad("loopInline: exit test must be M = 0", path);
            if (g.rhs->kind != Game::Kind::Dual || g.rhs->body->kind != Game::Kind::Repeat)
                bad("loopInline: right side must be a dualled repetition", path);
            if (!d.formula || !d.term || d.var.name.empty())
                bad("loopInline: missing invariant, bound or metric ghost", path);
            const GamePtr& inner = body->right;
            if (!is_system(inner)) bad("loopInline: inlined body must be a system", path);
            VarSet used = vars_of(ctx);
            VarSet gv = vars_of(goal);
            used.insert(gv.begin(), gv.end());
            VarSet iv = vars_of(d.formula);
            used.insert(iv.begin(), iv.end());
            if (used.count(d.var) || used.count(primed_var(d.var.name)))
                bad("loopInline: metric ghost " + d.var.str() + " is not fresh", path);
            FormulaPtr J = d.formula;
            TermPtr m0 = mk_var(d.var);
            std::string invL = d.label.empty() ? kInvLabel : d.label;
            std::string decL = d.label2.empty() ? kDecLabel : d.label2;
            if (invL == decL) bad("loopInline: premise labels must differ", path);
            FormulaPtr dec = mk_and(mk_compare(CompareOp::Eq, m0, metric),
                                    mk_compare(CompareOp::Gt, metric, mk_int(0)));
            FormulaPtr stepPost =
                mk_and(J, mk_compare(CompareOp::Ge, m0, mk_sum(metric, d.term)));
            Context stepCtx;
            stepCtx.items.push_back({invL, J});
            stepCtx.items.push_back({decL, dec});
            GamePtr alpha = g.rhs->body->body;
            return {proof_premise(ctx, J),
                    proof_premise(stepCtx, mk_diamond(alpha, stepPost)),
                    proof_premise(stepCtx, mk_box(inner, stepPost)),
                    deriv_premise(stepCtx, g.rank, inner, mk_dual(alpha))};
        }
        case RuleName::SysK:
            if (!match_sys_k(goal, false, path)) bad("sysK: goal does not match", path);
            return {};
        case RuleName::SysKd:
            if (!match_sys_k(goal, true, path)) bad("sysKd: goal does not match", path);
            return {};
        case RuleName::SysBoxAnd:
            if (!match_sys_boxand(goal, path)) bad("sysBoxAnd: goal does not match", path);
            return {};
        case RuleName::BoxRefElim:
        case RuleName::DiamondRefElim:
            // handled by Engine::check_deriv directly
            bad("internal: elimination premises are computed by the engine", path);
    }
    bad("unhandled rule", path);
}

void Engine::check_deriv(const Context& ctx, const DerivPtr& d, const FormulaPtr& goal,
                         const std::string& path) {
    if (!d) bad("missing derivation", path);
    if (d->goal && !formula_eq(*d->goal, goal))
        bad("pinned goal " + pretty(*d->goal) + " differs from expected " + pretty(goal), path);
    if (d->rule == RuleName::BoxRefElim || d->rule == RuleName::DiamondRefElim) {
        if (d->subs.size() != 1 || d->proofs.size() != 1)
            bad("refinement elimination takes one proof and one derivation", path);
        check_refine_elim(ctx, d->rule == RuleName::BoxRefElim, d->rank, d->game, d->proofs[0],
                          d->subs[0], goal, path);
        return;
    }
    std::vector<PremiseGoal> premises = rule_premises(ctx, *d, goal, path);
    size_t nd = 0, np = 0;
    for (const auto& pr : premises) (pr.is_proof ? np : nd) += 1;
    if (d->subs.size() != nd || d->proofs.size() != np)
        bad(std::string(rule_name_str(d->rule)) + ": expected " + std::to_string(nd) +
                " sub-derivations and " + std::to_string(np) + " proofs",
            path);
    size_t di = 0, pi = 0;
    for (size_t i = 0; i < premises.size(); ++i) {
        const PremiseGoal& pr = premises[i];
        if (pr.is_proof) {
            check(pr.ctx, d->proofs[pi], pr.goal, path + "/p" + std::to_string(pi));
            ++pi;
        } else {
            check_deriv(pr.ctx, d->subs[di], pr.goal, path + "/sub" + std::to_string(di));
            ++di;
        }
    }
}

RuleApplication apply_rule(RuleName rule, const Instantiation& inst, const Context& ctx) {
    auto mutual = [](GamePtr l, GamePtr r, std::optional<unsigned> rank) {
        FormulaPtr fwd = mk_refine(rank, l, r);
        FormulaPtr bwd = mk_refine(rank, std::move(r), std::move(l));
        return mk_and(std::move(fwd), std::move(bwd));
    };
    auto need = [&](const GamePtr& g, const char* what) {
        if (!g) throw SchemaMismatch(std::string("missing instantiation: ") + what);
        return g;
    };
    FormulaPtr conclusion;
    auto d = std::make_shared<Derivation>();
    d->rule = rule;
    switch (rule) {
        case RuleName::RefRefl:
            conclusion = mk_refine(inst.rank, need(inst.alpha, "alpha"), inst.alpha);
            break;
        case RuleName::RefTrans:
            d->game = need(inst.beta, "beta (middle)");
            conclusion = mk_refine(inst.rank, need(inst.alpha, "alpha"), need(inst.gamma, "gamma"));
            break;
        case RuleName::ArefTest:
            conclusion = mk_refine(inst.rank, mk_dual(mk_test(inst.phi)), mk_dual(mk_test(inst.psi)));
            break;
        case RuleName::DrefTest:
            conclusion = mk_refine(inst.rank, mk_test(inst.phi), mk_test(inst.psi));
            break;
        case RuleName::ArefRand:
            conclusion = mk_refine(inst.rank, mk_dual(mk_assign(inst.var, inst.term)),
                                   mk_dual(mk_nondet(inst.var)));
            break;
        case RuleName::DrefRand:
            conclusion = mk_refine(inst.rank, mk_nondet(inst.var), mk_assign(inst.var, inst.term));
            break;
        case RuleName::RefChoiceL1:
            conclusion = mk_refine(inst.rank,
                                   mk_choice(need(inst.alpha, "alpha"), need(inst.beta, "beta")),
                                   inst.alpha);
            break;
        case RuleName::RefChoiceL2:
            conclusion = mk_refine(inst.rank,
                                   mk_choice(need(inst.alpha, "alpha"), need(inst.beta, "beta")),
                                   inst.beta);
            break;
        case RuleName::RefChoiceR:
            conclusion = mk_refine(inst.rank, need(inst.alpha, "alpha"),
                                   mk_choice(need(inst.beta, "beta"), need(inst.gamma, "gamma")));
            break;
        case RuleName::ArefChoiceR1:
            conclusion =
                mk_refine(inst.rank, mk_dual(need(inst.alpha, "alpha")),
                          mk_dual(mk_choice(inst.alpha, need(inst.beta, "beta"))));
            break;
        case RuleName::ArefChoiceR2:
            conclusion =
                mk_refine(inst.rank, mk_dual(need(inst.beta, "beta")),
                          mk_dual(mk_choice(need(inst.alpha, "alpha"), inst.beta)));
            break;
        case RuleName::ArefChoiceL:
            conclusion = mk_refine(
                inst.rank,
                mk_dual(mk_choice(need(inst.alpha, "alpha"), need(inst.beta, "beta"))),
                need(inst.gamma, "gamma"));
            break;
        case RuleName::RefSeq:
        case RuleName::RefSeqG:
            conclusion =
                mk_refine(inst.rank, mk_seq(need(inst.alpha, "alpha1"), need(inst.gamma, "beta1")),
                          mk_seq(need(inst.beta, "alpha2"), need(inst.delta, "beta2")));
            break;
        case RuleName::RefUnloop:
            conclusion = mk_refine(inst.rank, mk_repeat(need(inst.alpha, "alpha")),
                                   mk_repeat(need(inst.beta, "beta")));
            break;
        case RuleName::UnrollL: {
            GamePtr a = need(inst.alpha, "alpha");
            conclusion = mutual(mk_choice(mk_skip(), mk_seq(a, mk_repeat(a))), mk_repeat(a),
                                inst.rank);
            break;
        }
        case RuleName::DualSkip:
            conclusion = mutual(mk_dual(mk_skip()), mk_skip(), inst.rank);
            break;
        case RuleName::DualSeq: {
            GamePtr a = need(inst.alpha, "alpha"), b = need(inst.beta, "beta");
            conclusion = mutual(mk_dual(mk_seq(a, b)), mk_seq(mk_dual(a), mk_dual(b)), inst.rank);
            break;
        }
        case RuleName::DualAssign: {
            GamePtr a = mk_assign(inst.var, inst.term);
            conclusion = mutual(mk_dual(a), a, inst.rank);
            break;
        }
        case RuleName::DualDNE: {
            GamePtr a = need(inst.alpha, "alpha");
            conclusion = mutual(mk_dual(mk_dual(a)), a, inst.rank);
            break;
        }
        case RuleName::SeqIdL: {
            GamePtr a = need(inst.alpha, "alpha");
            conclusion = mutual(mk_seq(mk_skip(), a), a, inst.rank);
            break;
        }
        case RuleName::SeqIdR: {
            GamePtr a = need(inst.alpha, "alpha");
            conclusion = mutual(mk_seq(a, mk_skip()), a, inst.rank);
            break;
        }
        case RuleName::AnnihL: {
            GamePtr a = need(inst.alpha, "alpha");
            conclusion = mutual(mk_seq(mk_test(mk_falsum()), a), mk_test(mk_falsum()), inst.rank);
            break;
        }
        case RuleName::NopAssign:
            conclusion = mutual(mk_assign(inst.var, mk_var(inst.var)), mk_skip(), inst.rank);
            break;
        case RuleName::SeqDistR: {
            GamePtr a = need(inst.alpha, "alpha"), b = need(inst.beta, "beta"),
                    c = need(inst.gamma, "gamma");
            conclusion = mutual(mk_seq(mk_choice(a, b), c),
                                mk_choice(mk_seq(a, c), mk_seq(b, c)), inst.rank);
            break;
        }
        case RuleName::SeqAssoc: {
            GamePtr a = need(inst.alpha, "alpha"), b = need(inst.beta, "beta"),
                    c = need(inst.gamma, "gamma");
            conclusion = mutual(mk_seq(mk_seq(a, b), c), mk_seq(a, mk_seq(b, c)), inst.rank);
            break;
        }
        case RuleName::AssignCancel: {
            if (!inst.term || !inst.eps) throw SchemaMismatch("assignCancel needs both terms");
            GamePtr first = mk_assign(inst.var, inst.term);
            GamePtr second = mk_assign(inst.var, inst.eps);
            conclusion = mutual(mk_seq(first, second), second, inst.rank);
            break;
        }
        case RuleName::ChoiceAssoc: {
            GamePtr a = need(inst.alpha, "alpha"), b = need(inst.beta, "beta"),
                    c = need(inst.gamma, "gamma");
            conclusion =
                mutual(mk_choice(mk_choice(a, b), c), mk_choice(a, mk_choice(b, c)), inst.rank);
            break;
        }
        case RuleName::ChoiceComm: {
            GamePtr a = need(inst.alpha, "alpha"), b = need(inst.beta, "beta");
            conclusion = mutual(mk_choice(a, b), mk_choice(b, a), inst.rank);
            break;
        }
        case RuleName::ChoiceIdem: {
            GamePtr a = need(inst.alpha, "alpha");
            conclusion = mutual(mk_choice(a, a), a, inst.rank);
            break;
        }
        case RuleName::RefDC: {
            GamePtr base = need(inst.alpha, "alpha (the ODE)");
            if (base->kind != Game::Kind::Ode) throw SchemaMismatch("dcRef needs an ODE");
            GamePtr cut = mk_ode(base->equations, mk_and(base->cond, inst.psi));
            conclusion = mutual(base, cut, inst.rank);
            break;
        }
        case RuleName::RefDW: {
            GamePtr ode = need(inst.alpha, "alpha (the ODE)");
            if (ode->kind != Game::Kind::Ode) throw SchemaMismatch("dwRef needs an ODE");
            GamePtr lhs = mk_test(ode->cond);
            for (size_t k = ode->equations.size(); k-- > 0;)
                lhs = mk_seq(mk_assign(primed_var(ode->equations[k].var.name),
                                       ode->equations[k].rhs),
                             lhs);
            for (size_t k = ode->equations.size(); k-- > 0;)
                lhs = mk_seq(mk_nondet(ode->equations[k].var), lhs);
            conclusion = mk_refine(inst.rank, lhs, ode);
            break;
        }
        default:
            throw SchemaMismatch(std::string("forward construction for ") + rule_name_str(rule) +
                                 " takes a hand-written goal; build the derivation directly");
    }
    try {
        RuleApplication app{conclusion, rule_premises(ctx, *d, conclusion, "apply")};
        return app;
    } catch (const RejectError& e) {
        throw SchemaMismatch(e.reason);
    }
}

}  // namespace cdgl
