#include "core/ast.hpp"

#include <algorithm>
#include <stdexcept>

namespace cdgl {

const char* compare_op_str(CompareOp op) {
    switch (op) {
        case CompareOp::Le: return "<=";
        case CompareOp::Lt: return "<";
        case CompareOp::Eq: return "=";
        case CompareOp::Ne: return "!=";
        case CompareOp::Gt: return ">";
        case CompareOp::Ge: return ">=";
    }
    return "?";
}

const FormulaPtr* Context::lookup(const std::string& label) const {
    for (const auto& a : items)
        if (a.label == label) return &a.formula;
    return nullptr;
}

bool Context::has_label(const std::string& label) const { return lookup(label) != nullptr; }

Context Context::extended(std::string label, FormulaPtr f) const {
    Context c = *this;
    c.items.push_back({std::move(label), std::move(f)});
    return c;
}

// ---- constructors ----

TermPtr mk_rat(Rational v) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Rational;
    t->value = std::move(v);
    return t;
}

TermPtr mk_int(long long v) { return mk_rat(Rational(v)); }

TermPtr mk_var(VarId v) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Variable;
    t->var = std::move(v);
    return t;
}

TermPtr mk_var(const std::string& name) { return mk_var(base_var(name)); }

TermPtr mk_sum(TermPtr a, TermPtr b) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Sum;
    t->lhs = std::move(a);
    t->rhs = std::move(b);
    return t;
}

TermPtr mk_product(TermPtr a, TermPtr b) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Product;
    t->lhs = std::move(a);
    t->rhs = std::move(b);
    return t;
}

TermPtr mk_differential(TermPtr a) {
    auto t = std::make_shared<Term>();
    t->kind = Term::Kind::Differential;
    t->inner = std::move(a);
    return t;
}

TermPtr mk_neg(TermPtr a) {
    if (a->kind == Term::Kind::Rational) return mk_rat(-a->value);
    return mk_product(mk_int(-1), std::move(a));
}

TermPtr mk_minus(TermPtr a, TermPtr b) { return mk_sum(std::move(a), mk_neg(std::move(b))); }

GamePtr mk_test(FormulaPtr cond) {
    auto g = std::make_shared<Game>();
    g->kind = Game::Kind::Test;
    g->cond = std::move(cond);
    return g;
}

GamePtr mk_assign(VarId var, TermPtr rhs) {
    auto g = std::make_shared<Game>();
    g->kind = Game::Kind::Assign;
    g->var = std::move(var);
    g->rhs = std::move(rhs);
    return g;
}

GamePtr mk_nondet(VarId var) {
    auto g = std::make_shared<Game>();
    g->kind = Game::Kind::NondetAssign;
    g->var = std::move(var);
    return g;
}

GamePtr mk_ode(std::vector<OdeEquation> eqs, FormulaPtr constraint) {
    auto g = std::make_shared<Game>();
    g->kind = Game::Kind::Ode;
    g->equations = std::move(eqs);
    g->cond = std::move(constraint);
    for (size_t i = 0; i < g->equations.size(); ++i) {
        if (g->equations[i].var.primed) throw std::invalid_argument("ODE equations bind base variables");
        for (size_t j = i + 1; j < g->equations.size(); ++j)
            if (g->equations[i].var == g->equations[j].var)
                throw std::invalid_argument("ODE binds variable twice: " + g->equations[i].var.str());
    }
    return g;
}

GamePtr mk_choice(GamePtr a, GamePtr b) {
    auto g = std::make_shared<Game>();
    g->kind = Game::Kind::Choice;
    g->left = std::move(a);
    g->right = std::move(b);
    return g;
}

GamePtr mk_seq(GamePtr a, GamePtr b) {
    auto g = std::make_shared<Game>();
    g->kind = Game::Kind::Seq;
    g->left = std::move(a);
    g->right = std::move(b);
    return g;
}

GamePtr mk_repeat(GamePtr body) {
    auto g = std::make_shared<Game>();
    g->kind = Game::Kind::Repeat;
    g->body = std::move(body);
    return g;
}

GamePtr mk_dual(GamePtr body) {
    auto g = std::make_shared<Game>();
    g->kind = Game::Kind::Dual;
    g->body = std::move(body);
    return g;
}

GamePtr mk_skip() { return mk_test(mk_verum()); }

FormulaPtr mk_compare(CompareOp op, TermPtr l, TermPtr r) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::Compare;
    f->op = op;
    f->lhs = std::move(l);
    f->rhs = std::move(r);
    return f;
}

FormulaPtr mk_box(GamePtr g, FormulaPtr post) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::Box;
    f->game = std::move(g);
    f->post = std::move(post);
    return f;
}

FormulaPtr mk_diamond(GamePtr g, FormulaPtr post) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::Diamond;
    f->game = std::move(g);
    f->post = std::move(post);
    return f;
}

FormulaPtr mk_refine(std::optional<unsigned> rank, GamePtr l, GamePtr r) {
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Kind::Refine;
    f->rank = rank;
    f->rleft = std::move(l);
    f->rright = std::move(r);
    return f;
}

FormulaPtr mk_arefine(std::optional<unsigned> rank, GamePtr l, GamePtr r) {
    return mk_refine(rank, mk_dual(std::move(l)), mk_dual(std::move(r)));
}

FormulaPtr mk_verum() { return mk_compare(CompareOp::Gt, mk_int(1), mk_int(0)); }
FormulaPtr mk_falsum() { return mk_compare(CompareOp::Gt, mk_int(0), mk_int(1)); }

FormulaPtr mk_and(FormulaPtr a, FormulaPtr b) { return mk_diamond(mk_test(std::move(a)), std::move(b)); }

FormulaPtr mk_or(FormulaPtr a, FormulaPtr b) {
    return mk_diamond(mk_choice(mk_test(std::move(a)), mk_test(std::move(b))), mk_verum());
}

FormulaPtr mk_imp(FormulaPtr a, FormulaPtr b) { return mk_box(mk_test(std::move(a)), std::move(b)); }

FormulaPtr mk_iff(FormulaPtr a, FormulaPtr b) {
    return mk_and(mk_imp(a, b), mk_imp(std::move(b), std::move(a)));
}

FormulaPtr mk_not(FormulaPtr a) { return mk_imp(std::move(a), mk_falsum()); }

FormulaPtr mk_forall(VarId v, FormulaPtr body) { return mk_box(mk_nondet(std::move(v)), std::move(body)); }
FormulaPtr mk_exists(VarId v, FormulaPtr body) { return mk_diamond(mk_nondet(std::move(v)), std::move(body)); }

FormulaPtr mk_and_all(const std::vector<FormulaPtr>& fs) {
    if (fs.empty()) return mk_verum();
    FormulaPtr acc = fs.back();
    for (size_t i = fs.size() - 1; i-- > 0;) acc = mk_and(fs[i], acc);
    return acc;
}

// ---- recognizers ----

bool is_verum(const FormulaPtr& f) {
    return f->kind == Formula::Kind::Compare && f->op == CompareOp::Gt &&
           f->lhs->kind == Term::Kind::Rational && f->lhs->value == Rational(1) &&
           f->rhs->kind == Term::Kind::Rational && f->rhs->value == Rational(0);
}

bool is_falsum(const FormulaPtr& f) {
    return f->kind == Formula::Kind::Compare && f->op == CompareOp::Gt &&
           f->lhs->kind == Term::Kind::Rational && f->lhs->value == Rational(0) &&
           f->rhs->kind == Term::Kind::Rational && f->rhs->value == Rational(1);
}

bool is_skip(const GamePtr& g) { return g->kind == Game::Kind::Test && is_verum(g->cond); }

bool match_and(const FormulaPtr& f, FormulaPtr& a, FormulaPtr& b) {
    if (f->kind != Formula::Kind::Diamond || f->game->kind != Game::Kind::Test) return false;
    a = f->game->cond;
    b = f->post;
    return true;
}

bool match_or(const FormulaPtr& f, FormulaPtr& a, FormulaPtr& b) {
    if (f->kind != Formula::Kind::Diamond || f->game->kind != Game::Kind::Choice) return false;
    if (!is_verum(f->post)) return false;
    const auto& l = f->game->left;
    const auto& r = f->game->right;
    if (l->kind != Game::Kind::Test || r->kind != Game::Kind::Test) return false;
    a = l->cond;
    b = r->cond;
    return true;
}

bool match_imp(const FormulaPtr& f, FormulaPtr& a, FormulaPtr& b) {
    if (f->kind != Formula::Kind::Box || f->game->kind != Game::Kind::Test) return false;
    a = f->game->cond;
    b = f->post;
    return true;
}

bool match_not(const FormulaPtr& f, FormulaPtr& a) {
    FormulaPtr b;
    if (!match_imp(f, a, b)) return false;
    return is_falsum(b);
}

bool match_forall(const FormulaPtr& f, VarId& v, FormulaPtr& body) {
    if (f->kind != Formula::Kind::Box || f->game->kind != Game::Kind::NondetAssign) return false;
    v = f->game->var;
    body = f->post;
    return true;
}

bool match_exists(const FormulaPtr& f, VarId& v, FormulaPtr& body) {
    if (f->kind != Formula::Kind::Diamond || f->game->kind != Game::Kind::NondetAssign) return false;
    v = f->game->var;
    body = f->post;
    return true;
}

// ---- comparison ----

static int cmp3(int a, int b) { return a < b ? -1 : a > b ? 1 : 0; }

static int var_cmp(const VarId& a, const VarId& b) {
    if (a.name != b.name) return a.name < b.name ? -1 : 1;
    return cmp3(a.primed ? 1 : 0, b.primed ? 1 : 0);
}

int term_cmp(const TermPtr& a, const TermPtr& b) {
    if (a.get() == b.get()) return 0;
    if (a->kind != b->kind) return cmp3(static_cast<int>(a->kind), static_cast<int>(b->kind));
    switch (a->kind) {
        case Term::Kind::Rational:
            if (a->value == b->value) return 0;
            return a->value < b->value ? -1 : 1;
        case Term::Kind::Variable:
            return var_cmp(a->var, b->var);
        case Term::Kind::Sum:
        case Term::Kind::Product: {
            int c = term_cmp(a->lhs, b->lhs);
            return c != 0 ? c : term_cmp(a->rhs, b->rhs);
        }
        case Term::Kind::Differential:
            return term_cmp(a->inner, b->inner);
    }
    return 0;
}

int game_cmp(const GamePtr& a, const GamePtr& b) {
    if (a.get() == b.get()) return 0;
    if (a->kind != b->kind) return cmp3(static_cast<int>(a->kind), static_cast<int>(b->kind));
    switch (a->kind) {
        case Game::Kind::Test:
            return formula_cmp(a->cond, b->cond);
        case Game::Kind::Assign: {
            int c = var_cmp(a->var, b->var);
            return c != 0 ? c : term_cmp(a->rhs, b->rhs);
        }
        case Game::Kind::NondetAssign:
            return var_cmp(a->var, b->var);
        case Game::Kind::Ode: {
            int c = cmp3(static_cast<int>(a->equations.size()), static_cast<int>(b->equations.size()));
            if (c != 0) return c;
            for (size_t i = 0; i < a->equations.size(); ++i) {
                c = var_cmp(a->equations[i].var, b->equations[i].var);
                if (c != 0) return c;
                c = term_cmp(a->equations[i].rhs, b->equations[i].rhs);
                if (c != 0) return c;
            }
            return formula_cmp(a->cond, b->cond);
        }
        case Game::Kind::Choice:
        case Game::Kind::Seq: {
            int c = game_cmp(a->left, b->left);
            return c != 0 ? c : game_cmp(a->right, b->right);
        }
        case Game::Kind::Repeat:
        case Game::Kind::Dual:
            return game_cmp(a->body, b->body);
    }
    return 0;
}

int formula_cmp(const FormulaPtr& a, const FormulaPtr& b) {
    if (a.get() == b.get()) return 0;
    if (a->kind != b->kind) return cmp3(static_cast<int>(a->kind), static_cast<int>(b->kind));
    switch (a->kind) {
        case Formula::Kind::Compare: {
            int c = cmp3(static_cast<int>(a->op), static_cast<int>(b->op));
            if (c != 0) return c;
            c = term_cmp(a->lhs, b->lhs);
            return c != 0 ? c : term_cmp(a->rhs, b->rhs);
        }
        case Formula::Kind::Box:
        case Formula::Kind::Diamond: {
            int c = game_cmp(a->game, b->game);
            return c != 0 ? c : formula_cmp(a->post, b->post);
        }
        case Formula::Kind::Refine: {
            long ra = a->rank ? static_cast<long>(*a->rank) : -1;
            long rb = b->rank ? static_cast<long>(*b->rank) : -1;
            if (ra != rb) return ra < rb ? -1 : 1;
            int c = game_cmp(a->rleft, b->rleft);
            return c != 0 ? c : game_cmp(a->rright, b->rright);
        }
    }
    return 0;
}

bool term_eq(const TermPtr& a, const TermPtr& b) { return term_cmp(a, b) == 0; }
bool game_eq(const GamePtr& a, const GamePtr& b) { return game_cmp(a, b) == 0; }
bool formula_eq(const FormulaPtr& a, const FormulaPtr& b) { return formula_cmp(a, b) == 0; }

// ---- rank ----

unsigned rank_of(const GamePtr& g) {
    switch (g->kind) {
        case Game::Kind::Test:
            return rank_of(g->cond);
        case Game::Kind::Assign:
        case Game::Kind::NondetAssign:
            return 0;
        case Game::Kind::Ode:
            return rank_of(g->cond);
        case Game::Kind::Choice:
        case Game::Kind::Seq:
            return std::max(rank_of(g->left), rank_of(g->right));
        case Game::Kind::Repeat:
        case Game::Kind::Dual:
            return rank_of(g->body);
    }
    return 0;
}

unsigned rank_of(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Compare:
            return 0;
        case Formula::Kind::Box:
        case Formula::Kind::Diamond:
            return std::max(rank_of(f->game), rank_of(f->post));
        case Formula::Kind::Refine: {
            unsigned base = std::max(rank_of(f->rleft), rank_of(f->rright));
            unsigned i = f->rank ? *f->rank : base;
            return (i >= base ? i : base) + 1;
        }
    }
    return 0;
}

}  // namespace cdgl
