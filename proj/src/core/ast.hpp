#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "core/rational.hpp"

namespace cdgl {

// A game variable: base identifier plus an optional prime. `x` and `x'` are
// distinct variables; primes track time derivatives inside ODEs.
struct VarId {
    std::string name;
    bool primed = false;

    bool operator==(const VarId& o) const { return primed == o.primed && name == o.name; }
    bool operator!=(const VarId& o) const { return !(*this == o); }
    // Primes sort directly after their base variable.
    bool operator<(const VarId& o) const {
        if (name != o.name) return name < o.name;
        return primed < o.primed;
    }
    std::string str() const { return primed ? name + "'" : name; }
};

inline VarId base_var(std::string n) { return VarId{std::move(n), false}; }
inline VarId primed_var(std::string n) { return VarId{std::move(n), true}; }

using VarSet = std::set<VarId>;

struct Term;
struct Game;
struct Formula;
using TermPtr = std::shared_ptr<const Term>;
using GamePtr = std::shared_ptr<const Game>;
using FormulaPtr = std::shared_ptr<const Formula>;

enum class CompareOp { Le, Lt, Eq, Ne, Gt, Ge };

const char* compare_op_str(CompareOp op);

struct Term {
    enum class Kind { Rational, Variable, Sum, Product, Differential };
    Kind kind;

    cdgl::Rational value;  // Rational
    VarId var;             // Variable
    TermPtr lhs, rhs;      // Sum / Product
    TermPtr inner;         // Differential
};

struct OdeEquation {
    VarId var;  // always a base variable; the ODE binds var and var'
    TermPtr rhs;
};

struct Game {
    enum class Kind { Test, Assign, NondetAssign, Ode, Choice, Seq, Repeat, Dual };
    Kind kind;

    FormulaPtr cond;                    // Test condition / Ode domain constraint
    VarId var;                          // Assign / NondetAssign target
    TermPtr rhs;                        // Assign
    std::vector<OdeEquation> equations; // Ode
    GamePtr left, right;                // Choice / Seq
    GamePtr body;                       // Repeat / Dual
};

// Core formulas. Derived connectives (and/or/imp/not/forall/exists, verum,
// falsum) elaborate to this core at parse time. Angelic refinement a =<< b is
// stored as Refine(dual a, dual b).
struct Formula {
    enum class Kind { Compare, Box, Diamond, Refine };
    Kind kind;

    CompareOp op = CompareOp::Eq;  // Compare
    TermPtr lhs, rhs;              // Compare
    GamePtr game;                  // Box / Diamond
    FormulaPtr post;               // Box / Diamond
    std::optional<unsigned> rank;  // Refine annotation; nullopt = unannotated
    GamePtr rleft, rright;         // Refine
};

struct Assumption {
    std::string label;
    FormulaPtr formula;
};

// Ordered hypothesis list with pairwise distinct labels.
struct Context {
    std::vector<Assumption> items;

    const FormulaPtr* lookup(const std::string& label) const;
    bool has_label(const std::string& label) const;
    Context extended(std::string label, FormulaPtr f) const;
    size_t size() const { return items.size(); }
};

// ---- constructors ----

TermPtr mk_rat(Rational v);
TermPtr mk_int(long long v);
TermPtr mk_var(VarId v);
TermPtr mk_var(const std::string& name);
TermPtr mk_sum(TermPtr a, TermPtr b);
TermPtr mk_product(TermPtr a, TermPtr b);
TermPtr mk_differential(TermPtr a);
TermPtr mk_neg(TermPtr a);             // (-1) * a, literals folded
TermPtr mk_minus(TermPtr a, TermPtr b);

GamePtr mk_test(FormulaPtr cond);
GamePtr mk_assign(VarId var, TermPtr rhs);
GamePtr mk_nondet(VarId var);
GamePtr mk_ode(std::vector<OdeEquation> eqs, FormulaPtr constraint);
GamePtr mk_choice(GamePtr a, GamePtr b);
GamePtr mk_seq(GamePtr a, GamePtr b);
GamePtr mk_repeat(GamePtr body);
GamePtr mk_dual(GamePtr body);
GamePtr mk_skip();  // ?true

FormulaPtr mk_compare(CompareOp op, TermPtr l, TermPtr r);
FormulaPtr mk_box(GamePtr g, FormulaPtr post);
FormulaPtr mk_diamond(GamePtr g, FormulaPtr post);
FormulaPtr mk_refine(std::optional<unsigned> rank, GamePtr l, GamePtr r);
FormulaPtr mk_arefine(std::optional<unsigned> rank, GamePtr l, GamePtr r);  // duals both sides

// Derived connectives, elaborated per their game definitions.
FormulaPtr mk_verum();
FormulaPtr mk_falsum();
FormulaPtr mk_and(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_or(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_imp(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_iff(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_not(FormulaPtr a);
FormulaPtr mk_forall(VarId v, FormulaPtr body);
FormulaPtr mk_exists(VarId v, FormulaPtr body);
FormulaPtr mk_and_all(const std::vector<FormulaPtr>& fs);  // verum when empty

// ---- recognizers for elaborated derived shapes ----

bool is_verum(const FormulaPtr& f);
bool is_falsum(const FormulaPtr& f);
bool is_skip(const GamePtr& g);
// <?a> b  ==  a & b
bool match_and(const FormulaPtr& f, FormulaPtr& a, FormulaPtr& b);
// <?a ++ ?b> true  ==  a | b
bool match_or(const FormulaPtr& f, FormulaPtr& a, FormulaPtr& b);
// [?a] b  ==  a -> b
bool match_imp(const FormulaPtr& f, FormulaPtr& a, FormulaPtr& b);
bool match_not(const FormulaPtr& f, FormulaPtr& a);
bool match_forall(const FormulaPtr& f, VarId& v, FormulaPtr& body);
bool match_exists(const FormulaPtr& f, VarId& v, FormulaPtr& body);

// ---- structural equality / ordering / hashing ----

bool term_eq(const TermPtr& a, const TermPtr& b);
bool game_eq(const GamePtr& a, const GamePtr& b);
bool formula_eq(const FormulaPtr& a, const FormulaPtr& b);

int term_cmp(const TermPtr& a, const TermPtr& b);
int game_cmp(const GamePtr& a, const GamePtr& b);
int formula_cmp(const FormulaPtr& a, const FormulaPtr& b);

// ---- rank ----
// rank(compare) = 0, rank(refine_i) = i + 1, otherwise max of parts.
// Unannotated refinements count with their minimal admissible rank
// (max of the two games' ranks).
unsigned rank_of(const FormulaPtr& f);
unsigned rank_of(const GamePtr& g);

}  // namespace cdgl
