#pragma once

#include <stdexcept>

#include "core/ast.hpp"

namespace cdgl {

// Capture during substitution: a free occurrence of the substituted variable
// sits under a binder of some variable of FV(replacement) u {var}.
struct AdmissibilityError : std::runtime_error {
    explicit AdmissibilityError(const std::string& what) : std::runtime_error(what) {}
};

struct UnsupportedTerm : std::runtime_error {
    explicit UnsupportedTerm(const std::string& what) : std::runtime_error(what) {}
};

// Free variables: which variables can influence meaning. Structural
// definition with the must-bound refinement on sequencing,
// FV(a;b) = FV(a) u (FV(b) \ MBV(a)), and the tight refinement case
// FV(a =< b) = FV(a) u FV(b).
VarSet free_vars(const TermPtr& t);
VarSet free_vars(const GamePtr& g);
VarSet free_vars(const FormulaPtr& f);
VarSet free_vars(const Context& ctx);

// Bound variables of a game: those that might change during play
// (assignment targets, ODE-bound variables and their primes).
VarSet bound_vars(const GamePtr& g);
// Must-bound: bound on every path.
VarSet must_bound_vars(const GamePtr& g);

// Every variable mentioned anywhere, free or bound. Used for freshness.
VarSet vars_of(const TermPtr& t);
VarSet vars_of(const GamePtr& g);
VarSet vars_of(const FormulaPtr& f);
VarSet vars_of(const Context& ctx);

// Transposition renaming of base names x <-> y, primes renamed along.
// An involution on every AST.
VarId rename_var(const VarId& v, const std::string& x, const std::string& y);
TermPtr rename(const TermPtr& t, const std::string& x, const std::string& y);
GamePtr rename(const GamePtr& g, const std::string& x, const std::string& y);
FormulaPtr rename(const FormulaPtr& f, const std::string& x, const std::string& y);
Context rename(const Context& ctx, const std::string& x, const std::string& y);

// Transposition of exactly two variables (primes not dragged along); the
// ghost step of assignment rules saves a single assigned variable.
TermPtr rename_one(const TermPtr& t, const VarId& a, const VarId& b);
GamePtr rename_one(const GamePtr& g, const VarId& a, const VarId& b);
FormulaPtr rename_one(const FormulaPtr& f, const VarId& a, const VarId& b);
Context rename_one(const Context& ctx, const VarId& a, const VarId& b);

// Replace free occurrences of `var` by `repl`. Occurrences that are bound
// along their path are left alone; throws AdmissibilityError on capture or
// when the variable's binding status is ambiguous (loops and ODEs that both
// read and write it).
TermPtr substitute(const TermPtr& t, const VarId& var, const TermPtr& repl);
FormulaPtr substitute(const FormulaPtr& f, const VarId& var, const TermPtr& repl);

// True iff no dual operator occurs anywhere in g, including games nested
// inside test conditions.
bool is_system(const GamePtr& g);

// First-order: comparisons closed under the derived connectives and
// quantifiers; no primitive modality, no refinement.
bool is_first_order(const FormulaPtr& f);
// First-order and quantifier-free.
bool is_quantifier_free_fo(const FormulaPtr& f);

// Smallest name of the form `stem`, `stem_1`, `stem_2`, ... whose base name
// is not mentioned in `used`.
std::string fresh_name(const std::string& stem, const VarSet& used);

}  // namespace cdgl
