#pragma once

#include <map>
#include <optional>

#include "core/analysis.hpp"
#include "core/ast.hpp"

namespace cdgl {

// Sparse multivariate polynomial over exact rationals. Monomials are kept in
// graded-lexicographic order (highest total degree first; ties broken on the
// variable order of VarId, primes after their base).
class Poly {
public:
    using Monomial = std::map<VarId, unsigned>;

    struct MonoLess {
        bool operator()(const Monomial& a, const Monomial& b) const;
    };

    Poly() = default;
    static Poly constant(Rational c);
    static Poly variable(VarId v);
    // Throws UnsupportedTerm on Differential nodes.
    static Poly from_term(const TermPtr& t);

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly scaled(const Rational& c) const;
    bool operator==(const Poly& o) const { return monos_ == o.monos_; }
    bool operator!=(const Poly& o) const { return !(*this == o); }

    bool is_zero() const { return monos_.empty(); }
    // Constant value if the polynomial has degree 0.
    std::optional<Rational> as_constant() const;
    bool is_linear() const;  // total degree <= 1

    VarSet variables() const;

    Poly partial_derivative(const VarId& v) const;
    // Total spatial differential: sum over base variables x of d/dx * x'.
    // Throws UnsupportedTerm when primed variables occur.
    Poly total_differential() const;

    // Simultaneous substitution of variables by polynomials.
    Poly compose(const std::map<VarId, Poly>& subst) const;

    // Exact evaluation; every variable of the polynomial must be present.
    Rational eval(const std::map<VarId, Rational>& state) const;

    // Canonical term: monomials in display order, left-associated sums and
    // products, unit coefficients dropped.
    TermPtr to_term() const;

    const std::map<Monomial, Rational, MonoLess>& monomials() const { return monos_; }

private:
    std::map<Monomial, Rational, MonoLess> monos_;
    void add_mono(const Monomial& m, const Rational& c);
};

// Canonical polynomial normal form of a term; two terms are semantically
// equal as polynomials iff their normal forms are structurally identical.
TermPtr poly_normalize(const TermPtr& t);

// Total spatial differential, normalized.
TermPtr differentiate(const TermPtr& t);

// Polynomial-semantic term equality.
bool poly_eq(const TermPtr& a, const TermPtr& b);

// Exact evaluation of a differential-free term.
Rational eval_term(const TermPtr& t, const std::map<VarId, Rational>& state);

}  // namespace cdgl
