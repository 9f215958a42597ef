#include "core/poly.hpp"

namespace cdgl {

static unsigned total_degree(const Poly::Monomial& m) {
    unsigned d = 0;
    for (const auto& [v, e] : m) d += e;
    return d;
}

// Graded lexicographic, leading monomial first: higher degree sorts earlier;
// on equal degree the monomial with the higher exponent on the earliest
// differing variable sorts earlier.
bool Poly::MonoLess::operator()(const Monomial& a, const Monomial& b) const {
    unsigned da = total_degree(a), db = total_degree(b);
    if (da != db) return da > db;
    auto ia = a.begin(), ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (ia->first != ib->first) return ia->first < ib->first;
        if (ia->second != ib->second) return ia->second > ib->second;
        ++ia;
        ++ib;
    }
    return ia != a.end();
}

void Poly::add_mono(const Monomial& m, const Rational& c) {
    if (c.is_zero()) return;
    auto it = monos_.find(m);
    if (it == monos_.end()) {
        monos_.emplace(m, c);
    } else {
        it->second = it->second + c;
        if (it->second.is_zero()) monos_.erase(it);
    }
}

Poly Poly::constant(Rational c) {
    Poly p;
    p.add_mono({}, c);
    return p;
}

Poly Poly::variable(VarId v) {
    Poly p;
    p.add_mono({{std::move(v), 1}}, Rational(1));
    return p;
}

Poly Poly::from_term(const TermPtr& t) {
    switch (t->kind) {
        case Term::Kind::Rational:
            return constant(t->value);
        case Term::Kind::Variable:
            return variable(t->var);
        case Term::Kind::Sum:
            return from_term(t->lhs) + from_term(t->rhs);
        case Term::Kind::Product:
            return from_term(t->lhs) * from_term(t->rhs);
        case Term::Kind::Differential:
            throw UnsupportedTerm("differential inside polynomial normalization");
    }
    return {};
}

Poly Poly::operator+(const Poly& o) const {
    Poly r = *this;
    for (const auto& [m, c] : o.monos_) r.add_mono(m, c);
    return r;
}

Poly Poly::operator-(const Poly& o) const {
    Poly r = *this;
    for (const auto& [m, c] : o.monos_) r.add_mono(m, -c);
    return r;
}

Poly Poly::operator*(const Poly& o) const {
    Poly r;
    for (const auto& [m1, c1] : monos_) {
        for (const auto& [m2, c2] : o.monos_) {
            Monomial m = m1;
            for (const auto& [v, e] : m2) m[v] += e;
            r.add_mono(m, c1 * c2);
        }
    }
    return r;
}

Poly Poly::scaled(const Rational& c) const {
    Poly r;
    for (const auto& [m, k] : monos_) r.add_mono(m, k * c);
    return r;
}

std::optional<Rational> Poly::as_constant() const {
    if (monos_.empty()) return Rational(0);
    if (monos_.size() == 1 && monos_.begin()->first.empty()) return monos_.begin()->second;
    return std::nullopt;
}

bool Poly::is_linear() const {
    for (const auto& [m, c] : monos_)
        if (total_degree(m) > 1) return false;
    return true;
}

VarSet Poly::variables() const {
    VarSet r;
    for (const auto& [m, c] : monos_)
        for (const auto& [v, e] : m) r.insert(v);
    return r;
}

Poly Poly::partial_derivative(const VarId& v) const {
    Poly r;
    for (const auto& [m, c] : monos_) {
        auto it = m.find(v);
        if (it == m.end()) continue;
        Monomial dm = m;
        if (it->second == 1)
            dm.erase(v);
        else
            dm[v] = it->second - 1;
        r.add_mono(dm, c * Rational(static_cast<long long>(it->second)));
    }
    return r;
}

Poly Poly::total_differential() const {
    VarSet vars = variables();
    for (const auto& v : vars)
        if (v.primed) throw UnsupportedTerm("differential of a term mentioning " + v.str());
    Poly r;
    for (const auto& v : vars) r = r + partial_derivative(v) * variable(VarId{v.name, true});
    return r;
}

Poly Poly::compose(const std::map<VarId, Poly>& subst) const {
    Poly r;
    for (const auto& [m, c] : monos_) {
        Poly acc = constant(c);
        for (const auto& [v, e] : m) {
            auto it = subst.find(v);
            Poly base = it != subst.end() ? it->second : variable(v);
            for (unsigned i = 0; i < e; ++i) acc = acc * base;
        }
        r = r + acc;
    }
    return r;
}

Rational Poly::eval(const std::map<VarId, Rational>& state) const {
    Rational r(0);
    for (const auto& [m, c] : monos_) {
        Rational acc = c;
        for (const auto& [v, e] : m) {
            auto it = state.find(v);
            if (it == state.end()) throw std::out_of_range("unbound variable " + v.str());
            for (unsigned i = 0; i < e; ++i) acc = acc * it->second;
        }
        r = r + acc;
    }
    return r;
}

TermPtr Poly::to_term() const {
    if (monos_.empty()) return mk_int(0);
    TermPtr sum;
    for (const auto& [m, c] : monos_) {
        TermPtr factor;
        bool unit = c == Rational(1) && !m.empty();
        if (!unit) factor = mk_rat(c);
        for (const auto& [v, e] : m) {
            for (unsigned i = 0; i < e; ++i) {
                TermPtr vt = mk_var(v);
                factor = factor ? mk_product(factor, vt) : vt;
            }
        }
        sum = sum ? mk_sum(sum, factor) : factor;
    }
    return sum;
}

TermPtr poly_normalize(const TermPtr& t) { return Poly::from_term(t).to_term(); }

TermPtr differentiate(const TermPtr& t) { return Poly::from_term(t).total_differential().to_term(); }

bool poly_eq(const TermPtr& a, const TermPtr& b) { return Poly::from_term(a) == Poly::from_term(b); }

Rational eval_term(const TermPtr& t, const std::map<VarId, Rational>& state) {
    switch (t->kind) {
        case Term::Kind::Rational:
            return t->value;
        case Term::Kind::Variable: {
            auto it = state.find(t->var);
            if (it == state.end()) throw std::out_of_range("unbound variable " + t->var.str());
            return it->second;
        }
        case Term::Kind::Sum:
            return eval_term(t->lhs, state) + eval_term(t->rhs, state);
        case Term::Kind::Product:
            return eval_term(t->lhs, state) * eval_term(t->rhs, state);
        case Term::Kind::Differential:
            throw UnsupportedTerm("cannot evaluate a differential term");
    }
    throw UnsupportedTerm("bad term");
}

}  // namespace cdgl
