#include "core/linarith.hpp"

#include <stdexcept>

namespace cdgl {

namespace {

struct NotLinear : std::runtime_error {
    NotLinear() : std::runtime_error("not in the linear fragment") {}
};

// literal: poly REL 0
enum class Rel { Eq, Le, Lt, Ne };

struct Lit {
    Poly poly;
    Rel rel;
};

using Branch = std::vector<Lit>;
using Dnf = std::vector<Branch>;

Lit lit_of(CompareOp op, const Poly& diff, bool positive) {
    if (!positive) {
        switch (op) {
            case CompareOp::Le: return {diff.scaled(Rational(-1)), Rel::Lt};  // !(l<=r) == l>r
            case CompareOp::Lt: return {diff.scaled(Rational(-1)), Rel::Le};
            case CompareOp::Eq: return {diff, Rel::Ne};
            case CompareOp::Ne: return {diff, Rel::Eq};
            case CompareOp::Gt: return {diff, Rel::Le};
            case CompareOp::Ge: return {diff, Rel::Lt};
        }
    }
    switch (op) {
        case CompareOp::Le: return {diff, Rel::Le};
        case CompareOp::Lt: return {diff, Rel::Lt};
        case CompareOp::Eq: return {diff, Rel::Eq};
        case CompareOp::Ne: return {diff, Rel::Ne};
        case CompareOp::Gt: return {diff.scaled(Rational(-1)), Rel::Lt};
        case CompareOp::Ge: return {diff.scaled(Rational(-1)), Rel::Le};
    }
    throw NotLinear();
}

Dnf cross(const Dnf& a, const Dnf& b) {
    Dnf out;
    for (const auto& x : a) {
        for (const auto& y : b) {
            Branch c = x;
            c.insert(c.end(), y.begin(), y.end());
            out.push_back(std::move(c));
        }
    }
    return out;
}

Dnf join(Dnf a, const Dnf& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// DNF of f (or of its negation when positive is false)
Dnf dnf(const FormulaPtr& f, bool positive) {
    FormulaPtr a, b;
    if (match_not(f, a)) return dnf(a, !positive);
    if (match_and(f, a, b))
        return positive ? cross(dnf(a, true), dnf(b, true)) : join(dnf(a, false), dnf(b, false));
    if (match_or(f, a, b))
        return positive ? join(dnf(a, true), dnf(b, true)) : cross(dnf(a, false), dnf(b, false));
    if (match_imp(f, a, b))
        return positive ? join(dnf(a, false), dnf(b, true)) : cross(dnf(a, true), dnf(b, false));
    if (f->kind == Formula::Kind::Compare) {
        Poly diff = Poly::from_term(f->lhs) - Poly::from_term(f->rhs);
        return {{lit_of(f->op, diff, positive)}};
    }
    throw NotLinear();
}

// Propagate definite values x = c until a fixed point; this is what lets
// products like (L+R)*t pass once L and R are pinned.
void propagate_ground(Branch& br) {
    for (bool changed = true; changed;) {
        changed = false;
        for (size_t i = 0; i < br.size() && !changed; ++i) {
            const Lit& lit = br[i];
            if (lit.rel != Rel::Eq) continue;
            VarSet vars = lit.poly.variables();
            if (vars.size() != 1 || !lit.poly.is_linear()) continue;
            VarId v = *vars.begin();
            Rational coeff, cst(0);
            for (const auto& [m, c] : lit.poly.monomials()) {
                if (m.empty())
                    cst = c;
                else
                    coeff = c;
            }
            Rational value = -cst / coeff;
            std::map<VarId, Poly> sub{{v, Poly::constant(value)}};
            for (size_t j = 0; j < br.size(); ++j) {
                if (j == i) continue;
                if (br[j].poly.variables().count(v)) {
                    br[j].poly = br[j].poly.compose(sub);
                    changed = true;
                }
            }
        }
    }
}

bool branch_feasible(Branch br);

// split a disequality into two strict branches
bool split_ne(const Branch& br, size_t idx) {
    Branch lo = br, hi = br;
    lo[idx] = {br[idx].poly, Rel::Lt};
    hi[idx] = {br[idx].poly.scaled(Rational(-1)), Rel::Lt};
    return branch_feasible(std::move(lo)) || branch_feasible(std::move(hi));
}

std::optional<VarId> pick_var(const Branch& br) {
    for (const auto& lit : br) {
        VarSet vs = lit.poly.variables();
        if (!vs.empty()) return *vs.begin();
    }
    return std::nullopt;
}

Rational coeff_of(const Poly& p, const VarId& v) {
    for (const auto& [m, c] : p.monomials()) {
        if (m.size() == 1 && m.begin()->first == v && m.begin()->second == 1) return c;
    }
    return Rational(0);
}

Poly drop_var(const Poly& p, const VarId& v) {
    Poly r = p;
    Rational c = coeff_of(p, v);
    if (!c.is_zero()) r = r - Poly::variable(v).scaled(c);
    return r;
}

bool branch_feasible(Branch br) {
    propagate_ground(br);
    for (const auto& lit : br)
        if (!lit.poly.is_linear()) throw NotLinear();
    for (size_t i = 0; i < br.size(); ++i)
        if (br[i].rel == Rel::Ne) return split_ne(br, i);

    // Gaussian elimination of equalities
    for (bool again = true; again;) {
        again = false;
        for (size_t i = 0; i < br.size(); ++i) {
            if (br[i].rel != Rel::Eq) continue;
            VarSet vs = br[i].poly.variables();
            if (vs.empty()) continue;
            VarId v = *vs.begin();
            Rational c = coeff_of(br[i].poly, v);
            // v = -(rest)/c
            Poly rest = drop_var(br[i].poly, v).scaled(-(Rational(1) / c));
            std::map<VarId, Poly> sub{{v, rest}};
            Branch next;
            for (size_t j = 0; j < br.size(); ++j) {
                if (j == i) continue;
                next.push_back({br[j].poly.compose(sub), br[j].rel});
            }
            br = std::move(next);
            again = true;
            break;
        }
    }

    // Fourier-Motzkin elimination on the remaining inequalities
    for (;;) {
        auto v = pick_var(br);
        if (!v) break;
        std::vector<std::pair<Poly, bool>> lower, upper;  // bound, strict
        Branch rest;
        for (const auto& lit : br) {
            Rational c = coeff_of(lit.poly, *v);
            if (c.is_zero()) {
                rest.push_back(lit);
                continue;
            }
            // c*v + q rel 0  ->  v <= -q/c (c>0) or v >= -q/c (c<0)
            Poly bound = drop_var(lit.poly, *v).scaled(-(Rational(1) / c));
            bool strict = lit.rel == Rel::Lt;
            if (c.is_negative())
                lower.emplace_back(bound, strict);
            else
                upper.emplace_back(bound, strict);
        }
        for (const auto& [lo, ls] : lower) {
            for (const auto& [up, us] : upper) {
                // lo (<|<=) v (<|<=) up  ->  lo - up (<|<=) 0
                rest.push_back({lo - up, (ls || us) ? Rel::Lt : Rel::Le});
            }
        }
        br = std::move(rest);
    }

    for (const auto& lit : br) {
        Rational c = *lit.poly.as_constant();
        bool ok = lit.rel == Rel::Eq  ? c.is_zero()
                  : lit.rel == Rel::Le ? c <= Rational(0)
                                       : c < Rational(0);
        if (!ok) return false;
    }
    return true;
}

}  // namespace

LinVerdict decide_linear_sequent(const std::vector<FormulaPtr>& hyps, const FormulaPtr& goal) {
    try {
        // valid iff hyps && !goal is infeasible
        Dnf branches = dnf(goal, false);
        for (const auto& h : hyps) branches = cross(branches, dnf(h, true));
        for (const auto& br : branches) {
            if (branch_feasible(br)) return LinVerdict::Invalid;
        }
        return LinVerdict::Valid;
    } catch (const NotLinear&) {
        return LinVerdict::Unsupported;
    } catch (const UnsupportedTerm&) {
        return LinVerdict::Unsupported;
    }
}

}  // namespace cdgl
