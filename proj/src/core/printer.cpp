#include <sstream>

#include "core/surface.hpp"

namespace cdgl {

namespace {

// term precedence: 1 sum, 2 product, 3 unary, 4 atom
void print_term(std::ostream& os, const TermPtr& t, int need);

void paren_term(std::ostream& os, const TermPtr& t, int level, int need) {
    if (level < need) {
        os << "(";
        print_term(os, t, 1);
        os << ")";
    } else {
        print_term(os, t, level);
    }
}

void print_term(std::ostream& os, const TermPtr& t, int need) {
    switch (t->kind) {
        case Term::Kind::Rational: {
            int level = t->value.is_negative() ? 3 : 4;
            if (level < need) {
                os << "(" << t->value.to_string() << ")";
            } else {
                os << t->value.to_string();
            }
            return;
        }
        case Term::Kind::Variable:
            os << t->var.str();
            return;
        case Term::Kind::Sum: {
            if (1 < need) {
                os << "(";
                print_term(os, t, 1);
                os << ")";
                return;
            }
            print_term(os, t->lhs, 1);
            // re-sugar subtraction
            if (t->rhs->kind == Term::Kind::Rational && t->rhs->value.is_negative()) {
                os << " - " << (-t->rhs->value).to_string();
                return;
            }
            if (t->rhs->kind == Term::Kind::Product && t->rhs->lhs->kind == Term::Kind::Rational &&
                t->rhs->lhs->value == Rational(-1) &&
                t->rhs->rhs->kind != Term::Kind::Rational) {
                os << " - ";
                paren_term(os, t->rhs->rhs, 3, 3);
                return;
            }
            os << " + ";
            print_term(os, t->rhs, 2);
            return;
        }
        case Term::Kind::Product: {
            if (2 < need) {
                os << "(";
                print_term(os, t, 1);
                os << ")";
                return;
            }
            print_term(os, t->lhs, 2);
            os << "*";
            print_term(os, t->rhs, 3);
            return;
        }
        case Term::Kind::Differential:
            os << "(";
            print_term(os, t->inner, 1);
            os << ")'";
            return;
    }
}

// game precedence: 1 choice, 2 seq, 3 postfix, 4 atom
void print_game(std::ostream& os, const GamePtr& g, int need);
void print_formula(std::ostream& os, const FormulaPtr& f, int need);

// A game whose rightmost leaf is a bare test ends in an exposed formula; when
// such a game is printed as a refinement operand, the formula would swallow
// the operator and anything after it on reparse. Brace those operands.
bool ends_exposed(const GamePtr& g) {
    switch (g->kind) {
        case Game::Kind::Test:
            return true;
        case Game::Kind::Choice:
        case Game::Kind::Seq:
            return ends_exposed(g->right);
        default:
            return false;
    }
}

void print_ref_operand(std::ostream& os, const GamePtr& g) {
    if (ends_exposed(g)) {
        os << "{";
        print_game(os, g, 1);
        os << "}";
    } else {
        print_game(os, g, 1);
    }
}

void print_postfix_child(std::ostream& os, const GamePtr& g) {
    // tests and assignments end in a term or '*'; brace them under postfix
    if (g->kind == Game::Kind::Ode || g->kind == Game::Kind::Repeat ||
        g->kind == Game::Kind::Dual) {
        print_game(os, g, 3);
    } else {
        os << "{";
        print_game(os, g, 1);
        os << "}";
    }
}

void print_game(std::ostream& os, const GamePtr& g, int need) {
    switch (g->kind) {
        case Game::Kind::Choice: {
            if (1 < need) {
                os << "{";
                print_game(os, g, 1);
                os << "}";
                return;
            }
            print_game(os, g->left, 2);
            os << " ++ ";
            print_game(os, g->right, 1);
            return;
        }
        case Game::Kind::Seq: {
            if (2 < need) {
                os << "{";
                print_game(os, g, 1);
                os << "}";
                return;
            }
            print_game(os, g->left, 3);
            os << "; ";
            print_game(os, g->right, 2);
            return;
        }
        case Game::Kind::Repeat:
            print_postfix_child(os, g->body);
            os << "*";
            return;
        case Game::Kind::Dual:
            print_postfix_child(os, g->body);
            os << "^d";
            return;
        case Game::Kind::Test:
            os << "?";
            print_formula(os, g->cond, 1);
            return;
        case Game::Kind::Assign:
            os << g->var.str() << " := ";
            print_term(os, g->rhs, 1);
            return;
        case Game::Kind::NondetAssign:
            os << g->var.str() << " := *";
            return;
        case Game::Kind::Ode: {
            os << "{";
            bool first = true;
            for (const auto& eq : g->equations) {
                if (!first) os << ", ";
                first = false;
                os << eq.var.str() << "' = ";
                print_term(os, eq.rhs, 1);
            }
            if (!is_verum(g->cond)) {
                os << " & ";
                print_formula(os, g->cond, 1);
            }
            os << "}";
            return;
        }
    }
}

// formula precedence: 1 full, 2 imp, 3 or, 4 and, 5 unary, 6 atom
void print_formula(std::ostream& os, const FormulaPtr& f, int need) {
    auto wrap = [&](int level, auto body) {
        if (level < need) {
            os << "(";
            body();
            os << ")";
        } else {
            body();
        }
    };
    if (is_verum(f)) {
        os << "true";
        return;
    }
    if (is_falsum(f)) {
        os << "false";
        return;
    }
    FormulaPtr a, b;
    if (match_not(f, a)) {
        wrap(5, [&] {
            os << "!";
            print_formula(os, a, 5);
        });
        return;
    }
    // mutual refinement sugar
    {
        FormulaPtr l, r;
        if (match_and(f, l, r) && l->kind == Formula::Kind::Refine &&
            r->kind == Formula::Kind::Refine && l->rank == r->rank &&
            game_eq(l->rleft, r->rright) && game_eq(l->rright, r->rleft)) {
            wrap(6, [&] {
                print_ref_operand(os, l->rleft);
                os << " ~~";
                if (l->rank) os << "[" << *l->rank << "]";
                os << " ";
                print_ref_operand(os, l->rright);
            });
            return;
        }
    }
    if (match_imp(f, a, b)) {
        wrap(2, [&] {
            print_formula(os, a, 3);
            os << " -> ";
            print_formula(os, b, 2);
        });
        return;
    }
    if (match_or(f, a, b)) {
        wrap(3, [&] {
            print_formula(os, a, 3);
            os << " | ";
            print_formula(os, b, 4);
        });
        return;
    }
    if (match_and(f, a, b)) {
        wrap(4, [&] {
            print_formula(os, a, 4);
            os << " & ";
            print_formula(os, b, 5);
        });
        return;
    }
    VarId v;
    if (match_forall(f, v, a)) {
        wrap(5, [&] {
            os << "forall " << v.str() << " ";
            print_formula(os, a, 5);
        });
        return;
    }
    if (match_exists(f, v, a)) {
        wrap(5, [&] {
            os << "exists " << v.str() << " ";
            print_formula(os, a, 5);
        });
        return;
    }
    switch (f->kind) {
        case Formula::Kind::Compare:
            wrap(6, [&] {
                print_term(os, f->lhs, 1);
                os << " " << compare_op_str(f->op) << " ";
                print_term(os, f->rhs, 1);
            });
            return;
        case Formula::Kind::Box:
            wrap(5, [&] {
                os << "[";
                print_game(os, f->game, 1);
                os << "] ";
                print_formula(os, f->post, 5);
            });
            return;
        case Formula::Kind::Diamond:
            wrap(5, [&] {
                os << "<";
                // an exposed trailing comparison would chain across the '>'
                print_ref_operand(os, f->game);
                os << "> ";
                print_formula(os, f->post, 5);
            });
            return;
        case Formula::Kind::Refine:
            wrap(6, [&] {
                // angelic sugar when both sides are duals
                if (f->rleft->kind == Game::Kind::Dual && f->rright->kind == Game::Kind::Dual) {
                    print_ref_operand(os, f->rleft->body);
                    os << " =<<";
                    if (f->rank) os << "[" << *f->rank << "]";
                    os << " ";
                    print_ref_operand(os, f->rright->body);
                } else {
                    print_ref_operand(os, f->rleft);
                    os << " =<";
                    if (f->rank) os << "[" << *f->rank << "]";
                    os << " ";
                    print_ref_operand(os, f->rright);
                }
            });
            return;
    }
}

void print_proof(std::ostream& os, const ProofPtr& p);
void print_deriv(std::ostream& os, const DerivPtr& d);

void print_solutions(std::ostream& os, const std::vector<std::pair<VarId, TermPtr>>& slns) {
    os << "[";
    bool first = true;
    for (const auto& [v, t] : slns) {
        if (!first) os << ", ";
        first = false;
        os << v.str() << " = ";
        print_term(os, t, 1);
    }
    os << "]";
}

void print_proof(std::ostream& os, const ProofPtr& p) {
    using K = ProofTerm::Kind;
    auto un = [&](const char* name, const ProofPtr& m) {
        os << name << "(";
        print_proof(os, m);
        os << ")";
    };
    switch (p->kind) {
        case K::Hyp: os << p->label; return;
        case K::Triv: os << "triv"; return;
        case K::InjL: un("injL", p->sub); return;
        case K::InjR: un("injR", p->sub); return;
        case K::Stop: un("stop", p->sub); return;
        case K::Go: un("go", p->sub); return;
        case K::SeqIntro: un("seq", p->sub); return;
        case K::DualIntro: un("dual", p->sub); return;
        case K::SeqElim: un("seqE", p->sub); return;
        case K::DualElim: un("dualE", p->sub); return;
        case K::AssignElim: un("asgnE", p->sub); return;
        case K::ProjL: un("projL", p->sub); return;
        case K::ProjR: un("projR", p->sub); return;
        case K::DW: un("dw", p->sub); return;
        case K::Case:
        case K::RepCase:
        case K::FP:
            os << (p->kind == K::Case ? "case" : p->kind == K::RepCase ? "repcase" : "fp") << "(";
            print_proof(os, p->sub);
            os << ", " << p->binder << " => ";
            print_proof(os, p->sub2);
            os << ", " << p->binder2 << " => ";
            print_proof(os, p->sub3);
            os << ")";
            return;
        case K::LamReal:
            os << "lam(" << p->var.str() << " : R, ";
            print_proof(os, p->sub);
            os << ")";
            return;
        case K::LamProof:
            os << "lam(" << p->binder << " : ";
            if (p->formula)
                print_formula(os, p->formula, 1);
            else
                os << "_";
            os << ", ";
            print_proof(os, p->sub);
            os << ")";
            return;
        case K::Pair:
            os << "(";
            print_proof(os, p->sub);
            os << ", ";
            print_proof(os, p->sub2);
            os << ")";
            return;
        case K::AssignIntro:
            os << "asgn(" << p->var.str() << ", " << p->var2.str() << ", " << p->binder << ", ";
            print_proof(os, p->sub);
            os << ")";
            return;
        case K::DAssignIntro:
            os << "wit(";
            print_term(os, p->term, 1);
            os << ", " << p->var.str() << ", " << p->binder << ", ";
            print_proof(os, p->sub);
            os << ")";
            return;
        case K::Rep:
            os << "rep(";
            print_proof(os, p->sub);
            os << ", ";
            print_formula(os, p->formula, 1);
            os << ", " << p->binder << " => ";
            print_proof(os, p->sub2);
            os << ", " << p->binder2 << " => ";
            print_proof(os, p->sub3);
            os << ")";
            return;
        case K::For:
            os << "for(" << p->var.str() << ", " << p->rat.to_string() << ", ";
            print_term(os, p->term, 1);
            os << ", ";
            print_formula(os, p->formula, 1);
            os << ", ";
            print_proof(os, p->sub);
            os << ", (" << p->binder << ", " << p->binder2 << ") => ";
            print_proof(os, p->sub2);
            os << ", ";
            print_proof(os, p->sub3);
            os << ")";
            return;
        case K::App:
            os << "app(";
            print_proof(os, p->sub);
            os << ", ";
            print_proof(os, p->sub2);
            os << ")";
            return;
        case K::AppTerm:
            os << "appt(";
            print_proof(os, p->sub);
            os << ", ";
            print_term(os, p->term, 1);
            os << ")";
            return;
        case K::Unpack:
            os << "unpack(";
            print_proof(os, p->sub);
            os << ", " << p->var.str() << ", " << p->binder << " => ";
            print_proof(os, p->sub2);
            os << ")";
            return;
        case K::QE:
        case K::Dec:
            os << (p->kind == K::QE ? "qe" : "dec") << "(";
            print_formula(os, p->formula, 1);
            os << ", ";
            print_proof(os, p->sub);
            os << ")";
            return;
        case K::Split:
            os << "split(";
            print_term(os, p->term, 1);
            os << ", ";
            print_term(os, p->term2, 1);
            os << ", ";
            print_proof(os, p->sub);
            os << ")";
            return;
        case K::Ghost:
            os << "ghost(" << p->var.str() << ", ";
            print_term(os, p->term, 1);
            os << ", " << p->binder << " => ";
            print_proof(os, p->sub);
            os << ")";
            return;
        case K::Mon:
            os << "mon(";
            print_proof(os, p->sub);
            os << ", ";
            if (p->formula) {
                print_formula(os, p->formula, 1);
                os << ", ";
            }
            os << p->binder << " => ";
            print_proof(os, p->sub2);
            os << ")";
            return;
        case K::DI:
            os << "di(";
            print_proof(os, p->sub);
            os << ", ";
            print_proof(os, p->sub2);
            os << ")";
            return;
        case K::DC:
            os << "dc(";
            print_formula(os, p->formula, 1);
            os << ", ";
            print_proof(os, p->sub);
            os << ", ";
            print_proof(os, p->sub2);
            os << ")";
            return;
        case K::DG:
            os << "dg(" << p->var.str() << ", ";
            print_term(os, p->term, 1);
            os << ", ";
            print_term(os, p->term2, 1);
            os << ", ";
            print_term(os, p->term3, 1);
            os << ", ";
            print_proof(os, p->sub);
            os << ")";
            return;
        case K::BSolve:
            os << "bsolve(";
            print_solutions(os, p->solutions);
            os << ", ";
            print_proof(os, p->sub);
            os << ")";
            return;
        case K::DSolve:
            os << "dsolve(";
            print_term(os, p->term, 1);
            os << ", ";
            print_solutions(os, p->solutions);
            os << ", ";
            print_proof(os, p->sub);
            os << ", ";
            print_proof(os, p->sub2);
            os << ")";
            return;
        case K::BoxRef:
        case K::DiamondRef:
            os << (p->kind == K::BoxRef ? "boxref" : "dref");
            if (p->rank) os << "[" << *p->rank << "]";
            os << "(";
            print_game(os, p->game, 1);
            os << ", ";
            print_proof(os, p->sub);
            os << ", ";
            print_deriv(os, p->deriv);
            os << ")";
            return;
        case K::RefProof:
            os << "byref(";
            print_deriv(os, p->deriv);
            os << ")";
            return;
    }
}

void print_deriv(std::ostream& os, const DerivPtr& d) {
    os << rule_name_str(d->rule);
    switch (d->rule) {
        case RuleName::ArefTest:
        case RuleName::DrefTest:
        case RuleName::RefUnloop:
        case RuleName::RefDC:
            os << "(";
            print_proof(os, d->proofs[0]);
            os << ")";
            return;
        case RuleName::RefSolve:
            os << "(";
            print_proof(os, d->proofs[0]);
            os << ", ";
            print_proof(os, d->proofs[1]);
            os << ", ";
            print_proof(os, d->proofs[2]);
            os << ")";
            return;
        case RuleName::RefChoiceR:
        case RuleName::ArefChoiceL:
        case RuleName::RefSeqG:
            os << "(";
            print_deriv(os, d->subs[0]);
            os << ", ";
            print_deriv(os, d->subs[1]);
            os << ")";
            return;
        case RuleName::RefTrans:
            os << "(";
            print_game(os, d->game, 1);
            os << ", ";
            print_deriv(os, d->subs[0]);
            os << ", ";
            print_deriv(os, d->subs[1]);
            os << ")";
            return;
        case RuleName::RefSeq:
            os << "(";
            print_deriv(os, d->subs[0]);
            os << ", ";
            print_proof(os, d->proofs[0]);
            os << ")";
            return;
        case RuleName::LoopInline:
            os << "(";
            print_formula(os, d->formula, 1);
            os << ", " << d->var.str() << ", ";
            print_term(os, d->term, 1);
            os << ", " << (d->label.empty() ? "_inv" : d->label) << ", "
               << (d->label2.empty() ? "_dec" : d->label2) << ", ";
            print_proof(os, d->proofs[0]);
            os << ", ";
            print_proof(os, d->proofs[1]);
            os << ", ";
            print_deriv(os, d->subs[0]);
            os << ", ";
            print_proof(os, d->proofs[2]);
            os << ")";
            return;
        case RuleName::BoxRefElim:
        case RuleName::DiamondRefElim:
            if (d->rank) os << "[" << *d->rank << "]";
            os << "(";
            print_game(os, d->game, 1);
            os << ", ";
            print_proof(os, d->proofs[0]);
            os << ", ";
            print_deriv(os, d->subs[0]);
            os << ")";
            return;
        default:
            return;  // nullary rules
    }
}

}  // namespace

std::string pretty(const TermPtr& t) {
    std::ostringstream os;
    print_term(os, t, 1);
    return os.str();
}

std::string pretty(const GamePtr& g) {
    std::ostringstream os;
    print_game(os, g, 1);
    return os.str();
}

std::string pretty(const FormulaPtr& f) {
    std::ostringstream os;
    print_formula(os, f, 1);
    return os.str();
}

std::string pretty(const ProofPtr& p) {
    std::ostringstream os;
    print_proof(os, p);
    return os.str();
}

std::string pretty(const DerivPtr& d) {
    std::ostringstream os;
    print_deriv(os, d);
    return os.str();
}

std::string pretty(const Context& ctx) {
    std::ostringstream os;
    bool first = true;
    for (const auto& a : ctx.items) {
        if (!first) os << ", ";
        first = false;
        os << a.label << ": ";
        print_formula(os, a.formula, 1);
    }
    return os.str();
}

std::string pretty_sequent(const Context& ctx, const FormulaPtr& goal) {
    std::string s = pretty(ctx);
    if (!s.empty()) s += " ";
    return s + "|- " + pretty(goal);
}

std::string pretty(const SourceFile& file) {
    std::ostringstream os;
    bool first = true;
    for (const auto& d : file.decls) {
        if (!first) os << "\n";
        first = false;
        switch (d.kind) {
            case SourceFile::Decl::Kind::Game:
                os << "game " << d.name << " := " << pretty(d.game) << "\n";
                break;
            case SourceFile::Decl::Kind::Formula:
                os << "formula " << d.name << " := " << pretty(d.formula) << "\n";
                break;
            case SourceFile::Decl::Kind::Proof:
                os << "proof " << d.name << " : " << pretty_sequent(d.proof.ctx, d.proof.goal)
                   << " :=\n  " << pretty(d.proof.proof) << "\n";
                break;
            case SourceFile::Decl::Kind::Derivation:
                os << "derivation " << d.name << " : " << pretty_sequent(d.deriv.ctx, d.deriv.goal)
                   << " :=\n  " << pretty(d.deriv.deriv) << "\n";
                break;
        }
    }
    return os.str();
}

}  // namespace cdgl
