#include "core/prooft.hpp"

#include "core/analysis.hpp"

namespace cdgl {

const char* rule_name_str(RuleName r) {
    switch (r) {
        case RuleName::DiamondRefElim: return "dref";
        case RuleName::BoxRefElim: return "boxref";
        case RuleName::ArefTest: return "arefTest";
        case RuleName::DrefTest: return "drefTest";
        case RuleName::ArefRand: return "arefRand";
        case RuleName::DrefRand: return "drefRand";
        case RuleName::RefChoiceL1: return "choiceL1";
        case RuleName::RefChoiceL2: return "choiceL2";
        case RuleName::RefChoiceR: return "choiceR";
        case RuleName::ArefChoiceR1: return "achoiceR1";
        case RuleName::ArefChoiceR2: return "achoiceR2";
        case RuleName::ArefChoiceL: return "achoiceL";
        case RuleName::RefSeq: return "seqS";
        case RuleName::RefSeqG: return "seqG";
        case RuleName::RefUnloop: return "unloop";
        case RuleName::UnrollL: return "unrollL";
        case RuleName::DualSkip: return "dualSkip";
        case RuleName::DualSeq: return "dualSeq";
        case RuleName::DualAssign: return "dualAssign";
        case RuleName::DualDNE: return "dualDNE";
        case RuleName::RefTrans: return "trans";
        case RuleName::RefRefl: return "refl";
        case RuleName::SeqIdL: return "seqIdL";
        case RuleName::SeqIdR: return "seqIdR";
        case RuleName::AnnihL: return "annihL";
        case RuleName::NopAssign: return "nopAssign";
        case RuleName::SeqDistR: return "seqDistR";
        case RuleName::SeqAssoc: return "seqAssoc";
        case RuleName::AssignCancel: return "assignCancel";
        case RuleName::ChoiceAssoc: return "choiceAssoc";
        case RuleName::ChoiceComm: return "choiceComm";
        case RuleName::ChoiceIdem: return "choiceIdem";
        case RuleName::RefDC: return "dcRef";
        case RuleName::RefDW: return "dwRef";
        case RuleName::RefSolve: return "sol";
        case RuleName::RefDG: return "dgRef";
        case RuleName::LoopInline: return "loopInline";
        case RuleName::SysK: return "sysK";
        case RuleName::SysKd: return "sysKd";
        case RuleName::SysBoxAnd: return "sysBoxAnd";
    }
    return "?";
}

static std::shared_ptr<ProofTerm> mk(ProofTerm::Kind k) {
    auto p = std::make_shared<ProofTerm>();
    p->kind = k;
    return p;
}

ProofPtr p_hyp(std::string label) {
    auto p = mk(ProofTerm::Kind::Hyp);
    p->label = std::move(label);
    return p;
}

ProofPtr p_triv() { return mk(ProofTerm::Kind::Triv); }

static ProofPtr unary(ProofTerm::Kind k, ProofPtr m) {
    auto p = mk(k);
    p->sub = std::move(m);
    return p;
}

ProofPtr p_injl(ProofPtr m) { return unary(ProofTerm::Kind::InjL, std::move(m)); }
ProofPtr p_injr(ProofPtr m) { return unary(ProofTerm::Kind::InjR, std::move(m)); }
ProofPtr p_stop(ProofPtr m) { return unary(ProofTerm::Kind::Stop, std::move(m)); }
ProofPtr p_go(ProofPtr m) { return unary(ProofTerm::Kind::Go, std::move(m)); }
ProofPtr p_seqi(ProofPtr m) { return unary(ProofTerm::Kind::SeqIntro, std::move(m)); }
ProofPtr p_duali(ProofPtr m) { return unary(ProofTerm::Kind::DualIntro, std::move(m)); }
ProofPtr p_seqe(ProofPtr m) { return unary(ProofTerm::Kind::SeqElim, std::move(m)); }
ProofPtr p_duale(ProofPtr m) { return unary(ProofTerm::Kind::DualElim, std::move(m)); }
ProofPtr p_assigne(ProofPtr m) { return unary(ProofTerm::Kind::AssignElim, std::move(m)); }
ProofPtr p_projl(ProofPtr m) { return unary(ProofTerm::Kind::ProjL, std::move(m)); }
ProofPtr p_projr(ProofPtr m) { return unary(ProofTerm::Kind::ProjR, std::move(m)); }
ProofPtr p_dw(ProofPtr m) { return unary(ProofTerm::Kind::DW, std::move(m)); }

static ProofPtr case_like(ProofTerm::Kind k, ProofPtr scrut, std::string lb, ProofPtr l,
                          std::string rb, ProofPtr r) {
    auto p = mk(k);
    p->sub = std::move(scrut);
    p->binder = std::move(lb);
    p->sub2 = std::move(l);
    p->binder2 = std::move(rb);
    p->sub3 = std::move(r);
    return p;
}

ProofPtr p_case(ProofPtr scrut, std::string lb, ProofPtr l, std::string rb, ProofPtr r) {
    return case_like(ProofTerm::Kind::Case, std::move(scrut), std::move(lb), std::move(l),
                     std::move(rb), std::move(r));
}

ProofPtr p_repcase(ProofPtr scrut, std::string sb, ProofPtr s, std::string gb, ProofPtr g) {
    return case_like(ProofTerm::Kind::RepCase, std::move(scrut), std::move(sb), std::move(s),
                     std::move(gb), std::move(g));
}

ProofPtr p_fp(ProofPtr scrut, std::string sb, ProofPtr s, std::string gb, ProofPtr g) {
    return case_like(ProofTerm::Kind::FP, std::move(scrut), std::move(sb), std::move(s),
                     std::move(gb), std::move(g));
}

ProofPtr p_lam_real(VarId v, ProofPtr m) {
    auto p = mk(ProofTerm::Kind::LamReal);
    p->var = std::move(v);
    p->sub = std::move(m);
    return p;
}

ProofPtr p_lam(std::string binder, FormulaPtr hyp, ProofPtr m) {
    auto p = mk(ProofTerm::Kind::LamProof);
    p->binder = std::move(binder);
    p->formula = std::move(hyp);
    p->sub = std::move(m);
    return p;
}

ProofPtr p_pair(ProofPtr l, ProofPtr r) {
    auto p = mk(ProofTerm::Kind::Pair);
    p->sub = std::move(l);
    p->sub2 = std::move(r);
    return p;
}

ProofPtr p_assign(VarId ghost, VarId target, std::string binder, ProofPtr m) {
    auto p = mk(ProofTerm::Kind::AssignIntro);
    p->var = std::move(ghost);
    p->var2 = std::move(target);
    p->binder = std::move(binder);
    p->sub = std::move(m);
    return p;
}

ProofPtr p_dassign(TermPtr witness, VarId ghost, std::string binder, ProofPtr m) {
    auto p = mk(ProofTerm::Kind::DAssignIntro);
    p->term = std::move(witness);
    p->var = std::move(ghost);
    p->binder = std::move(binder);
    p->sub = std::move(m);
    return p;
}

ProofPtr p_rep(ProofPtr base, FormulaPtr inv, std::string stepBinder, ProofPtr step,
               std::string postBinder, ProofPtr post) {
    auto p = mk(ProofTerm::Kind::Rep);
    p->sub = std::move(base);
    p->formula = std::move(inv);
    p->binder = std::move(stepBinder);
    p->sub2 = std::move(step);
    p->binder2 = std::move(postBinder);
    p->sub3 = std::move(post);
    return p;
}

ProofPtr p_for(VarId m0, Rational eps, TermPtr metric, FormulaPtr variant, ProofPtr base,
               std::string pBinder, std::string qBinder, ProofPtr step, ProofPtr post) {
    auto p = mk(ProofTerm::Kind::For);
    p->var = std::move(m0);
    p->rat = std::move(eps);
    p->term = std::move(metric);
    p->formula = std::move(variant);
    p->sub = std::move(base);
    p->binder = std::move(pBinder);
    p->binder2 = std::move(qBinder);
    p->sub2 = std::move(step);
    p->sub3 = std::move(post);
    return p;
}

ProofPtr p_app(ProofPtr fn, ProofPtr arg) {
    auto p = mk(ProofTerm::Kind::App);
    p->sub = std::move(fn);
    p->sub2 = std::move(arg);
    return p;
}

ProofPtr p_appt(ProofPtr fn, TermPtr arg) {
    auto p = mk(ProofTerm::Kind::AppTerm);
    p->sub = std::move(fn);
    p->term = std::move(arg);
    return p;
}

ProofPtr p_unpack(ProofPtr packed, VarId fresh, std::string binder, ProofPtr m) {
    auto p = mk(ProofTerm::Kind::Unpack);
    p->sub = std::move(packed);
    p->var = std::move(fresh);
    p->binder = std::move(binder);
    p->sub2 = std::move(m);
    return p;
}

ProofPtr p_qe(FormulaPtr target, ProofPtr m) {
    auto p = mk(ProofTerm::Kind::QE);
    p->formula = std::move(target);
    p->sub = std::move(m);
    return p;
}

ProofPtr p_dec(FormulaPtr target, ProofPtr m) {
    auto p = mk(ProofTerm::Kind::Dec);
    p->formula = std::move(target);
    p->sub = std::move(m);
    return p;
}

ProofPtr p_split(TermPtr l, TermPtr r, ProofPtr m) {
    auto p = mk(ProofTerm::Kind::Split);
    p->term = std::move(l);
    p->term2 = std::move(r);
    p->sub = std::move(m);
    return p;
}

ProofPtr p_ghost(VarId v, TermPtr rhs, std::string binder, ProofPtr m) {
    auto p = mk(ProofTerm::Kind::Ghost);
    p->var = std::move(v);
    p->term = std::move(rhs);
    p->binder = std::move(binder);
    p->sub = std::move(m);
    return p;
}

ProofPtr p_mon(ProofPtr main, std::string binder, ProofPtr m) {
    auto p = mk(ProofTerm::Kind::Mon);
    p->sub = std::move(main);
    p->binder = std::move(binder);
    p->sub2 = std::move(m);
    return p;
}

ProofPtr p_mon_at(ProofPtr main, FormulaPtr mainFormula, std::string binder, ProofPtr m) {
    auto p = mk(ProofTerm::Kind::Mon);
    p->sub = std::move(main);
    p->formula = std::move(mainFormula);
    p->binder = std::move(binder);
    p->sub2 = std::move(m);
    return p;
}

ProofPtr p_di(ProofPtr base, ProofPtr step) {
    auto p = mk(ProofTerm::Kind::DI);
    p->sub = std::move(base);
    p->sub2 = std::move(step);
    return p;
}

ProofPtr p_dc(FormulaPtr cut, ProofPtr show, ProofPtr use) {
    auto p = mk(ProofTerm::Kind::DC);
    p->formula = std::move(cut);
    p->sub = std::move(show);
    p->sub2 = std::move(use);
    return p;
}

ProofPtr p_dg(VarId ghost, TermPtr y0, TermPtr a, TermPtr b, ProofPtr m) {
    auto p = mk(ProofTerm::Kind::DG);
    p->var = std::move(ghost);
    p->term = std::move(y0);
    p->term2 = std::move(a);
    p->term3 = std::move(b);
    p->sub = std::move(m);
    return p;
}

ProofPtr p_bsolve(std::vector<std::pair<VarId, TermPtr>> slns, ProofPtr m) {
    auto p = mk(ProofTerm::Kind::BSolve);
    p->solutions = std::move(slns);
    p->sub = std::move(m);
    return p;
}

ProofPtr p_dsolve(TermPtr duration, std::vector<std::pair<VarId, TermPtr>> slns, ProofPtr dom,
                  ProofPtr post) {
    auto p = mk(ProofTerm::Kind::DSolve);
    p->term = std::move(duration);
    p->solutions = std::move(slns);
    p->sub = std::move(dom);
    p->sub2 = std::move(post);
    return p;
}

ProofPtr p_boxref(std::optional<unsigned> rank, GamePtr alpha, ProofPtr main, DerivPtr d) {
    auto p = mk(ProofTerm::Kind::BoxRef);
    p->rank = rank;
    p->game = std::move(alpha);
    p->sub = std::move(main);
    p->deriv = std::move(d);
    return p;
}

ProofPtr p_dref(std::optional<unsigned> rank, GamePtr alpha, ProofPtr main, DerivPtr d) {
    auto p = mk(ProofTerm::Kind::DiamondRef);
    p->rank = rank;
    p->game = std::move(alpha);
    p->sub = std::move(main);
    p->deriv = std::move(d);
    return p;
}

ProofPtr p_byref(DerivPtr d) {
    auto p = mk(ProofTerm::Kind::RefProof);
    p->deriv = std::move(d);
    return p;
}

DerivPtr d_rule(RuleName r) {
    auto d = std::make_shared<Derivation>();
    d->rule = r;
    return d;
}

DerivPtr d_rule(RuleName r, std::vector<DerivPtr> subs, std::vector<ProofPtr> proofs) {
    auto d = std::make_shared<Derivation>();
    d->rule = r;
    d->subs = std::move(subs);
    d->proofs = std::move(proofs);
    return d;
}

DerivPtr d_with_goal(DerivPtr d, FormulaPtr goal) {
    auto c = std::make_shared<Derivation>(*d);
    c->goal = std::move(goal);
    return c;
}

DerivPtr d_trans(GamePtr middle, DerivPtr a, DerivPtr b) {
    auto d = std::make_shared<Derivation>();
    d->rule = RuleName::RefTrans;
    d->game = std::move(middle);
    d->subs = {std::move(a), std::move(b)};
    return d;
}

DerivPtr d_loop_inline(FormulaPtr inv, VarId m0, TermPtr eps, std::string invLabel,
                       std::string decLabel, ProofPtr base, ProofPtr step, DerivPtr bodyRef,
                       ProofPtr bodyTransfer) {
    auto d = std::make_shared<Derivation>();
    d->rule = RuleName::LoopInline;
    d->formula = std::move(inv);
    d->var = std::move(m0);
    d->term = std::move(eps);
    d->label = std::move(invLabel);
    d->label2 = std::move(decLabel);
    d->proofs = {std::move(base), std::move(step), std::move(bodyTransfer)};
    d->subs = {std::move(bodyRef)};
    return d;
}

DerivPtr d_boxref(std::optional<unsigned> rank, GamePtr alpha, ProofPtr main, DerivPtr sub) {
    auto d = std::make_shared<Derivation>();
    d->rule = RuleName::BoxRefElim;
    d->rank = rank;
    d->game = std::move(alpha);
    d->proofs = {std::move(main)};
    d->subs = {std::move(sub)};
    return d;
}

DerivPtr d_dref(std::optional<unsigned> rank, GamePtr alpha, ProofPtr main, DerivPtr sub) {
    auto d = std::make_shared<Derivation>();
    d->rule = RuleName::DiamondRefElim;
    d->rank = rank;
    d->game = std::move(alpha);
    d->proofs = {std::move(main)};
    d->subs = {std::move(sub)};
    return d;
}

// ---- renaming / variable collection ----

ProofPtr rename(const ProofPtr& p, const std::string& x, const std::string& y) {
    if (!p) return p;
    auto q = std::make_shared<ProofTerm>(*p);
    q->sub = rename(p->sub, x, y);
    q->sub2 = rename(p->sub2, x, y);
    q->sub3 = rename(p->sub3, x, y);
    if (p->formula) q->formula = rename(p->formula, x, y);
    if (p->term) q->term = rename(p->term, x, y);
    if (p->term2) q->term2 = rename(p->term2, x, y);
    if (p->term3) q->term3 = rename(p->term3, x, y);
    if (p->game) q->game = rename(p->game, x, y);
    q->var = rename_var(p->var, x, y);
    q->var2 = rename_var(p->var2, x, y);
    for (auto& [v, t] : q->solutions) {
        v = rename_var(v, x, y);
        t = rename(t, x, y);
    }
    q->deriv = rename(p->deriv, x, y);
    return q;
}

DerivPtr rename(const DerivPtr& d, const std::string& x, const std::string& y) {
    if (!d) return d;
    auto q = std::make_shared<Derivation>(*d);
    if (d->goal) q->goal = rename(*d->goal, x, y);
    if (d->game) q->game = rename(d->game, x, y);
    if (d->formula) q->formula = rename(d->formula, x, y);
    if (d->term) q->term = rename(d->term, x, y);
    q->var = rename_var(d->var, x, y);
    for (auto& s : q->subs) s = rename(s, x, y);
    for (auto& pr : q->proofs) pr = rename(pr, x, y);
    return q;
}

static void collect(const ProofPtr& p, VarSet& out);
static void collect(const DerivPtr& d, VarSet& out);

static void add(VarSet& out, const VarSet& s) { out.insert(s.begin(), s.end()); }

static void collect(const ProofPtr& p, VarSet& out) {
    if (!p) return;
    collect(p->sub, out);
    collect(p->sub2, out);
    collect(p->sub3, out);
    if (p->formula) add(out, vars_of(p->formula));
    if (p->term) add(out, vars_of(p->term));
    if (p->term2) add(out, vars_of(p->term2));
    if (p->term3) add(out, vars_of(p->term3));
    if (p->game) add(out, vars_of(p->game));
    if (!p->var.name.empty()) out.insert(p->var);
    if (!p->var2.name.empty()) out.insert(p->var2);
    for (const auto& [v, t] : p->solutions) {
        out.insert(v);
        add(out, vars_of(t));
    }
    collect(p->deriv, out);
}

static void collect(const DerivPtr& d, VarSet& out) {
    if (!d) return;
    if (d->goal) add(out, vars_of(*d->goal));
    if (d->game) add(out, vars_of(d->game));
    if (d->formula) add(out, vars_of(d->formula));
    if (d->term) add(out, vars_of(d->term));
    if (!d->var.name.empty()) out.insert(d->var);
    for (const auto& s : d->subs) collect(s, out);
    for (const auto& pr : d->proofs) collect(pr, out);
}

VarSet vars_of(const ProofPtr& p) {
    VarSet out;
    collect(p, out);
    return out;
}

VarSet vars_of(const DerivPtr& d) {
    VarSet out;
    collect(d, out);
    return out;
}

}  // namespace cdgl
