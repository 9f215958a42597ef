#pragma once

#include "core/ast.hpp"

namespace cdgl {

struct ProofTerm;
struct Derivation;
using ProofPtr = std::shared_ptr<const ProofTerm>;
using DerivPtr = std::shared_ptr<const Derivation>;

// Natural-deduction proof terms. One constructor per checking case of the
// calculus; eliminators synthesize their scrutinee's formula.
struct ProofTerm {
    enum class Kind {
        Hyp,          // hypothesis reference
        Triv,         // proof of verum
        InjL,         // <++>I1, against <a++b>phi
        InjR,         // <++>I2
        Stop,         // <*>S, against <a*>phi
        Go,           // <*>G
        Case,         // <++>E: case(A, l => B, r => C)
        RepCase,      // <*>C: repcase(A, s => B, g => C)
        FP,           // <*> fixed-point elimination
        LamReal,      // [:*]I: lam(x : R, M)
        LamProof,     // [?]I: lam(p : phi, M)
        Pair,         // <?>I, [++]I, [*]R by goal shape
        AssignIntro,  // [:=]I / <:=>I: asgn(ghost, target, p, M)
        DAssignIntro, // <:*>I: wit(f, ghost, p, M)
        SeqIntro,     // [;]I / <;>I
        DualIntro,    // [^d]I / <^d>I
        SeqElim,      // inverse of SeqIntro (synthesizing)
        DualElim,     // inverse of DualIntro (synthesizing)
        AssignElim,   // [x:=f]phi |- phi[f/x] (synthesizing)
        Rep,          // [*]I: rep(M, J, p => N, q => O)
        For,          // <*>I: for(m0, eps, metric, variant, base, p q => step, p q => post)
        App,          // [?]E: app(M, N)
        AppTerm,      // [:*]E: appt(M, f)
        ProjL,        // [++]E1, <?>E1, [*]E1
        ProjR,        // [++]E2, <?>E2, [*]E2
        Unpack,       // <:*>E: unpack(M, y, p => N)
        QE,           // FO oracle: qe(phi, M)
        Dec,          // decidable disjunction: dec(phi, M)
        Split,        // split(f, h, M) : f > g | f < h
        Ghost,        // discrete ghost: ghost(x, f, p => M)
        Mon,          // monotonicity: mon(M, p => N)
        DI,           // differential invariant
        DC,           // differential cut
        DW,           // differential weakening
        DG,           // differential ghost
        BSolve,       // demonic ODE solution
        DSolve,       // angelic ODE solution
        BoxRef,       // boxref[(i)](alpha, M, D)
        DiamondRef,   // dref[(i)](alpha, M, D)
        RefProof,     // byref(D): a refinement formula proved by a derivation
    };

    Kind kind;

    std::string label;               // Hyp; binders below
    ProofPtr sub, sub2, sub3;        // children, by case
    std::string binder, binder2;     // hypothesis labels introduced
    FormulaPtr formula;              // LamProof hyp, Rep invariant, QE/Dec target, DC cut, For variant
    TermPtr term, term2, term3;      // DAssignIntro witness, Split sides, Ghost rhs, For metric, DSolve duration, DG y0/a/b
    VarId var, var2;                 // LamReal var, AssignIntro ghost+target, For m0, Unpack fresh, DG ghost
    Rational rat;                    // For epsilon
    std::vector<std::pair<VarId, TermPtr>> solutions;  // BSolve/DSolve solution terms
    GamePtr game;                    // BoxRef/DiamondRef alpha
    std::optional<unsigned> rank;    // BoxRef/DiamondRef annotation
    DerivPtr deriv;                  // BoxRef/DiamondRef/RefProof
};

enum class RuleName {
    DiamondRefElim,  // R<.>
    BoxRefElim,      // R[.]
    ArefTest,
    DrefTest,
    ArefRand,
    DrefRand,
    RefChoiceL1,
    RefChoiceL2,
    RefChoiceR,
    ArefChoiceR1,
    ArefChoiceR2,
    ArefChoiceL,
    RefSeq,
    RefSeqG,
    RefUnloop,
    UnrollL,
    DualSkip,
    DualSeq,
    DualAssign,
    DualDNE,
    RefTrans,
    RefRefl,
    SeqIdL,
    SeqIdR,
    AnnihL,
    NopAssign,
    SeqDistR,
    SeqAssoc,
    AssignCancel,
    ChoiceAssoc,
    ChoiceComm,
    ChoiceIdem,
    RefDC,
    RefDW,
    RefSolve,
    RefDG,
    LoopInline,
    SysK,
    SysKd,
    SysBoxAnd,
};

const char* rule_name_str(RuleName r);

// One refinement-rule application. Goals are assigned top-down from the
// enclosing goal; a node may pin its own goal, which is then required to
// match. Premises are sub-derivations or kernel proofs per the rule schema.
struct Derivation {
    RuleName rule;
    std::optional<FormulaPtr> goal;

    GamePtr game;                  // refTrans middle, boxref alpha
    FormulaPtr formula;            // loopInline invariant J
    TermPtr term;                  // loopInline epsilon
    VarId var;                     // loopInline metric ghost m0
    std::string label, label2;     // loopInline premise hypothesis labels
    std::optional<unsigned> rank;  // boxref/dref annotation

    std::vector<DerivPtr> subs;
    std::vector<ProofPtr> proofs;
};

// ---- proof term constructors ----

ProofPtr p_hyp(std::string label);
ProofPtr p_triv();
ProofPtr p_injl(ProofPtr m);
ProofPtr p_injr(ProofPtr m);
ProofPtr p_stop(ProofPtr m);
ProofPtr p_go(ProofPtr m);
ProofPtr p_case(ProofPtr scrut, std::string lb, ProofPtr l, std::string rb, ProofPtr r);
ProofPtr p_repcase(ProofPtr scrut, std::string sb, ProofPtr s, std::string gb, ProofPtr g);
ProofPtr p_fp(ProofPtr scrut, std::string sb, ProofPtr s, std::string gb, ProofPtr g);
ProofPtr p_lam_real(VarId v, ProofPtr m);
ProofPtr p_lam(std::string binder, FormulaPtr hyp, ProofPtr m);
ProofPtr p_pair(ProofPtr l, ProofPtr r);
ProofPtr p_assign(VarId ghost, VarId target, std::string binder, ProofPtr m);
ProofPtr p_dassign(TermPtr witness, VarId ghost, std::string binder, ProofPtr m);
ProofPtr p_seqi(ProofPtr m);
ProofPtr p_duali(ProofPtr m);
ProofPtr p_seqe(ProofPtr m);
ProofPtr p_duale(ProofPtr m);
ProofPtr p_assigne(ProofPtr m);
ProofPtr p_rep(ProofPtr base, FormulaPtr inv, std::string stepBinder, ProofPtr step,
               std::string postBinder, ProofPtr post);
ProofPtr p_for(VarId m0, Rational eps, TermPtr metric, FormulaPtr variant, ProofPtr base,
               std::string pBinder, std::string qBinder, ProofPtr step, ProofPtr post);
ProofPtr p_app(ProofPtr fn, ProofPtr arg);
ProofPtr p_appt(ProofPtr fn, TermPtr arg);
ProofPtr p_projl(ProofPtr m);
ProofPtr p_projr(ProofPtr m);
ProofPtr p_unpack(ProofPtr packed, VarId fresh, std::string binder, ProofPtr m);
ProofPtr p_qe(FormulaPtr target, ProofPtr m);
ProofPtr p_dec(FormulaPtr target, ProofPtr m);
ProofPtr p_split(TermPtr l, TermPtr r, ProofPtr m);
ProofPtr p_ghost(VarId v, TermPtr rhs, std::string binder, ProofPtr m);
ProofPtr p_mon(ProofPtr main, std::string binder, ProofPtr m);
// annotated variant: main is checked against `mainFormula` instead of synthesized
ProofPtr p_mon_at(ProofPtr main, FormulaPtr mainFormula, std::string binder, ProofPtr m);
ProofPtr p_di(ProofPtr base, ProofPtr step);
ProofPtr p_dc(FormulaPtr cut, ProofPtr show, ProofPtr use);
ProofPtr p_dw(ProofPtr m);
ProofPtr p_dg(VarId ghost, TermPtr y0, TermPtr a, TermPtr b, ProofPtr m);
ProofPtr p_bsolve(std::vector<std::pair<VarId, TermPtr>> slns, ProofPtr m);
ProofPtr p_dsolve(TermPtr duration, std::vector<std::pair<VarId, TermPtr>> slns, ProofPtr dom,
                  ProofPtr post);
ProofPtr p_boxref(std::optional<unsigned> rank, GamePtr alpha, ProofPtr main, DerivPtr d);
ProofPtr p_dref(std::optional<unsigned> rank, GamePtr alpha, ProofPtr main, DerivPtr d);
ProofPtr p_byref(DerivPtr d);

// ---- derivation constructors ----

DerivPtr d_rule(RuleName r);
DerivPtr d_rule(RuleName r, std::vector<DerivPtr> subs, std::vector<ProofPtr> proofs = {});
DerivPtr d_with_goal(DerivPtr d, FormulaPtr goal);
DerivPtr d_trans(GamePtr middle, DerivPtr a, DerivPtr b);
DerivPtr d_loop_inline(FormulaPtr inv, VarId m0, TermPtr eps, std::string invLabel,
                       std::string decLabel, ProofPtr base, ProofPtr step, DerivPtr bodyRef,
                       ProofPtr bodyTransfer);
DerivPtr d_boxref(std::optional<unsigned> rank, GamePtr alpha, ProofPtr main, DerivPtr sub);
DerivPtr d_dref(std::optional<unsigned> rank, GamePtr alpha, ProofPtr main, DerivPtr sub);

// Renaming over proofs and derivations (transposition, as for formulas).
ProofPtr rename(const ProofPtr& p, const std::string& x, const std::string& y);
DerivPtr rename(const DerivPtr& d, const std::string& x, const std::string& y);

// Every game variable mentioned anywhere in the proof (for freshness).
VarSet vars_of(const ProofPtr& p);
VarSet vars_of(const DerivPtr& d);

}  // namespace cdgl
