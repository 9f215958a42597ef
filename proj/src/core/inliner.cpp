#include "core/inliner.hpp"

#include <algorithm>
#include <functional>

#include "core/analysis.hpp"
#include "core/poly.hpp"
#include "core/refine.hpp"
#include "core/surface.hpp"

namespace cdgl {

// ---- system-test fragment ----

static bool system_test_game(const GamePtr& g);

bool is_system_test(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Compare:
            return true;
        case Formula::Kind::Box:
            return is_system(f->game) && system_test_game(f->game) && is_system_test(f->post);
        case Formula::Kind::Diamond: {
            // conjunction and disjunction read as connectives, not modalities
            FormulaPtr a, b;
            if (match_and(f, a, b)) return is_system_test(a) && is_system_test(b);
            if (match_or(f, a, b)) return is_system_test(a) && is_system_test(b);
            return false;
        }
        case Formula::Kind::Refine:
            return is_system(f->rleft) && is_system(f->rright);
    }
    return false;
}

static bool system_test_game(const GamePtr& g) {
    switch (g->kind) {
        case Game::Kind::Test:
            return is_system_test(g->cond);
        case Game::Kind::Assign:
        case Game::Kind::NondetAssign:
            return true;
        case Game::Kind::Ode:
            return is_system_test(g->cond);
        case Game::Kind::Choice:
        case Game::Kind::Seq:
            return system_test_game(g->left) && system_test_game(g->right);
        case Game::Kind::Repeat:
        case Game::Kind::Dual:
            return system_test_game(g->body);
    }
    return false;
}

bool is_system_test(const Context& ctx) {
    for (const auto& a : ctx.items)
        if (!is_system_test(a.formula)) return false;
    return true;
}

// the relaxed exemption: a case scrutinee of shape <?p ++ ?q> rho
static bool is_decidable_scrutinee(const FormulaPtr& f) {
    if (f->kind != Formula::Kind::Diamond || f->game->kind != Game::Kind::Choice) return false;
    const GamePtr& l = f->game->left;
    const GamePtr& r = f->game->right;
    return l->kind == Game::Kind::Test && r->kind == Game::Kind::Test &&
           is_first_order(l->cond) && is_first_order(r->cond) && is_first_order(f->post);
}

bool is_system_test(const ProofPtr& p) {
    if (!p) return true;
    if (p->formula && !is_system_test(p->formula)) return false;
    return is_system_test(p->sub) && is_system_test(p->sub2) && is_system_test(p->sub3);
}

GamePtr fold_games(const std::vector<GamePtr>& list) {
    if (list.empty()) return nullptr;
    GamePtr g = list.back();
    for (size_t i = list.size() - 1; i-- > 0;) g = mk_seq(list[i], g);
    return g;
}

// ---- reassociation certificates ----

namespace {

void seq_leaves(const GamePtr& g, std::vector<GamePtr>& out) {
    if (g->kind == Game::Kind::Seq) {
        seq_leaves(g->left, out);
        seq_leaves(g->right, out);
    } else {
        out.push_back(g);
    }
}

GamePtr right_assoc(const GamePtr& g) {
    std::vector<GamePtr> leaves;
    seq_leaves(g, leaves);
    return fold_games(leaves);
}

// g =< right_assoc(g) by seqAssoc rotations under refSeqG congruence
DerivPtr to_right_cert(const GamePtr& g) {
    if (g->kind != Game::Kind::Seq) return d_rule(RuleName::RefRefl);
    if (g->left->kind == Game::Kind::Seq) {
        GamePtr rotated = mk_seq(g->left->left, mk_seq(g->left->right, g->right));
        return d_trans(rotated, d_rule(RuleName::SeqAssoc), to_right_cert(rotated));
    }
    if (game_eq(g->right, right_assoc(g->right))) return d_rule(RuleName::RefRefl);
    return d_rule(RuleName::RefSeqG, {d_rule(RuleName::RefRefl), to_right_cert(g->right)});
}

// right_assoc(g) =< g
DerivPtr from_right_cert(const GamePtr& g) {
    if (g->kind != Game::Kind::Seq) return d_rule(RuleName::RefRefl);
    if (g->left->kind == Game::Kind::Seq) {
        GamePtr rotated = mk_seq(g->left->left, mk_seq(g->left->right, g->right));
        return d_trans(rotated, from_right_cert(rotated), d_rule(RuleName::SeqAssoc));
    }
    if (game_eq(g->right, right_assoc(g->right))) return d_rule(RuleName::RefRefl);
    return d_rule(RuleName::RefSeqG, {d_rule(RuleName::RefRefl), from_right_cert(g->right)});
}

}  // namespace

DerivPtr reassociation_cert(const GamePtr& from, const GamePtr& to) {
    if (game_eq(from, to)) return d_rule(RuleName::RefRefl);
    std::vector<GamePtr> lf, lt;
    seq_leaves(from, lf);
    seq_leaves(to, lt);
    if (lf.size() != lt.size()) return nullptr;
    for (size_t i = 0; i < lf.size(); ++i)
        if (!game_eq(lf[i], lt[i])) return nullptr;
    GamePtr mid = right_assoc(from);
    if (game_eq(from, mid)) return from_right_cert(to);
    if (game_eq(to, mid)) return to_right_cert(from);
    return d_trans(mid, to_right_cert(from), from_right_cert(to));
}

// ---- the walk ----

namespace {

[[noreturn]] void nnf(const std::string& what) { throw NotNormalForm(what); }
[[noreturn]] void nst(const std::string& what) { throw NotSystemTest(what); }

struct Piece {
    GamePtr game;       // null: this fragment inlines to nothing
    ProofPtr transfer;  // [game]post, or post itself when game is null
    DerivPtr cert;      // (game or skip) =< source; null only at the true terminal
};

void collect_labels(const ProofPtr& p, std::set<std::string>& out) {
    if (!p) return;
    if (!p->label.empty()) out.insert(p->label);
    if (!p->binder.empty()) out.insert(p->binder);
    if (!p->binder2.empty()) out.insert(p->binder2);
    collect_labels(p->sub, out);
    collect_labels(p->sub2, out);
    collect_labels(p->sub3, out);
    if (p->deriv)
        for (const auto& pr : p->deriv->proofs) collect_labels(pr, out);
}

GamePtr or_skip(const GamePtr& g) { return g ? g : mk_skip(); }

using IntroFn = std::function<ProofPtr(ProofPtr)>;

// Proof of [g1; g2; ...; gn] X from atom introductions for each gi and a
// proof of X; sequences associate to the right.
ProofPtr chain_intros(const std::vector<IntroFn>& atoms, ProofPtr final) {
    ProofPtr f = atoms.back()(std::move(final));
    for (size_t i = atoms.size() - 1; i-- > 0;) f = p_seqi(atoms[i](f));
    return f;
}

// da : l =< l' and db : r =< r' lift to l ++ r =< l' ++ r'; the transitivity
// middles are the branches of the left-hand choice
DerivPtr choice_congruence(const GamePtr& lhsL, DerivPtr da, const GamePtr& lhsR, DerivPtr db) {
    return d_rule(RuleName::RefChoiceR,
                  {d_trans(lhsL, d_rule(RuleName::RefChoiceL1), std::move(da)),
                   d_trans(lhsR, d_rule(RuleName::RefChoiceL2), std::move(db))});
}

GamePtr with_duals(const std::vector<GamePtr>& pending, const std::vector<GamePtr>& list) {
    std::vector<GamePtr> all;
    all.reserve(pending.size() + list.size());
    for (const auto& g : pending) all.push_back(mk_dual(g));
    all.insert(all.end(), list.begin(), list.end());
    return fold_games(all);
}

FormulaPtr goal_formula(const std::vector<GamePtr>& pending, const std::vector<GamePtr>& list,
                        const FormulaPtr& post) {
    FormulaPtr f = post;
    for (size_t i = list.size(); i-- > 0;) f = mk_box(list[i], f);
    for (size_t i = pending.size(); i-- > 0;) f = mk_diamond(pending[i], f);
    return f;
}

struct HeadEmit {
    GamePtr emitted;   // the system fragment emitted for the consumed head
    IntroFn intro;     // proof of X -> proof of [emitted] X
    DerivPtr headCert; // emitted =< sourceHead
    GamePtr sourceHead;
};

class Walker {
public:
    Walker(const Context& ctx, const ProofPtr& p, const FormulaPtr& goal) {
        for (const auto& a : ctx.items) labels_.insert(a.label);
        collect_labels(p, labels_);
        VarSet vs = vars_of(ctx);
        VarSet pv = vars_of(p);
        VarSet gv = vars_of(goal);
        for (const auto& v : vs) varNames_.insert(v.name);
        for (const auto& v : pv) varNames_.insert(v.name);
        for (const auto& v : gv) varNames_.insert(v.name);
    }

    Piece walkD(const Context& ctx, std::vector<GamePtr> list, const FormulaPtr& post,
                const ProofPtr& p);

private:
    Engine engine_;
    std::set<std::string> labels_;
    std::set<std::string> varNames_;
    unsigned lblCounter_ = 0;
    unsigned varCounter_ = 0;

    // globally fresh synthesized hypothesis label
    std::string synth_lbl(const std::string& stem) {
        for (;;) {
            std::string cand = stem + "_" + std::to_string(lblCounter_++);
            if (!labels_.count(cand)) {
                labels_.insert(cand);
                return cand;
            }
        }
    }
    // globally fresh synthesized variable name
    std::string synth_var(const std::string& stem) {
        for (;;) {
            std::string cand = stem + "_" + std::to_string(varCounter_++);
            if (!varNames_.count(cand)) {
                varNames_.insert(cand);
                return cand;
            }
        }
    }

    Piece walkA(const Context& ctx, std::vector<GamePtr> pending, std::vector<GamePtr> list,
                const FormulaPtr& post, const ProofPtr& p);
    Piece cont(const Context& ctx, std::vector<GamePtr> pending, std::vector<GamePtr> list,
               const FormulaPtr& post, const ProofPtr& p);
    Piece handle_case(const Context& ctx, const GamePtr& src, const ProofPtr& p,
                      const std::function<Piece(const Context&, const ProofPtr&)>& recurse);
    Piece walk_ode_demonic(const Context& ctx, const GamePtr& head, std::vector<GamePtr> rest,
                           const FormulaPtr& post, const ProofPtr& p);
    Piece walk_ode_angelic(const Context& ctx, const GamePtr& ode, std::vector<GamePtr> pending,
                           std::vector<GamePtr> list, const FormulaPtr& post, const ProofPtr& p);
    Piece compose(const HeadEmit& h, const Piece& tail, const GamePtr& tailSource);
    Piece vanish(const Context& ctx, DerivPtr skipCert, const Piece& tail,
                 const GamePtr& tailSource, const ProofPtr& nearby);
    std::pair<Context, ProofPtr> spine_to(Context ctx, ProofPtr p, FormulaPtr f,
                                          const FormulaPtr& target);

    std::string fresh_lbl(const Context& ctx, const ProofPtr& nearby, const std::string& stem) {
        (void)ctx;
        (void)nearby;
        return synth_lbl(stem);
    }

    FormulaPtr synth(const Context& ctx, const ProofPtr& p) {
        try {
            return engine_.synth(ctx, p, "shape");
        } catch (const RejectError& e) {
            nnf("scrutinee is not synthesizable: " + e.reason);
        }
    }
};

std::pair<Context, ProofPtr> Walker::spine_to(Context ctx, ProofPtr p, FormulaPtr f,
                                              const FormulaPtr& target) {
    using K = ProofTerm::Kind;
    for (;;) {
        if (formula_eq(f, target)) return {std::move(ctx), std::move(p)};
        if (f->kind != Formula::Kind::Box) nnf("unexpected spine formula " + pretty(f));
        const GamePtr& g = f->game;
        if (g->kind == Game::Kind::NondetAssign && p->kind == K::LamReal) {
            if (!(p->var == g->var)) nnf("spine lambda binds the wrong variable");
            VarSet used = vars_of(ctx);
            VarSet gv = vars_of(f);
            used.insert(gv.begin(), gv.end());
            VarSet pv = vars_of(p->sub);
            used.insert(pv.begin(), pv.end());
            VarId ghost{fresh_name(p->var.name, used), p->var.primed};
            ctx = rename_one(ctx, p->var, ghost);
            f = f->post;
            p = p->sub;
            continue;
        }
        if (g->kind == Game::Kind::Test && p->kind == K::LamProof) {
            ctx = ctx.extended(p->binder, g->cond);
            f = f->post;
            p = p->sub;
            continue;
        }
        if (g->kind == Game::Kind::Assign && p->kind == K::AssignIntro) {
            VarId ghost{p->var.name, g->var.primed};
            ctx = rename_one(ctx, g->var, ghost);
            ctx = ctx.extended(p->binder, mk_compare(CompareOp::Eq, mk_var(g->var),
                                                     rename_one(g->rhs, g->var, ghost)));
            f = f->post;
            p = p->sub;
            continue;
        }
        nnf("solve continuation must be a chain of introductions, found " + pretty(p));
    }
}

// rebuild the same intro spine around a fresh continuation (annotations
// dropped so the kernel re-derives them from the goal)
ProofPtr rebuild_spine(const ProofPtr& p, const FormulaPtr& f, const FormulaPtr& target,
                       const ProofPtr& k) {
    if (formula_eq(f, target)) return k;
    using K = ProofTerm::Kind;
    if (p->kind == K::LamReal)
        return p_lam_real(p->var, rebuild_spine(p->sub, f->post, target, k));
    if (p->kind == K::LamProof)
        return p_lam(p->binder, nullptr, rebuild_spine(p->sub, f->post, target, k));
    if (p->kind == K::AssignIntro)
        return p_assign(p->var, p->var2, p->binder, rebuild_spine(p->sub, f->post, target, k));
    nnf("internal: spine rebuild mismatch");
}

Piece Walker::compose(const HeadEmit& h, const Piece& tail, const GamePtr& tailSource) {
    Piece out;
    if (!tailSource) {
        if (tail.game) nnf("internal: inlined tail without a source tail");
        out.game = h.emitted;
        out.transfer = h.intro(tail.transfer);
        out.cert = h.headCert;
        return out;
    }
    if (tail.game) {
        out.game = mk_seq(h.emitted, tail.game);
        out.transfer = p_seqi(h.intro(tail.transfer));
        out.cert = d_rule(RuleName::RefSeq, {h.headCert}, {h.intro(p_byref(tail.cert))});
    } else {
        out.game = h.emitted;
        out.transfer = h.intro(tail.transfer);
        DerivPtr step = d_rule(RuleName::RefSeq, {h.headCert}, {h.intro(p_byref(tail.cert))});
        out.cert = d_trans(mk_seq(h.emitted, mk_skip()), d_rule(RuleName::SeqIdR), step);
    }
    return out;
}

Piece Walker::vanish(const Context& ctx, DerivPtr skipCert, const Piece& tail,
                     const GamePtr& tailSource, const ProofPtr& nearby) {
    Piece out;
    out.game = tail.game;
    out.transfer = tail.transfer;
    if (!tailSource) {
        out.cert = std::move(skipCert);
        return out;
    }
    GamePtr xg = or_skip(tail.game);
    std::string lbl = fresh_lbl(ctx, nearby, "_tt");
    DerivPtr step =
        d_rule(RuleName::RefSeq, {std::move(skipCert)}, {p_lam(lbl, nullptr, p_byref(tail.cert))});
    out.cert = d_trans(mk_seq(mk_skip(), xg), d_rule(RuleName::SeqIdL), step);
    return out;
}

Piece Walker::cont(const Context& ctx, std::vector<GamePtr> pending, std::vector<GamePtr> list,
                   const FormulaPtr& post, const ProofPtr& p) {
    if (pending.empty()) return walkD(ctx, std::move(list), post, p);
    return walkA(ctx, std::move(pending), std::move(list), post, p);
}

Piece Walker::handle_case(const Context& ctx, const GamePtr& src, const ProofPtr& p,
                          const std::function<Piece(const Context&, const ProofPtr&)>& recurse) {
    FormulaPtr scrut = synth(ctx, p->sub);
    if (!is_decidable_scrutinee(scrut))
        nst("case scrutinee must be a first-order <?p ++ ?q> rho choice");
    if (!src) nnf("case analysis after the terminal program");
    // the guards become runtime tests; a scrutinee over a variable the
    // strategy already overwrote would test a value that no longer exists
    for (const auto& v : free_vars(scrut))
        if (!varNames_.count(v.name))
            nnf("case scrutinee depends on the overwritten variable " + v.str());
    FormulaPtr rho = scrut->post;
    FormulaPtr gp = mk_and(scrut->game->left->cond, rho);  // elaborated branch guards
    FormulaPtr gq = mk_and(scrut->game->right->cond, rho);
    Context ctxL = ctx.extended(p->binder, mk_diamond(scrut->game->left, rho));
    Context ctxR = ctx.extended(p->binder2, mk_diamond(scrut->game->right, rho));
    Piece pb = recurse(ctxL, p->sub2);
    Piece pc = recurse(ctxR, p->sub3);

    GamePtr gB = pb.game ? mk_seq(mk_test(gp), pb.game) : mk_test(gp);
    GamePtr gC = pc.game ? mk_seq(mk_test(gq), pc.game) : mk_test(gq);
    Piece out;
    out.game = mk_choice(gB, gC);
    ProofPtr tb =
        pb.game ? p_seqi(p_lam(p->binder, gp, pb.transfer)) : p_lam(p->binder, gp, pb.transfer);
    ProofPtr tc =
        pc.game ? p_seqi(p_lam(p->binder2, gq, pc.transfer)) : p_lam(p->binder2, gq, pc.transfer);
    out.transfer = p_pair(tb, tc);

    //   {?gp; B} ++ {?gq; C}
    //   =< {?gp; src} ++ {?gq; src}     branchwise refSeq on the guards
    //   =< {?gp ++ ?gq}; src            seqDistR
    //   =< skip; src                    drefTest with gp | gq from the scrutinee
    //   =< src                          seqIdL
    if (!pb.cert || !pc.cert) nnf("internal: case branches lack certificates");
    DerivPtr bB = d_rule(RuleName::RefSeq, {d_rule(RuleName::RefRefl)},
                         {p_lam(p->binder, gp, p_byref(pb.cert))});
    DerivPtr bC = d_rule(RuleName::RefSeq, {d_rule(RuleName::RefRefl)},
                         {p_lam(p->binder2, gq, p_byref(pc.cert))});
    if (!pb.game) bB = d_trans(mk_seq(mk_test(gp), mk_skip()), d_rule(RuleName::SeqIdR), bB);
    if (!pc.game) bC = d_trans(mk_seq(mk_test(gq), mk_skip()), d_rule(RuleName::SeqIdR), bC);
    GamePtr guardedSrcB = mk_seq(mk_test(gp), src);
    GamePtr guardedSrcC = mk_seq(mk_test(gq), src);
    DerivPtr d1 = choice_congruence(gB, bB, gC, bC);
    GamePtr tGame = mk_choice(guardedSrcB, guardedSrcC);
    GamePtr uGame = mk_seq(mk_choice(mk_test(gp), mk_test(gq)), src);
    std::string h = fresh_lbl(ctx, p, "_h");
    ProofPtr orProof = p_case(p->sub, p->binder, p_injl(p_pair(p_hyp(p->binder), p_triv())),
                              p->binder2, p_injr(p_pair(p_hyp(p->binder2), p_triv())));
    ProofPtr impProof = p_lam(h, mk_verum(), orProof);
    DerivPtr d3 = d_rule(RuleName::RefSeqG,
                         {d_rule(RuleName::DrefTest, {}, {impProof}), d_rule(RuleName::RefRefl)});
    out.cert =
        d_trans(tGame, d1,
                d_trans(uGame, d_rule(RuleName::SeqDistR),
                        d_trans(mk_seq(mk_skip(), src), d3, d_rule(RuleName::SeqIdL))));
    return out;
}

Piece Walker::walkD(const Context& ctx, std::vector<GamePtr> list, const FormulaPtr& post,
                    const ProofPtr& p) {
    using K = ProofTerm::Kind;
    if (list.empty()) return Piece{nullptr, p, nullptr};
    GamePtr head = list.front();
    std::vector<GamePtr> rest(list.begin() + 1, list.end());
    GamePtr restSrc = fold_games(rest);
    GamePtr src = fold_games(list);

    if (p->kind == K::Case)
        return handle_case(ctx, src, p, [&](const Context& c, const ProofPtr& sub) {
            return walkD(c, list, post, sub);
        });
    if (p->kind == K::Hyp) {
        for (const auto& g : list)
            if (!is_system(g)) nst("hypothesis strategy plays a game with duals");
        Piece out;
        out.game = src;
        std::function<ProofPtr(const std::vector<GamePtr>&, ProofPtr, const Context&)> conv =
            [&](const std::vector<GamePtr>& gs, ProofPtr base, const Context& c) -> ProofPtr {
            if (gs.size() <= 1) return base;
            if (gs.size() == 2) return p_seqi(base);
            std::string hl = fresh_lbl(c, base, "_h");
            std::vector<GamePtr> tailGs(gs.begin() + 1, gs.end());
            Context inner;
            inner.items.push_back({hl, mk_verum()});
            return p_seqi(p_mon(base, hl, conv(tailGs, p_hyp(hl), inner)));
        };
        out.transfer = conv(list, p, ctx);
        out.cert = d_rule(RuleName::RefRefl);
        return out;
    }

    switch (head->kind) {
        case Game::Kind::Seq: {
            if (p->kind != K::SeqIntro) nnf("expected a sequence introduction at " + pretty(head));
            std::vector<GamePtr> expanded{head->left, head->right};
            expanded.insert(expanded.end(), rest.begin(), rest.end());
            Piece sub = walkD(ctx, expanded, post, p->sub);
            GamePtr subSrc = fold_games(expanded);
            if (game_eq(subSrc, src) || !sub.cert) return sub;
            DerivPtr bridge = reassociation_cert(subSrc, src);
            if (!bridge) nnf("internal: sequence reassociation failed");
            Piece out = sub;
            out.cert = d_trans(subSrc, sub.cert, bridge);
            return out;
        }
        case Game::Kind::Test: {
            if (p->kind != K::LamProof) nnf("expected a test introduction at " + pretty(head));
            if (p->formula && !formula_eq(p->formula, head->cond)) nnf("test annotation mismatch");
            Context ctx2 = ctx.extended(p->binder, head->cond);
            Piece tail = walkD(ctx2, rest, post, p->sub);
            FormulaPtr cond = head->cond;
            std::string binder = p->binder;
            HeadEmit h{head, [cond, binder](ProofPtr pr) { return p_lam(binder, cond, pr); },
                       d_rule(RuleName::RefRefl), head};
            return compose(h, tail, restSrc);
        }
        case Game::Kind::Assign: {
            if (p->kind != K::AssignIntro || !(p->var2 == head->var))
                nnf("expected an assignment introduction at " + pretty(head));
            VarId ghost{p->var.name, head->var.primed};
            Context ctx2 =
                rename_one(ctx, head->var, ghost)
                    .extended(p->binder, mk_compare(CompareOp::Eq, mk_var(head->var),
                                                    rename_one(head->rhs, head->var, ghost)));
            Piece tail = walkD(ctx2, rest, post, p->sub);
            VarId gv = p->var, tv = head->var;
            std::string binder = p->binder;
            HeadEmit h{head, [gv, tv, binder](ProofPtr pr) { return p_assign(gv, tv, binder, pr); },
                       d_rule(RuleName::RefRefl), head};
            return compose(h, tail, restSrc);
        }
        case Game::Kind::NondetAssign: {
            if (p->kind != K::LamReal || !(p->var == head->var))
                nnf("expected a havoc introduction at " + pretty(head));
            VarSet used = vars_of(ctx);
            VarSet gv2 = vars_of(goal_formula({}, list, post));
            used.insert(gv2.begin(), gv2.end());
            VarSet pv = vars_of(p->sub);
            used.insert(pv.begin(), pv.end());
            VarId ghost{fresh_name(head->var.name, used), head->var.primed};
            Context ctx2 = rename_one(ctx, head->var, ghost);
            Piece tail = walkD(ctx2, rest, post, p->sub);
            VarId hv = head->var;
            HeadEmit h{head, [hv](ProofPtr pr) { return p_lam_real(hv, pr); },
                       d_rule(RuleName::RefRefl), head};
            return compose(h, tail, restSrc);
        }
        case Game::Kind::Choice: {
            if (p->kind != K::Pair) nnf("expected a pair at demonic choice " + pretty(head));
            std::vector<GamePtr> ls{head->left};
            ls.insert(ls.end(), rest.begin(), rest.end());
            std::vector<GamePtr> rs{head->right};
            rs.insert(rs.end(), rest.begin(), rest.end());
            Piece pl = walkD(ctx, ls, post, p->sub);
            Piece pr = walkD(ctx, rs, post, p->sub2);
            Piece out;
            GamePtr gl = or_skip(pl.game), gr = or_skip(pr.game);
            out.game = mk_choice(gl, gr);
            ProofPtr tl = pl.game ? pl.transfer
                                  : p_lam(fresh_lbl(ctx, pl.transfer, "_tt"), nullptr, pl.transfer);
            ProofPtr tr2 = pr.game
                               ? pr.transfer
                               : p_lam(fresh_lbl(ctx, pr.transfer, "_tt"), nullptr, pr.transfer);
            out.transfer = p_pair(tl, tr2);
            if (!pl.cert || !pr.cert) nnf("internal: missing branch certificates");
            DerivPtr cong = choice_congruence(gl, pl.cert, gr, pr.cert);
            if (!restSrc) {
                out.cert = cong;
                return out;
            }
            GamePtr mid = mk_choice(fold_games(ls), fold_games(rs));
            out.cert = d_trans(mid, cong, d_rule(RuleName::SeqDistR));
            return out;
        }
        case Game::Kind::Repeat: {
            if (p->kind != K::Rep) nnf("expected an invariant proof at " + pretty(head));
            if (!is_system_test(p->formula)) nst("loop invariant is not system-test");
            Context bodyCtx;
            bodyCtx.items.push_back({p->binder, p->formula});
            Piece body = walkD(bodyCtx, {head->body}, p->formula, p->sub2);
            Context postCtx;
            postCtx.items.push_back({p->binder2, p->formula});
            Piece tail = walkD(postCtx, rest, post, p->sub3);
            GamePtr bodyG = or_skip(body.game);
            ProofPtr bodyT = body.game ? body.transfer
                                       : p_lam(fresh_lbl(bodyCtx, body.transfer, "_tt"), nullptr,
                                               body.transfer);
            GamePtr loopG = mk_repeat(bodyG);
            ProofPtr unloopPrem =
                p_rep(p->sub, p->formula, p->binder, bodyT, p->binder, p_byref(body.cert));
            DerivPtr headCert = d_rule(RuleName::RefUnloop, {}, {unloopPrem});
            ProofPtr base = p->sub;
            FormulaPtr inv = p->formula;
            std::string b1 = p->binder, b2 = p->binder2;
            HeadEmit h{loopG,
                       [base, inv, b1, b2, bodyT](ProofPtr pr) {
                           return p_rep(base, inv, b1, bodyT, b2, pr);
                       },
                       headCert, head};
            return compose(h, tail, restSrc);
        }
        case Game::Kind::Ode:
            return walk_ode_demonic(ctx, head, rest, post, p);
        case Game::Kind::Dual: {
            if (p->kind != K::DualIntro) nnf("expected a dual introduction at " + pretty(head));
            return walkA(ctx, {head->body}, rest, post, p->sub);
        }
    }
    nnf("unhandled demonic head");
}

Piece Walker::walk_ode_demonic(const Context& ctx, const GamePtr& head, std::vector<GamePtr> rest,
                               const FormulaPtr& post, const ProofPtr& p) {
    using K = ProofTerm::Kind;
    GamePtr restSrc = fold_games(rest);
    FormulaPtr innerF = goal_formula({}, rest, post);
    switch (p->kind) {
        case K::BSolve: {
            FormulaPtr goalF = mk_box(head, innerF);
            VarId timeVar = solve_time_var(ctx, goalF, p->solutions);
            VarSet used = vars_of(ctx);
            VarSet gv = vars_of(goalF);
            used.insert(gv.begin(), gv.end());
            used.insert(timeVar);
            for (const auto& [v, t] : p->solutions) {
                VarSet sv = vars_of(t);
                used.insert(sv.begin(), sv.end());
            }
            VarId boundVar = base_var(fresh_name("r", used));
            FormulaPtr prem = bsolve_premiss(head, p->solutions, timeVar, boundVar, innerF);
            auto [ctxK, k] = spine_to(ctx, p->sub, prem, innerF);
            Piece tail = walkD(ctxK, rest, post, k);
            auto slns = p->solutions;
            ProofPtr spineSrc = p->sub;
            FormulaPtr premHere = prem;
            HeadEmit h{head,
                       [slns, spineSrc, premHere, innerF](ProofPtr pr) {
                           return p_bsolve(slns, rebuild_spine(spineSrc, premHere, innerF, pr));
                       },
                       d_rule(RuleName::RefRefl), head};
            return compose(h, tail, restSrc);
        }
        case K::DC: {
            if (!is_system_test(p->formula)) nst("differential cut is not system-test");
            GamePtr strong = mk_ode(head->equations, mk_and(head->cond, p->formula));
            std::vector<GamePtr> sl{strong};
            sl.insert(sl.end(), rest.begin(), rest.end());
            Piece sub = walkD(ctx, sl, post, p->sub2);
            DerivPtr dcNode = d_rule(RuleName::RefDC, {}, {p->sub});
            Piece out = sub;
            if (!restSrc) {
                out.cert = d_trans(strong, sub.cert, dcNode);
                return out;
            }
            // [strong](restSrc =< restSrc) by differential weakening
            ProofPtr dwWrap = p_lam(fresh_lbl(ctx, p, "_dm"), nullptr,
                                    p_byref(d_rule(RuleName::RefRefl)));
            for (size_t i = strong->equations.size(); i-- > 0;)
                dwWrap = p_lam_real(primed_var(strong->equations[i].var.name), dwWrap);
            for (size_t i = strong->equations.size(); i-- > 0;)
                dwWrap = p_lam_real(strong->equations[i].var, dwWrap);
            DerivPtr step = d_rule(RuleName::RefSeq, {dcNode}, {p_dw(dwWrap)});
            out.cert = d_trans(fold_games(sl), sub.cert, step);
            return out;
        }
        case K::DW: {
            FormulaPtr premDw = mk_imp(head->cond, innerF);
            for (size_t i = head->equations.size(); i-- > 0;)
                premDw = mk_forall(primed_var(head->equations[i].var.name), premDw);
            for (size_t i = head->equations.size(); i-- > 0;)
                premDw = mk_forall(head->equations[i].var, premDw);
            auto [ctxK, k] = spine_to(ctx, p->sub, premDw, innerF);
            Piece tail = walkD(ctxK, rest, post, k);
            std::vector<GamePtr> parts;
            for (const auto& eq : head->equations) parts.push_back(mk_nondet(eq.var));
            for (const auto& eq : head->equations)
                parts.push_back(mk_assign(primed_var(eq.var.name), eq.rhs));
            parts.push_back(mk_test(head->cond));
            GamePtr block = fold_games(parts);
            // the test binder from the source spine keeps the context aligned
            std::string testBinder;
            {
                ProofPtr cur = p->sub;
                for (size_t i = 0; i < 2 * head->equations.size(); ++i) {
                    if (!cur || cur->kind != K::LamReal) nnf("weakening spine shape");
                    cur = cur->sub;
                }
                if (!cur || cur->kind != K::LamProof) nnf("weakening spine shape");
                testBinder = cur->binder;
            }
            std::vector<IntroFn> atoms;
            for (const auto& eq : head->equations) {
                VarId v = eq.var;
                atoms.push_back([v](ProofPtr pr) { return p_lam_real(v, pr); });
            }
            for (const auto& eq : head->equations) {
                VarId gv = base_var(synth_var(eq.var.name));
                std::string b = synth_lbl("_pb");
                VarId tv = primed_var(eq.var.name);
                atoms.push_back(
                    [gv, tv, b](ProofPtr pr) { return p_assign(gv, tv, b, pr); });
            }
            FormulaPtr cond = head->cond;
            std::string tb = testBinder;
            atoms.push_back([tb, cond](ProofPtr pr) { return p_lam(tb, cond, pr); });
            HeadEmit h{block, [atoms](ProofPtr pr) { return chain_intros(atoms, std::move(pr)); },
                       d_rule(RuleName::RefDW), head};
            return compose(h, tail, restSrc);
        }
        case K::DG:
            // the ghost case pairs the ODE with a dualled havoc whose proof
            // type and displayed inlining disagree; rejected here, the ghost
            // rule itself stays available to the kernel and refine checkers
            nnf("differential ghosts are not supported by the strategy compiler");
        case K::DI:
            nnf("differential invariants appear under a differential cut in normal shape");
        default:
            nnf("unsupported proof at a demonic ODE: " + pretty(p));
    }
}

Piece Walker::walkA(const Context& ctx, std::vector<GamePtr> pending, std::vector<GamePtr> list,
                    const FormulaPtr& post, const ProofPtr& p) {
    using K = ProofTerm::Kind;
    GamePtr g = pending.front();
    std::vector<GamePtr> restP(pending.begin() + 1, pending.end());
    GamePtr src = with_duals(pending, list);
    GamePtr restSrc = with_duals(restP, list);

    if (p->kind == K::Case)
        return handle_case(ctx, src, p, [&](const Context& c, const ProofPtr& sub) {
            return walkA(c, pending, list, post, sub);
        });

    switch (g->kind) {
        case Game::Kind::Test: {
            if (p->kind != K::Pair) nnf("expected a pair at angelic test " + pretty(g));
            Piece tail = cont(ctx, restP, list, post, p->sub2);
            std::string hl = fresh_lbl(ctx, p, "_tt");
            ProofPtr impP = p_lam(hl, mk_verum(), p->sub);
            DerivPtr skipCert = d_trans(mk_dual(mk_skip()), d_rule(RuleName::DualSkip),
                                        d_rule(RuleName::ArefTest, {}, {impP}));
            return vanish(ctx, skipCert, tail, restSrc, p);
        }
        case Game::Kind::Assign: {
            if (p->kind != K::AssignIntro || !(p->var2 == g->var))
                nnf("expected an assignment introduction at " + pretty(g));
            VarId ghost{p->var.name, g->var.primed};
            Context ctx2 =
                rename_one(ctx, g->var, ghost)
                    .extended(p->binder, mk_compare(CompareOp::Eq, mk_var(g->var),
                                                    rename_one(g->rhs, g->var, ghost)));
            Piece tail = cont(ctx2, restP, list, post, p->sub);
            VarId gv = p->var, tv = g->var;
            std::string binder = p->binder;
            HeadEmit h{g, [gv, tv, binder](ProofPtr pr) { return p_assign(gv, tv, binder, pr); },
                       d_rule(RuleName::DualAssign), mk_dual(g)};
            return compose(h, tail, restSrc);
        }
        case Game::Kind::NondetAssign: {
            if (p->kind != K::DAssignIntro) nnf("expected a witness at " + pretty(g));
            VarId ghost{p->var.name, g->var.primed};
            Context ctx2 =
                rename_one(ctx, g->var, ghost)
                    .extended(p->binder, mk_compare(CompareOp::Eq, mk_var(g->var),
                                                    rename_one(p->term, g->var, ghost)));
            Piece tail = cont(ctx2, restP, list, post, p->sub);
            GamePtr det = mk_assign(g->var, p->term);
            DerivPtr headCert =
                d_trans(mk_dual(det), d_rule(RuleName::DualAssign), d_rule(RuleName::ArefRand));
            VarId gv = p->var, tv = g->var;
            std::string binder = p->binder;
            HeadEmit h{det, [gv, tv, binder](ProofPtr pr) { return p_assign(gv, tv, binder, pr); },
                       headCert, mk_dual(g)};
            return compose(h, tail, restSrc);
        }
        case Game::Kind::Seq: {
            if (p->kind != K::SeqIntro)
                nnf("expected a sequence introduction at angelic " + pretty(g));
            std::vector<GamePtr> expanded{g->left, g->right};
            expanded.insert(expanded.end(), restP.begin(), restP.end());
            Piece sub = walkA(ctx, expanded, list, post, p->sub);
            GamePtr subSrc = with_duals(expanded, list);
            Piece out = sub;
            GamePtr dualPair = mk_seq(mk_dual(g->left), mk_dual(g->right));
            if (!restSrc) {
                out.cert = d_trans(dualPair, sub.cert, d_rule(RuleName::DualSeq));
                return out;
            }
            GamePtr grouped = mk_seq(dualPair, restSrc);
            DerivPtr c1 = reassociation_cert(subSrc, grouped);
            DerivPtr c2 =
                d_rule(RuleName::RefSeqG, {d_rule(RuleName::DualSeq), d_rule(RuleName::RefRefl)});
            out.cert = d_trans(subSrc, sub.cert, d_trans(grouped, c1, c2));
            return out;
        }
        case Game::Kind::Choice: {
            if (p->kind != K::InjL && p->kind != K::InjR)
                nnf("expected an injection at angelic choice " + pretty(g));
            bool left = p->kind == K::InjL;
            GamePtr branch = left ? g->left : g->right;
            std::vector<GamePtr> expanded{branch};
            expanded.insert(expanded.end(), restP.begin(), restP.end());
            Piece sub = walkA(ctx, expanded, list, post, p->sub);
            GamePtr subSrc = with_duals(expanded, list);
            DerivPtr inj = d_rule(left ? RuleName::ArefChoiceR1 : RuleName::ArefChoiceR2);
            Piece out = sub;
            if (!restSrc) {
                out.cert = d_trans(mk_dual(branch), sub.cert, inj);
                return out;
            }
            DerivPtr c2 = d_rule(RuleName::RefSeqG, {inj, d_rule(RuleName::RefRefl)});
            out.cert = d_trans(subSrc, sub.cert, c2);
            return out;
        }
        case Game::Kind::Repeat: {
            if (p->kind == K::Stop) {
                Piece tail = cont(ctx, restP, list, post, p->sub);
                DerivPtr skipCert =
                    d_trans(mk_dual(mk_skip()), d_rule(RuleName::DualSkip),
                            d_trans(mk_dual(mk_choice(mk_skip(), mk_seq(g->body, g))),
                                    d_rule(RuleName::ArefChoiceR1), d_rule(RuleName::UnrollL)));
                return vanish(ctx, skipCert, tail, restSrc, p);
            }
            if (p->kind == K::Go) {
                std::vector<GamePtr> expanded{g->body, g};
                expanded.insert(expanded.end(), restP.begin(), restP.end());
                Piece sub = walkA(ctx, expanded, list, post, p->sub);
                GamePtr subSrc = with_duals(expanded, list);
                GamePtr dualPair = mk_seq(mk_dual(g->body), mk_dual(g));
                DerivPtr unroll =
                    d_trans(mk_dual(mk_seq(g->body, g)), d_rule(RuleName::DualSeq),
                            d_trans(mk_dual(mk_choice(mk_skip(), mk_seq(g->body, g))),
                                    d_rule(RuleName::ArefChoiceR2), d_rule(RuleName::UnrollL)));
                Piece out = sub;
                if (!restSrc) {
                    out.cert = d_trans(dualPair, sub.cert, unroll);
                    return out;
                }
                GamePtr grouped = mk_seq(dualPair, restSrc);
                DerivPtr c1 = reassociation_cert(subSrc, grouped);
                DerivPtr c2 = d_rule(RuleName::RefSeqG, {unroll, d_rule(RuleName::RefRefl)});
                out.cert = d_trans(subSrc, sub.cert, d_trans(grouped, c1, c2));
                return out;
            }
            if (p->kind == K::For) {
                if (!is_system_test(p->formula)) nst("loop variant is not system-test");
                FormulaPtr variant = p->formula;
                TermPtr metric = p->term;
                TermPtr epsT = mk_rat(p->rat);
                TermPtr m0 = mk_var(p->var);
                FormulaPtr guard = mk_compare(CompareOp::Gt, metric, mk_int(0));
                FormulaPtr exitF = mk_compare(CompareOp::Eq, metric, mk_int(0));
                FormulaPtr dec = mk_and(mk_compare(CompareOp::Eq, m0, metric), guard);
                FormulaPtr stepPost =
                    mk_and(variant, mk_compare(CompareOp::Ge, m0, mk_sum(metric, epsT)));
                Context stepCtx;
                stepCtx.items.push_back({p->binder, variant});
                stepCtx.items.push_back({p->binder2, dec});
                Piece body = walkA(stepCtx, {g->body}, {}, stepPost, p->sub2);
                Context postCtx;
                postCtx.items.push_back({p->binder, variant});
                postCtx.items.push_back({p->binder2, exitF});
                Piece tail = cont(postCtx, restP, list, post, p->sub3);
                GamePtr bodyG = or_skip(body.game);
                ProofPtr bodyT = body.game
                                     ? body.transfer
                                     : p_lam(fresh_lbl(stepCtx, body.transfer, "_tt"), nullptr,
                                             body.transfer);
                GamePtr loopG = mk_repeat(mk_seq(mk_test(guard), bodyG));
                GamePtr block = mk_seq(loopG, mk_test(exitF));
                std::string q1 = fresh_lbl(stepCtx, p, "_g");
                std::string gl = fresh_lbl(stepCtx, p, "_m");
                std::string hl = fresh_lbl(stepCtx, p, "_w");
                ProofPtr mono =
                    p_mon_at(bodyT, mk_box(bodyG, stepPost), hl, p_projl(p_hyp(hl)));
                ProofPtr cut =
                    p_app(p_lam(p->binder2, dec, mono), p_pair(p_hyp(gl), p_hyp(q1)));
                ProofPtr stepProof =
                    p_seqi(p_lam(q1, nullptr, p_ghost(p->var, metric, gl, cut)));
                DerivPtr liNode = d_loop_inline(variant, p->var, epsT, p->binder, p->binder2,
                                                p->sub, p->sub2, body.cert, bodyT);
                ProofPtr base = p->sub;
                std::string b1 = p->binder, b2 = p->binder2;
                HeadEmit h{block,
                           [base, variant, b1, b2, exitF, stepProof](ProofPtr pr) {
                               return p_seqi(p_rep(base, variant, b1, stepProof, b1,
                                                   p_lam(b2, exitF, pr)));
                           },
                           liNode, mk_dual(g)};
                return compose(h, tail, restSrc);
            }
            nnf("expected stop, go or a convergence proof at angelic " + pretty(g));
        }
        case Game::Kind::Ode:
            return walk_ode_angelic(ctx, g, restP, list, post, p);
        case Game::Kind::Dual:
            nnf("nested duals inside angelic positions are not in normal shape");
    }
    nnf("unhandled angelic head");
}

Piece Walker::walk_ode_angelic(const Context& ctx, const GamePtr& ode,
                               std::vector<GamePtr> pending, std::vector<GamePtr> list,
                               const FormulaPtr& post, const ProofPtr& p) {
    using K = ProofTerm::Kind;
    if (p->kind != K::DSolve) nnf("angelic ODEs are proved by dsolve in normal shape");
    if (ode->equations.empty() ||
        !(Poly::from_term(ode->equations.front().rhs) == Poly::constant(Rational(1))))
        nnf("angelic solve needs a leading clock equation t' = 1");
    VarId clockV = ode->equations.front().var;
    FormulaPtr innerF = goal_formula(pending, list, post);
    FormulaPtr goalF = mk_diamond(ode, innerF);
    VarId tau = solve_time_var(ctx, goalF, p->solutions);
    for (const auto& [v, t] : p->solutions) {
        if (v == clockV) continue;
        if (free_vars(t).count(clockV))
            nnf("angelic solve with clock-dependent solution terms is unsupported");
    }
    if (free_vars(ode->cond).count(clockV))
        nnf("angelic solve with a clock-dependent domain constraint is unsupported");
    if (p->solutions.empty() || !(p->solutions.front().first == clockV))
        nnf("list the clock solution first in dsolve");
    std::vector<size_t> order = solution_assign_order(p->solutions);
    if (order.empty()) nnf("cyclic solution terms");
    VarSet used = vars_of(ctx);
    VarSet gv = vars_of(goalF);
    used.insert(gv.begin(), gv.end());
    used.insert(tau);
    for (const auto& [v, t] : p->solutions) {
        VarSet sv = vars_of(t);
        used.insert(sv.begin(), sv.end());
    }
    VarId r0 = base_var(fresh_name("r", used));
    TermPtr r0v = mk_var(r0);
    FormulaPtr domAt = ode->cond;
    for (size_t kk = order.size(); kk-- > 0;) {
        const auto& [v, sln] = p->solutions[order[kk]];
        domAt = mk_box(mk_assign(v, substitute(sln, tau, r0v)), domAt);
    }
    FormulaPtr srcDomAll =
        mk_forall(r0, mk_imp(mk_and(mk_compare(CompareOp::Le, mk_int(0), r0v),
                                    mk_compare(CompareOp::Le, r0v, p->term)),
                             domAt));
    FormulaPtr postChain = innerF;
    for (size_t kk = ode->equations.size(); kk-- > 0;) {
        const auto& eq = ode->equations[kk];
        postChain = mk_box(mk_assign(primed_var(eq.var.name), eq.rhs), postChain);
    }
    for (size_t kk = order.size(); kk-- > 0;) {
        const auto& [v, sln] = p->solutions[order[kk]];
        postChain = mk_box(mk_assign(v, substitute(sln, tau, p->term)), postChain);
    }
    auto [ctxK, k] = spine_to(ctx, p->sub2, postChain, innerF);
    Piece tail = cont(ctxK, pending, list, post, k);

    // emitted block: t := d; x := sln(t); x' := f; t' := 1
    std::vector<GamePtr> parts{mk_assign(clockV, p->term)};
    std::map<VarId, TermPtr> outSln;
    for (const auto& [v, sln] : p->solutions)
        outSln[v] = substitute(sln, tau, mk_var(clockV));
    for (size_t i = 1; i < ode->equations.size(); ++i)
        parts.push_back(mk_assign(ode->equations[i].var, outSln[ode->equations[i].var]));
    for (size_t i = 1; i < ode->equations.size(); ++i)
        parts.push_back(mk_assign(primed_var(ode->equations[i].var.name), ode->equations[i].rhs));
    parts.push_back(mk_assign(primed_var(clockV.name), mk_int(1)));
    GamePtr block = fold_games(parts);

    ProofPtr t0Proof, dProof;
    {
        FormulaPtr t0 = mk_compare(CompareOp::Eq, mk_var(clockV), mk_int(0));
        FormulaPtr dge = mk_compare(CompareOp::Ge, p->term, mk_int(0));
        auto fo_fact = [&](const FormulaPtr& want) -> ProofPtr {
            for (const auto& a : ctx.items)
                if (formula_eq(a.formula, want)) return p_hyp(a.label);
            ProofPtr acc;
            for (const auto& a : ctx.items) {
                if (!is_first_order(a.formula)) continue;
                acc = acc ? p_pair(acc, p_hyp(a.label)) : p_hyp(a.label);
            }
            return p_qe(want, acc ? acc : p_triv());
        };
        t0Proof = fo_fact(t0);
        dProof = fo_fact(dge);
    }
    std::string hD = fresh_lbl(ctx, p, "_dom");
    std::string h2 = fresh_lbl(ctx, p, "_rg");
    // the sol rule picks its bound variable from its own context and goal;
    // over-avoid every name we know about so the shapes line up
    VarSet usedR = used;
    VarSet bv = vars_of(block);
    usedR.insert(bv.begin(), bv.end());
    VarId rf = base_var(fresh_name("r", usedR));
    ProofPtr bridgeBody = p_assigne(p_app(p_appt(p_hyp(hD), mk_var(rf)), p_hyp(h2)));
    ProofPtr bridge = p_lam_real(rf, p_lam(h2, nullptr, bridgeBody));
    ProofPtr domPremProof = p_app(p_lam(hD, srcDomAll, bridge), p->sub);
    DerivPtr solNode = d_rule(RuleName::RefSolve, {}, {t0Proof, dProof, domPremProof});

    // The emitted assignments are time-parametric (x := sln(t) after t := d)
    // while the source postcondition premiss assigned the substituted values
    // (x := sln(d)). The intro chain reuses the source ghosts so the renamed
    // context lines up, introduces fresh hypothesis labels, and then rebinds
    // each source label to its original equation through the oracle: the two
    // equation shapes agree given t = d.
    std::map<VarId, std::pair<VarId, std::string>> srcNames;  // target -> ghost, binder
    {
        ProofPtr cur = p->sub2;
        while (cur && cur->kind == K::AssignIntro) {
            srcNames.emplace(cur->var2, std::make_pair(cur->var, cur->binder));
            cur = cur->sub;
        }
    }
    std::vector<IntroFn> atoms;
    std::vector<std::string> freshBinders;
    std::vector<FormulaPtr> srcHyps;       // the source-shaped equations
    std::vector<std::string> srcBinders;
    for (size_t i = 0; i < parts.size(); ++i) {
        VarId tvar = parts[i]->var;
        auto it = srcNames.find(tvar);
        if (it == srcNames.end()) nnf("angelic solve premiss does not assign " + tvar.str());
        VarId gvar = it->second.first;
        std::string fb = synth_lbl("_sv");
        freshBinders.push_back(fb);
        srcBinders.push_back(it->second.second);
        atoms.push_back([gvar, tvar, fb](ProofPtr pr) { return p_assign(gvar, tvar, fb, pr); });
    }
    // source equations per part, in emission order
    {
        std::map<VarId, TermPtr> slnByVar;
        for (const auto& [v, t2] : p->solutions) slnByVar[v] = t2;
        srcHyps.clear();
        for (size_t i = 0; i < parts.size(); ++i) {
            VarId tvar = parts[i]->var;
            VarId gvar = srcNames.at(tvar).first;
            TermPtr rhs;
            if (tvar.primed) {
                rhs = parts[i]->rhs;
            } else {
                rhs = substitute(slnByVar.at(tvar), tau, p->term);
            }
            srcHyps.push_back(
                mk_compare(CompareOp::Eq, mk_var(tvar), rename_one(rhs, tvar, gvar)));
        }
    }
    // facts available for the rebinding cuts: the fresh equations plus the
    // first-order hypotheses already in scope
    std::vector<std::string> factLabels = freshBinders;
    for (const auto& a : ctx.items)
        if (is_first_order(a.formula)) factLabels.push_back(a.label);
    auto rebind = [srcHyps, srcBinders, factLabels](ProofPtr pr) {
        ProofPtr acc = std::move(pr);
        for (size_t i = srcHyps.size(); i-- > 0;) {
            ProofPtr facts;
            for (const auto& l : factLabels)
                facts = facts ? p_pair(facts, p_hyp(l)) : p_hyp(l);
            acc = p_app(p_lam(srcBinders[i], srcHyps[i], acc),
                        p_qe(srcHyps[i], facts ? facts : p_triv()));
        }
        return acc;
    };
    HeadEmit h{block,
               [atoms, rebind](ProofPtr pr) { return chain_intros(atoms, rebind(std::move(pr))); },
               solNode, mk_dual(ode)};
    GamePtr restSrc = with_duals(pending, list);
    return compose(h, tail, restSrc);
}

}  // namespace

NormalShapeProof to_normal_shape(const Context& ctx0, const ProofPtr& p0, const FormulaPtr& goal0) {
    Context ctx = ctx0;
    ProofPtr p = p0;
    FormulaPtr goal = goal0;
    // peel implication introductions into the context, but only while a box
    // modality remains underneath: [?a]b is both an implication and a test
    // segment, and only the former reading strips
    std::function<bool(const FormulaPtr&)> ends_in_box = [&](const FormulaPtr& f) {
        FormulaPtr h2, r2;
        if (f->kind == Formula::Kind::Box && f->game->kind != Game::Kind::Test) return true;
        if (match_imp(f, h2, r2)) return ends_in_box(r2);
        return f->kind == Formula::Kind::Box;
    };
    FormulaPtr hyp, rest;
    while (match_imp(goal, hyp, rest) && p->kind == ProofTerm::Kind::LamProof &&
           ends_in_box(rest)) {
        if (p->formula && !formula_eq(p->formula, hyp))
            throw NotNormalForm("hypothesis annotation mismatch while peeling implications");
        ctx = ctx.extended(p->binder, hyp);
        p = p->sub;
        goal = rest;
    }
    if (!is_system_test(ctx)) throw NotSystemTest("the context is not system-test");
    if (goal->kind != Formula::Kind::Box)
        throw NotNormalForm("inlining expects a box modality goal");
    if (!is_system_test(goal->post)) throw NotSystemTest("the postcondition is not system-test");
    // the source game may contain duals, but its embedded tests and domain
    // constraints must stay in the fragment
    if (!system_test_game(goal->game)) throw NotSystemTest("a test inside the game leaves the system-test fragment");

    NormalShapeProof shape;
    shape.ctx = ctx;
    shape.list = {goal->game};
    shape.post = goal->post;
    shape.proof = p;
    shape.source_game = goal->game;

    Walker w(ctx, p, goal);
    Piece piece = w.walkD(ctx, shape.list, shape.post, p);
    shape.inlined = piece.game ? piece.game : mk_skip();
    if (piece.game) {
        shape.transfer = piece.transfer;
    } else {
        shape.transfer = p_lam(fresh_label(ctx, "_tt"), nullptr, piece.transfer);
    }
    if (!piece.cert) throw NotNormalForm("internal: no certificate produced");
    shape.refinement =
        d_with_goal(piece.cert, mk_refine(std::nullopt, shape.inlined, shape.source_game));
    return shape;
}

GamePtr inline_strategy(const NormalShapeProof& shape) { return shape.inlined; }
ProofPtr synthesize_transfer(const NormalShapeProof& shape) { return shape.transfer; }
DerivPtr synthesize_refinement(const NormalShapeProof& shape) { return shape.refinement; }

}  // namespace cdgl
