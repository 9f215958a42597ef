#pragma once

// Generator of accepted system-test proofs for the strategy compiler
// property suites: random game lists with matching normal-shape proofs,
// built bottom-up so every arithmetic leaf decides.

#include <functional>

#include "core/inliner.hpp"
#include "core/kernel.hpp"
#include "gen.hpp"

namespace cdgl::gen {

struct ProofCase {
    Context ctx;
    FormulaPtr goal;
    ProofPtr proof;
};

class ProofGen {
public:
    explicit ProofGen(uint64_t seed) : rng_(seed) {}

    ProofCase next(int maxDepth = 4) {
        counter_ = 0;
        odeUsed_ = false;
        Context ctx;
        disjOk_ = rng_.coin();
        if (disjOk_)
            ctx.items.push_back(
                {"disj", mk_or(mk_compare(CompareOp::Ge, mk_var("w"), mk_int(0)),
                               mk_compare(CompareOp::Lt, mk_var("w"), mk_int(0)))});
        FormulaPtr post = rand_post();
        int nsegs = rng_.pick(1, 3);
        std::vector<Seg> segs;
        for (int i = 0; i < nsegs; ++i) segs.push_back(seg(maxDepth));
        std::vector<GamePtr> games;
        for (const auto& s : segs) games.push_back(s.game);
        ProofPtr done = post_proof(post);
        ProofPtr proof = assemble(segs, 0, done);
        return ProofCase{ctx, mk_box(fold_games(games), post), proof};
    }

private:
    Rng rng_;
    int counter_ = 0;
    bool odeUsed_ = false;
    bool disjOk_ = false;

    struct Seg {
        GamePtr game;
        std::function<ProofPtr(ProofPtr)> wrap;
    };

    std::string uniq(const std::string& stem) { return stem + std::to_string(counter_++); }
    VarId pv() { return base_var(std::vector<std::string>{"x", "y", "z"}[rng_.pick(0, 2)]); }
    TermPtr small() {
        if (rng_.coin()) return mk_int(rng_.pick(-3, 3));
        return mk_var(pv());
    }
    FormulaPtr rand_fo() {
        return mk_compare(static_cast<CompareOp>(rng_.pick(0, 5)), small(), small());
    }
    // a tautology the oracle decides
    FormulaPtr taut() {
        switch (rng_.pick(0, 2)) {
            case 0: {
                int a = rng_.pick(-3, 3);
                return mk_compare(CompareOp::Le, mk_int(a), mk_int(a + rng_.pick(0, 3)));
            }
            case 1: {
                VarId v = pv();
                return mk_compare(CompareOp::Eq, mk_var(v), mk_var(v));
            }
            default: {
                VarId v = pv();
                return mk_compare(CompareOp::Le, mk_var(v), mk_sum(mk_var(v), mk_int(1)));
            }
        }
    }
    FormulaPtr rand_post() {
        if (rng_.coin()) return mk_verum();
        return taut();
    }
    ProofPtr post_proof(const FormulaPtr& post) {
        if (is_verum(post)) return p_triv();
        return p_qe(post, p_triv());
    }

    ProofPtr assemble(const std::vector<Seg>& segs, size_t i, ProofPtr done) {
        if (i == segs.size()) return done;
        ProofPtr inner = segs[i].wrap(assemble(segs, i + 1, std::move(done)));
        return i + 1 == segs.size() ? inner : p_seqi(inner);
    }

    Seg seg(int depth) {
        int lo = 0;
        int hi = depth <= 1 ? 6 : (disjOk_ ? 13 : 12);
        switch (rng_.pick(lo, hi)) {
            case 0: {  // demonic assignment
                VarId x = pv();
                TermPtr f = small();
                std::string g = uniq("g"), b = uniq("pb");
                return {mk_assign(x, f), [=](ProofPtr pr) {
                            return p_assign(base_var(g), x, b, std::move(pr));
                        }};
            }
            case 1: {  // demonic havoc
                VarId x = pv();
                return {mk_nondet(x),
                        [=](ProofPtr pr) { return p_lam_real(x, std::move(pr)); }};
            }
            case 2: {  // demonic test
                FormulaPtr c = rand_fo();
                std::string b = uniq("tb");
                return {mk_test(c),
                        [=](ProofPtr pr) { return p_lam(b, nullptr, std::move(pr)); }};
            }
            case 3: {  // angelic assignment
                VarId x = pv();
                TermPtr f = small();
                std::string g = uniq("g"), b = uniq("pb");
                return {mk_dual(mk_assign(x, f)), [=](ProofPtr pr) {
                            return p_duali(p_assign(base_var(g), x, b, std::move(pr)));
                        }};
            }
            case 4: {  // angelic witness
                VarId x = pv();
                TermPtr f = small();
                std::string g = uniq("g"), b = uniq("pb");
                return {mk_dual(mk_nondet(x)), [=](ProofPtr pr) {
                            return p_duali(p_dassign(f, base_var(g), b, std::move(pr)));
                        }};
            }
            case 5: {  // angelic test over a decidable tautology
                FormulaPtr c = taut();
                return {mk_dual(mk_test(c)), [=](ProofPtr pr) {
                            return p_duali(p_pair(p_qe(c, p_triv()), std::move(pr)));
                        }};
            }
            case 6: {  // angelic choice: take one branch, leave the other
                GamePtr other = mk_assign(pv(), small());
                bool left = rng_.coin();
                Seg atom = angelic_atom();
                GamePtr branch = atom.game->body;  // strip the dual
                GamePtr choice = left ? mk_choice(branch, other) : mk_choice(other, branch);
                return {mk_dual(choice), [=](ProofPtr pr) {
                            ProofPtr innerP = strip_dual(atom.wrap(std::move(pr)));
                            return p_duali(left ? p_injl(innerP) : p_injr(innerP));
                        }};
            }
            case 7: {  // demonic choice
                Seg l = seg(depth - 1);
                Seg r = seg(depth - 1);
                return {mk_choice(l.game, r.game), [=](ProofPtr pr) {
                            return p_pair(l.wrap(pr), r.wrap(pr));
                        }};
            }
            case 8: {  // demonic repetition: its premises drop the context,
                       // so the hypothesis templates go out of scope
                disjOk_ = false;
                Seg body = seg(depth - 1);
                std::string pb = uniq("p"), qb = uniq("q");
                return {mk_repeat(body.game), [=](ProofPtr pr) {
                            return p_rep(p_triv(), mk_verum(), pb, body.wrap(p_triv()), qb,
                                         std::move(pr));
                        }};
            }
            case 9: {  // angelic repetition: stop, or one round then stop
                Seg atom = angelic_atom();
                GamePtr body = atom.game->body;
                if (rng_.coin()) {
                    return {mk_dual(mk_repeat(body)),
                            [=](ProofPtr pr) { return p_duali(p_stop(std::move(pr))); }};
                }
                return {mk_dual(mk_repeat(body)), [=](ProofPtr pr) {
                            return p_duali(
                                p_go(strip_dual(atom.wrap(p_stop(std::move(pr))))));
                        }};
            }
            case 10: {  // demonic solvable ODE x' = c (one per sequent: the
                        // kernel's time parameter must stay the default)
                if (odeUsed_) return seg(0);
                odeUsed_ = true;
                VarId x = pv();
                TermPtr c = mk_int(rng_.pick(-2, 2));
                GamePtr ode = mk_ode({{x, c}}, mk_verum());
                TermPtr sln = mk_sum(mk_var(x), mk_product(c, mk_var("t")));
                std::string b1 = uniq("kt"), b2 = uniq("kd"), g1 = uniq("g"), g2 = uniq("g"),
                            pb1 = uniq("pb"), pb2 = uniq("pb");
                return {ode, [=](ProofPtr pr) {
                            return p_bsolve(
                                {{x, sln}},
                                p_lam_real(base_var("t"),
                                           p_lam(b1, nullptr,
                                                 p_lam(b2, nullptr,
                                                       p_assign(base_var(g1), x, pb1,
                                                                p_assign(base_var(g2),
                                                                         primed_var(x.name),
                                                                         pb2, std::move(pr)))))));
                        }};
            }
            case 11: {  // differential cut then weaken: x' = 1 & x >= 0
                VarId x = pv();
                GamePtr ode = mk_ode({{x, mk_int(1)}}, mk_compare(CompareOp::Ge, mk_var(x),
                                                                  mk_int(0)));
                FormulaPtr cut = mk_compare(CompareOp::Ge, mk_var(x), mk_int(-1));
                std::string s1 = uniq("s"), s2 = uniq("s");
                ProofPtr show = p_dw(p_lam_real(
                    x, p_lam_real(primed_var(x.name), p_lam(s1, nullptr, p_qe(cut, p_hyp(s1))))));
                return {ode, [=](ProofPtr pr) {
                            return p_dc(cut, show,
                                        p_dw(p_lam_real(
                                            x, p_lam_real(primed_var(x.name),
                                                          p_lam(s2, nullptr, std::move(pr))))));
                        }};
            }
            case 12: {  // angelic clocked ODE solved with a duration witness
                if (odeUsed_) return seg(0);
                odeUsed_ = true;
                VarId clock = base_var("z");
                VarId x = base_var(rng_.coin() ? "x" : "y");
                TermPtr c = mk_int(rng_.pick(-2, 2));
                TermPtr d = mk_int(rng_.pick(0, 3));
                GamePtr ode = mk_ode({{clock, mk_int(1)}, {x, c}}, mk_verum());
                GamePtr game = mk_seq(mk_assign(clock, mk_int(0)), mk_dual(ode));
                TermPtr slnClock = mk_sum(mk_var(clock), mk_var("t"));
                TermPtr slnX = mk_sum(mk_var(x), mk_product(c, mk_var("t")));
                std::string tb = uniq("tb"), pz = uniq("pz");
                std::string g1 = uniq("g"), g2 = uniq("g"), g3 = uniq("g"), g4 = uniq("g"),
                            g5 = uniq("g"), g6 = uniq("g");
                std::string q1 = uniq("q"), q2 = uniq("q"), q3 = uniq("q"), q4 = uniq("q"),
                            q5 = uniq("q"), q6 = uniq("q"), hh = uniq("h");
                return {game, [=](ProofPtr pr) {
                            ProofPtr dom = p_lam_real(
                                base_var("r"),
                                p_lam(hh, nullptr,
                                      p_assign(base_var(g5), clock, q5,
                                               p_assign(base_var(g6), x, q6, p_triv()))));
                            ProofPtr post = p_assign(
                                base_var(g1), clock, q1,
                                p_assign(base_var(g2), x, q2,
                                         p_assign(base_var(g3), primed_var(clock.name), q3,
                                                  p_assign(base_var(g4), primed_var(x.name), q4,
                                                           std::move(pr)))));
                            return p_seqi(p_assign(
                                base_var(tb), clock, pz,
                                p_duali(p_dsolve(d, {{clock, slnClock}, {x, slnX}}, dom, post))));
                        }};
            }
            default: {  // case analysis on the context disjunction
                std::string l = uniq("cl"), r = uniq("cr");
                Seg inner = seg(depth - 1);
                return {inner.game, [=](ProofPtr pr) {
                            return p_case(p_hyp("disj"), l, inner.wrap(pr), r, inner.wrap(pr));
                        }};
            }
        }
    }

    static ProofPtr strip_dual(ProofPtr p) {
        // angelic atoms wrap their proof in a dual introduction; inside a
        // choice/repetition the branch proof is the bare inner intro
        if (p->kind == ProofTerm::Kind::DualIntro) return p->sub;
        return p;
    }

    // an angelic-position atom: dualled game plus its (dual-wrapped) intro
    Seg angelic_atom() {
        switch (rng_.pick(0, 2)) {
            case 0: {
                VarId x = pv();
                TermPtr f = small();
                std::string g = uniq("g"), b = uniq("pb");
                return {mk_dual(mk_assign(x, f)), [=](ProofPtr pr) {
                            return p_duali(p_assign(base_var(g), x, b, std::move(pr)));
                        }};
            }
            case 1: {
                VarId x = pv();
                TermPtr f = small();
                std::string g = uniq("g"), b = uniq("pb");
                return {mk_dual(mk_nondet(x)), [=](ProofPtr pr) {
                            return p_duali(p_dassign(f, base_var(g), b, std::move(pr)));
                        }};
            }
            default: {
                FormulaPtr c = taut();
                return {mk_dual(mk_test(c)), [=](ProofPtr pr) {
                            return p_duali(p_pair(p_qe(c, p_triv()), std::move(pr)));
                        }};
            }
        }
    }
};

}  // namespace cdgl::gen
