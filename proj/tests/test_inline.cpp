#include <doctest.h>

#include <fstream>
#include <sstream>

#include "core/analysis.hpp"
#include "core/inliner.hpp"
#include "core/surface.hpp"
#include "core/sim.hpp"
#include "gen_proofs.hpp"

using namespace cdgl;

static SourceFile load_pp() {
    std::ifstream in(std::string(SOURCE_DIR) + "/pp.cdgl");
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_file(os.str());
}

TEST_CASE("is_system") {
    CHECK(is_system(parse_game("x := 1")));
    SourceFile f = load_pp();
    CHECK(!is_system(f.find("PP")->game));
    CHECK(is_system(parse_game("{x := 1 ++ x := 2}; {x' = 1}*")));
}

TEST_CASE("is_system_test") {
    CHECK(is_system_test(parse_formula("x >= 0")));
    CHECK(!is_system_test(parse_formula("<x := *> x = 1")));
    CHECK(is_system_test(parse_formula("[x := 1] x = 1 & [{x' = 2}] x >= 0")));
    CHECK(!is_system_test(parse_formula("[{x := 1}^d] x = 1")));
    CHECK(is_system_test(parse_formula("x >= 0 | x < 0")));
    CHECK(is_system_test(parse_formula("forall x x*x >= 0")));
}

TEST_CASE("push-pull inlining matches the displayed system") {
    SourceFile f = load_pp();
    const auto* d = f.find("ppSafe", SourceFile::Decl::Kind::Proof);
    REQUIRE(d);
    NormalShapeProof shape = to_normal_shape(d->proof.ctx, d->proof.proof, d->proof.goal);
    GamePtr golden = parse_game(
        "{{L := -1; R := 1; {x' = L + R & x_l <= x & x <= x_r}} ++ "
        "{L := 1; R := -1; {x' = L + R & x_l <= x & x <= x_r}}}*");
    CHECK(game_eq(inline_strategy(shape), golden));
    CHECK(is_system(shape.inlined));
    // the inlined text reparses to the same structure
    CHECK(game_eq(parse_game(pretty(shape.inlined)), shape.inlined));
}

TEST_CASE("push-pull transfer and refinement certificates check") {
    SourceFile f = load_pp();
    const auto* d = f.find("ppSafe", SourceFile::Decl::Kind::Proof);
    NormalShapeProof shape = to_normal_shape(d->proof.ctx, d->proof.proof, d->proof.goal);
    CheckReport tr =
        check_proof(shape.ctx, synthesize_transfer(shape), mk_box(shape.inlined, shape.post));
    CHECK(tr.accepted);
    CHECK(tr.assumed_count() == 0);
    CheckReport rf = check_refinement(shape.ctx, synthesize_refinement(shape),
                                      mk_refine(std::nullopt, shape.inlined, shape.source_game));
    CHECK(rf.accepted);
}

TEST_CASE("a witness determinizes an angelic assignment") {
    // |- <x := *> x = 1 by witness 1, inlined to x := 1
    Context ctx;
    FormulaPtr goal = parse_formula("[{x := *}^d] x = 1");
    ProofPtr proof = parse_proof_term("dual(wit(1, y, p, qe(x = 1, p)))");
    REQUIRE(check_proof(ctx, proof, goal).accepted);
    NormalShapeProof shape = to_normal_shape(ctx, proof, goal);
    CHECK(game_eq(shape.inlined, parse_game("x := 1")));
    CHECK(check_proof(ctx, shape.transfer, parse_formula("[x := 1] x = 1")).accepted);
    CheckReport rf = check_refinement(ctx, shape.refinement,
                                      parse_formula("x := 1 =< {x := *}^d"));
    CHECK(rf.accepted);
}

TEST_CASE("angelic tests vanish, demonic tests stay") {
    Context ctx;
    FormulaPtr goal = parse_formula("[{?1 <= 2}^d; ?x >= 0; x := x + 1] x >= 1");
    ProofPtr proof = parse_proof_term(
        "seq(dual((qe(1 <= 2, triv), seq(lam(h : _, asgn(x0, x, p, qe(x >= 1, (p, h))))))))");
    CheckReport src = check_proof(ctx, proof, goal);
    REQUIRE(src.accepted);
    NormalShapeProof shape = to_normal_shape(ctx, proof, goal);
    CHECK(game_eq(shape.inlined, parse_game("?x >= 0; x := x + 1")));
    CHECK(check_proof(ctx, shape.transfer, mk_box(shape.inlined, shape.post)).accepted);
    CHECK(check_refinement(ctx, shape.refinement,
                           mk_refine(std::nullopt, shape.inlined, shape.source_game))
              .accepted);
}

TEST_CASE("hypothesis strategies play the residue verbatim") {
    Context ctx;
    ctx.items.push_back({"h", parse_formula("[x := 1] [x := x + 1] x = 2")});
    FormulaPtr goal = parse_formula("[x := 1; x := x + 1] x = 2");
    ProofPtr proof = parse_proof_term("seq(h)");
    REQUIRE(check_proof(ctx, proof, goal).accepted);
    NormalShapeProof shape = to_normal_shape(ctx, proof, goal);
    CHECK(game_eq(shape.inlined, parse_game("x := 1; x := x + 1")));
    CHECK(check_proof(ctx, shape.transfer, mk_box(shape.inlined, shape.post)).accepted);
    CHECK(check_refinement(ctx, shape.refinement,
                           mk_refine(std::nullopt, shape.inlined, shape.source_game))
              .accepted);
}

TEST_CASE("case analysis emits guarded branches") {
    Context ctx;
    ctx.items.push_back({"disj", parse_formula("x >= 0 | x < 0")});
    FormulaPtr goal = parse_formula("[{y := 1}^d] y = 1");
    ProofPtr proof = parse_proof_term(
        "case(disj, l => dual(asgn(y0, y, p, qe(y = 1, p))), "
        "r => dual(asgn(y0, y, p, qe(y = 1, p))))");
    REQUIRE(check_proof(ctx, proof, goal).accepted);
    NormalShapeProof shape = to_normal_shape(ctx, proof, goal);
    REQUIRE(shape.inlined->kind == Game::Kind::Choice);
    CHECK(shape.inlined->left->kind == Game::Kind::Seq);
    CHECK(shape.inlined->left->left->kind == Game::Kind::Test);
    CHECK(check_proof(ctx, shape.transfer, mk_box(shape.inlined, shape.post)).accepted);
    CHECK(check_refinement(ctx, shape.refinement,
                           mk_refine(std::nullopt, shape.inlined, shape.source_game))
              .accepted);
}

TEST_CASE("angelic convergence compiles to a guarded loop") {
    Context ctx;
    ctx.items.push_back({"h", parse_formula("y = 3")});
    FormulaPtr goal = parse_formula("[{{y := y - 1}*}^d] y = 0");
    ProofPtr proof = parse_proof_term(
        "dual(for(m0, 1, y, true, triv, "
        "(p, q) => asgn(y1, y, s, qe(true & m0 >= y + 1, (s, q))), q))");
    CheckReport src = check_proof(ctx, proof, goal);
    REQUIRE(src.accepted);
    NormalShapeProof shape = to_normal_shape(ctx, proof, goal);
    GamePtr expect = parse_game("{?y > 0; y := y - 1}*; ?y = 0");
    CHECK(game_eq(shape.inlined, expect));
    CheckReport tr = check_proof(ctx, shape.transfer, mk_box(shape.inlined, shape.post));
    CHECK(tr.accepted);
    CheckReport rf = check_refinement(ctx, shape.refinement,
                                      mk_refine(std::nullopt, shape.inlined, shape.source_game));
    CHECK(rf.accepted);
}

TEST_CASE("non-normal proofs are rejected with the offending node") {
    Context ctx;
    // a beta redex app(lam(...), ...) is not an introduction form
    FormulaPtr goal = parse_formula("[x := 1] x = 1");
    ProofPtr proof = parse_proof_term("app(lam(p : [x := 1] x = 1, p), asgn(y, x, q, qe(x = 1, q)))");
    REQUIRE(check_proof(ctx, proof, goal).accepted);
    CHECK_THROWS_AS((void)to_normal_shape(ctx, proof, goal), NotNormalForm);

    // a non-system-test hypothesis
    Context bad;
    bad.items.push_back({"h", parse_formula("<x := *> x = 1")});
    ProofPtr ok = parse_proof_term("asgn(y, x, q, qe(x = 1, q))");
    CHECK_THROWS_AS((void)to_normal_shape(bad, ok, goal), NotSystemTest);
}

TEST_CASE("theorem property suite at small scale") {
    gen::ProofGen pg(20240801);
    int n = 0;
    for (int i = 0; i < 120; ++i) {
        gen::ProofCase c = pg.next(3);
        CheckReport src = check_proof(c.ctx, c.proof, c.goal);
        CAPTURE(pretty(c.goal));
        CAPTURE(pretty(c.proof));
        REQUIRE(src.accepted);
        NormalShapeProof shape = to_normal_shape(c.ctx, c.proof, c.goal);
        CHECK(is_system(shape.inlined));  // systemhood
        CheckReport tr =
            check_proof(shape.ctx, shape.transfer, mk_box(shape.inlined, shape.post));
        CAPTURE(pretty(shape.inlined));
        if (!tr.accepted) {
            CAPTURE(tr.reason);
            CAPTURE(tr.path);
        }
        CHECK(tr.accepted);  // transfer
        CheckReport rf =
            check_refinement(shape.ctx, shape.refinement,
                             mk_refine(std::nullopt, shape.inlined, shape.source_game));
        if (!rf.accepted) {
            CAPTURE(rf.reason);
            CAPTURE(rf.path);
        }
        CHECK(rf.accepted);  // refinement
        // bound-variable containment: inlining introduces no new writes
        VarSet bi = bound_vars(shape.inlined);
        VarSet bs = bound_vars(shape.source_game);
        for (const auto& v : bi) CHECK(bs.count(v) == 1);
        ++n;
    }
    CHECK(n == 120);
}

TEST_CASE("angelic solves compile to solution assignments") {
    Context ctx;
    ctx.items.push_back({"h", parse_formula("x = 0")});
    FormulaPtr goal = parse_formula("[t := 0; {{t' = 1, x' = 1}}^d] x = 2");
    ProofPtr proof = parse_proof_term(
        "seq(asgn(t0g, t, pt0, dual(dsolve(2, [t = t + t_1, x = x + t_1], "
        "lamv(r, lam(g : _, asgn(a1, t, p1, asgn(a2, x, p2, triv)))), "
        "asgn(b1, t, q1, asgn(b2, x, q2, asgn(b3, t', q3, asgn(b4, x', q4, "
        "qe(x = 2, (q2, h))))))))))");
    REQUIRE(check_proof(ctx, proof, goal).accepted);
    NormalShapeProof shape = to_normal_shape(ctx, proof, goal);
    CHECK(game_eq(shape.inlined,
                  parse_game("t := 0; t := 2; x := x + t; x' := 1; t' := 1")));
    CHECK(is_system(shape.inlined));
    CheckReport tr = check_proof(ctx, shape.transfer, mk_box(shape.inlined, shape.post));
    CHECK(tr.accepted);
    CheckReport rf = check_refinement(ctx, shape.refinement,
                                      mk_refine(std::nullopt, shape.inlined, shape.source_game));
    CHECK(rf.accepted);
    // the compiled program actually reaches the target
    SimState init;
    init.set(base_var("x"), Rational(0));
    Trace t = run_system(shape.inlined, init, DemonScript{}, parse_formula("x = 2"));
    CHECK(t.verdict == Trace::Verdict::PostconditionHolds);
}

TEST_CASE("renaming stability over generated accepted proofs") {
    gen::ProofGen pg(555);
    int checked = 0;
    for (int i = 0; i < 30; ++i) {
        gen::ProofCase c = pg.next(3);
        REQUIRE(check_proof(c.ctx, c.proof, c.goal).accepted);
        Context rctx = rename(c.ctx, "x", "xq");
        FormulaPtr rgoal = rename(c.goal, "x", "xq");
        ProofPtr rproof = rename(c.proof, "x", "xq");
        CheckReport r = check_proof(rctx, rproof, rgoal);
        CAPTURE(pretty(rgoal));
        CHECK(r.accepted);
        ++checked;
    }
    CHECK(checked == 30);
}

TEST_CASE("derived K consequence") {
    // accepted M : [a]phi and q : [inline(a, M)]psi assemble into [a](phi & psi)
    Context ctx;
    FormulaPtr goal = parse_formula("[{x := *}^d] x = 1");
    ProofPtr proof = parse_proof_term("dual(wit(1, y, p, qe(x = 1, p)))");
    REQUIRE(check_proof(ctx, proof, goal).accepted);
    NormalShapeProof shape = to_normal_shape(ctx, proof, goal);
    // q : [x := 1] x >= 1
    ProofPtr q = parse_proof_term("asgn(y, x, p, qe(x >= 1, p))");
    FormulaPtr psi = parse_formula("x >= 1");
    REQUIRE(check_proof(ctx, q, mk_box(shape.inlined, psi)).accepted);
    // [inl]phi & [inl]psi -> [inl](phi & psi) via the system box-and axiom,
    // then lift to the source game along the refinement certificate
    FormulaPtr phiAndPsi = mk_and(shape.post, psi);
    FormulaPtr impF = mk_imp(mk_and(mk_box(shape.inlined, shape.post), mk_box(shape.inlined, psi)),
                             mk_box(shape.inlined, phiAndPsi));
    ProofPtr boxAnd = p_byref(d_with_goal(d_rule(RuleName::SysBoxAnd), impF));
    ProofPtr combined = p_app(boxAnd, p_pair(shape.transfer, q));
    ProofPtr lifted = p_boxref(std::nullopt, shape.inlined, combined, shape.refinement);
    CheckReport fin = check_proof(ctx, lifted, mk_box(shape.source_game, phiAndPsi));
    CHECK(fin.accepted);
}
