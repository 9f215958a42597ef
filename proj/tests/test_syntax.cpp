#include <doctest.h>

#include <map>

#include "core/analysis.hpp"
#include "core/poly.hpp"
#include "core/surface.hpp"
#include "gen.hpp"

using namespace cdgl;

static VarSet names(std::initializer_list<const char*> vs) {
    VarSet s;
    for (const char* v : vs) {
        std::string n = v;
        if (!n.empty() && n.back() == '\'')
            s.insert(primed_var(n.substr(0, n.size() - 1)));
        else
            s.insert(base_var(n));
    }
    return s;
}

TEST_CASE("parse games from the surface syntax") {
    GamePtr g = parse_game("{x:=1 ++ x:=2}; ?x>=1");
    REQUIRE(g->kind == Game::Kind::Seq);
    CHECK(g->left->kind == Game::Kind::Choice);
    CHECK(g->left->left->kind == Game::Kind::Assign);
    CHECK(g->right->kind == Game::Kind::Test);
    CHECK(game_eq(g, parse_game(pretty(g))));

    GamePtr pp = parse_game(
        "{{L:=-1 ++ L:=1}; {{R:=-1 ++ R:=1}}^d; {x'=L+R & x_l<=x & x<=x_r}}*");
    REQUIRE(pp->kind == Game::Kind::Repeat);
    REQUIRE(pp->body->kind == Game::Kind::Seq);
    CHECK(pp->body->left->kind == Game::Kind::Choice);
    REQUIRE(pp->body->right->kind == Game::Kind::Seq);
    CHECK(pp->body->right->left->kind == Game::Kind::Dual);
    CHECK(pp->body->right->right->kind == Game::Kind::Ode);
    CHECK(bound_vars(pp) == names({"L", "R", "x", "x'"}));
}

TEST_CASE("parse refinement formulas") {
    SourceFile env = parse_file("game a := x:=1\ngame b := x:=*\n");
    FormulaPtr f = parse_formula("a =<[0] b", &env);
    REQUIRE(f->kind == Formula::Kind::Refine);
    CHECK(f->rank == 0u);
    CHECK(game_eq(f->rleft, parse_game("x:=1")));
    CHECK(game_eq(f->rright, parse_game("x:=*")));

    FormulaPtr af = parse_formula("a =<< b", &env);
    REQUIRE(af->kind == Formula::Kind::Refine);
    CHECK(af->rleft->kind == Game::Kind::Dual);
    CHECK(af->rright->kind == Game::Kind::Dual);
    CHECK(!af->rank.has_value());

    FormulaPtr mf = parse_formula("a ~~ b", &env);
    FormulaPtr l, r;
    REQUIRE(match_and(mf, l, r));
    CHECK(l->kind == Formula::Kind::Refine);
    CHECK(r->kind == Formula::Kind::Refine);
    CHECK(game_eq(l->rleft, r->rright));
}

TEST_CASE("derived connectives elaborate to the core") {
    FormulaPtr conj = parse_formula("x >= 0 & y >= 0");
    CHECK(conj->kind == Formula::Kind::Diamond);
    CHECK(conj->game->kind == Game::Kind::Test);
    FormulaPtr a, b;
    CHECK(match_and(conj, a, b));

    FormulaPtr imp = parse_formula("x = 1 -> x >= 0");
    CHECK(imp->kind == Formula::Kind::Box);

    FormulaPtr all = parse_formula("forall x x*x >= 0");
    VarId v;
    FormulaPtr body;
    REQUIRE(match_forall(all, v, body));
    CHECK(v == base_var("x"));

    CHECK(is_verum(parse_formula("true")));
    CHECK(is_falsum(parse_formula("false")));
    CHECK(is_skip(parse_game("skip")));

    // chained comparison sugar
    FormulaPtr chain = parse_formula("0 <= x <= 5");
    FormulaPtr l, r;
    REQUIRE(match_and(chain, l, r));
    CHECK(l->kind == Formula::Kind::Compare);
    CHECK(r->kind == Formula::Kind::Compare);
}

TEST_CASE("free variables") {
    CHECK(free_vars(parse_term("x + y*y")) == names({"x", "y"}));
    CHECK(free_vars(parse_game("x := 5; ?x >= z")) == names({"z"}));
    SourceFile env = parse_file("game ga := x:=a\ngame gb := x:=b\n");
    CHECK(free_vars(parse_formula("ga =< gb", &env)) == names({"a", "b"}));
    CHECK(free_vars(parse_game("{x' = L + R & x_l <= x & x <= x_r}")) ==
          names({"L", "R", "x", "x_l", "x_r"}));
    CHECK(bound_vars(parse_game("?x >= 0")).empty());
}

TEST_CASE("rename is an involutive transposition") {
    FormulaPtr f = parse_formula("x >= y");
    CHECK(formula_eq(rename(f, "x", "y"), parse_formula("y >= x")));
    FormulaPtr g = parse_formula("[x:=x+1] x >= 0");
    CHECK(formula_eq(rename(g, "x", "z"), parse_formula("[z:=z+1] z >= 0")));

    gen::Rng rng(23);
    auto pool = gen::var_pool(4);
    for (int i = 0; i < 500; ++i) {
        FormulaPtr h = gen::rand_formula(rng, pool, 4);
        CHECK(formula_eq(rename(rename(h, "x", "y"), "x", "y"), h));
    }
}

TEST_CASE("substitution") {
    CHECK(formula_eq(substitute(parse_formula("x >= 0"), base_var("x"), parse_term("5")),
                     parse_formula("5 >= 0")));
    CHECK(formula_eq(substitute(parse_formula("y >= 0"), base_var("x"), parse_term("17")),
                     parse_formula("y >= 0")));
    CHECK_THROWS_AS(
        (void)substitute(parse_formula("[x:=x+1] x >= y"), base_var("y"), parse_term("x")),
        AdmissibilityError);

    gen::Rng rng(29);
    auto pool = gen::var_pool(4);
    int applied = 0;
    for (int i = 0; i < 500; ++i) {
        FormulaPtr h = gen::rand_formula(rng, pool, 4);
        try {
            FormulaPtr s = substitute(h, base_var("x"), mk_var("x"));
            CHECK(formula_eq(s, h));
            ++applied;
        } catch (const AdmissibilityError&) {
            // fine: conservative refusal
        }
    }
    CHECK(applied > 100);
}

TEST_CASE("polynomial normalization") {
    CHECK(term_eq(poly_normalize(parse_term("x + x")), parse_term("2*x")));
    CHECK(term_eq(poly_normalize(parse_term("(x+1)*(x-1)")), parse_term("x*x - 1")));
    CHECK(term_eq(poly_normalize(parse_term("0*y + x")), parse_term("x")));
    CHECK(poly_eq(parse_term("(x+y)*(x+y)"), parse_term("x*x + 2*x*y + y*y")));

    gen::Rng rng(31);
    auto pool = gen::var_pool(3);
    for (int i = 0; i < 300; ++i) {
        TermPtr t = gen::rand_term(rng, pool, 5);
        TermPtr n = poly_normalize(t);
        // idempotent
        CHECK(term_eq(poly_normalize(n), n));
        // agrees with evaluation at random rational points
        for (int k = 0; k < 20; ++k) {
            std::map<VarId, Rational> st;
            for (const auto& v : vars_of(t)) st[v] = rng.rat();
            for (const auto& v : vars_of(n)) st.emplace(v, rng.rat());
            CHECK(eval_term(t, st) == eval_term(n, st));
        }
    }
}

TEST_CASE("differentiation") {
    CHECK(term_eq(differentiate(parse_term("7")), parse_term("0")));
    CHECK(term_eq(differentiate(parse_term("x")), parse_term("x'")));
    CHECK(term_eq(differentiate(parse_term("x*x")), parse_term("2*x*x'")));
    CHECK_THROWS_AS((void)differentiate(parse_term("(x)'")), UnsupportedTerm);

    // linearity and the Leibniz rule, checked by point evaluation
    gen::Rng rng(37);
    auto pool = gen::var_pool(3);
    for (int i = 0; i < 200; ++i) {
        TermPtr f = gen::rand_term(rng, pool, 4, false);
        TermPtr g = gen::rand_term(rng, pool, 4, false);
        TermPtr lhs = differentiate(mk_product(f, g));
        TermPtr rhs = poly_normalize(
            mk_sum(mk_product(differentiate(f), g), mk_product(f, differentiate(g))));
        CHECK(poly_eq(lhs, rhs));
        TermPtr dsum = differentiate(mk_sum(f, g));
        CHECK(poly_eq(dsum, mk_sum(differentiate(f), differentiate(g))));
        for (int k = 0; k < 10; ++k) {
            std::map<VarId, Rational> st;
            for (const auto& v : vars_of(lhs)) st[v] = rng.rat();
            for (const auto& v : vars_of(rhs)) st.emplace(v, rng.rat());
            CHECK(eval_term(lhs, st) == eval_term(rhs, st));
        }
    }
}

TEST_CASE("parser round trip on random ASTs") {
    gen::Rng rng(41);
    auto pool = gen::var_pool(4);
    for (int i = 0; i < 1500; ++i) {
        TermPtr t = gen::rand_term(rng, pool, 4, true, true);
        CAPTURE(pretty(t));
        CHECK(term_eq(parse_term(pretty(t)), t));
        GamePtr g = gen::rand_game(rng, pool, 4);
        CAPTURE(pretty(g));
        CHECK(game_eq(parse_game(pretty(g)), g));
        FormulaPtr f = gen::rand_formula(rng, pool, 4);
        CAPTURE(pretty(f));
        CHECK(formula_eq(parse_formula(pretty(f)), f));
    }
}

TEST_CASE("parser is total: junk input only raises ParseError") {
    gen::Rng rng(4711);
    const char alphabet[] = "abxyz01 ()+*;:=<>&|!?{}[]',.-/^d_\n";
    for (int i = 0; i < 3000; ++i) {
        std::string junk;
        int len = rng.pick(1, 30);
        for (int k = 0; k < len; ++k)
            junk += alphabet[rng.pick(0, static_cast<int>(sizeof(alphabet)) - 2)];
        for (int kind = 0; kind < 4; ++kind) {
            try {
                switch (kind) {
                    case 0: (void)parse_term(junk); break;
                    case 1: (void)parse_game(junk); break;
                    case 2: (void)parse_formula(junk); break;
                    default: (void)parse_file(junk); break;
                }
            } catch (const ParseError&) {
                // the only permitted failure
            }
        }
    }
    CHECK(true);
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS((void)parse_game("x := "), ParseError);
    CHECK_THROWS_AS((void)parse_formula("x >="), ParseError);
    CHECK_THROWS_AS((void)parse_file("game g := x := 1\ngame g := x := 2"), ParseError);
    try {
        (void)parse_game("x :=\n  @");
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("file declarations resolve acyclically") {
    SourceFile f = parse_file(
        "-- a comment\n"
        "game step := x := x + 1\n"
        "game loop := step*\n"
        "formula safe := [loop] x >= 0\n");
    REQUIRE(f.decls.size() == 3);
    const auto* loop = f.find("loop", SourceFile::Decl::Kind::Game);
    REQUIRE(loop != nullptr);
    CHECK(loop->game->kind == Game::Kind::Repeat);
    CHECK_THROWS_AS((void)parse_file("game a := b\n"), ParseError);
}
