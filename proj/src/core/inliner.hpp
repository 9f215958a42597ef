#pragma once

#include "core/kernel.hpp"

namespace cdgl {

struct NotNormalForm : std::runtime_error {
    explicit NotNormalForm(const std::string& what) : std::runtime_error(what) {}
};

struct NotSystemTest : std::runtime_error {
    explicit NotSystemTest(const std::string& what) : std::runtime_error(what) {}
};

// System-test: every modality is a box over a dual-free game. Conjunction and
// disjunction read as connectives; bare diamond modalities (including
// existentials) fall outside the fragment.
bool is_system_test(const FormulaPtr& f);
bool is_system_test(const Context& ctx);
// Structural approximation for proofs: every formula the proof introduces
// into a context (annotations, invariants, variants, cuts, oracle targets)
// is system-test, with the relaxed exemption for case scrutinees.
bool is_system_test(const ProofPtr& p);

// A checked proof in the shape the inlining equations pattern-match: the
// goal decomposed as a game list [g1 ; g2 ; ... ; L] with a terminal
// postcondition, hypothesis intros stripped into the context, and the
// compiled artifacts alongside (the dual-free system, its transfer proof
// and the refinement certificate back to the source game).
struct NormalShapeProof {
    Context ctx;
    std::vector<GamePtr> list;  // empty means the terminal skip program
    FormulaPtr post;
    ProofPtr proof;

    GamePtr inlined;      // dual-free; never null for a nonempty list
    ProofPtr transfer;    // ctx |- [inlined] post
    DerivPtr refinement;  // ctx |- inlined =< fold(list)
    GamePtr source_game;  // fold(list)
};

// Validates normality and the system-test restriction, then compiles.
// Throws NotNormalForm / NotSystemTest; assumes (ctx, p, goal) checks.
NormalShapeProof to_normal_shape(const Context& ctx, const ProofPtr& p, const FormulaPtr& goal);

GamePtr inline_strategy(const NormalShapeProof& shape);
ProofPtr synthesize_transfer(const NormalShapeProof& shape);
DerivPtr synthesize_refinement(const NormalShapeProof& shape);

// Right-associated sequence of games; null for the empty list.
GamePtr fold_games(const std::vector<GamePtr>& list);

// Derivation of from =< to when the two games have identical sequence leaves
// and differ only in association; null when they do not.
DerivPtr reassociation_cert(const GamePtr& from, const GamePtr& to);

}  // namespace cdgl
