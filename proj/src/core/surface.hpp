#pragma once

#include <map>

#include "core/prooft.hpp"

namespace cdgl {

struct ParseError : std::runtime_error {
    int line, col;
    ParseError(int line_, int col_, const std::string& what)
        : std::runtime_error("parse error at " + std::to_string(line_) + ":" + std::to_string(col_) +
                             ": " + what),
          line(line_),
          col(col_) {}
};

struct ProofDecl {
    Context ctx;
    FormulaPtr goal;
    ProofPtr proof;
};

struct DerivDecl {
    Context ctx;
    FormulaPtr goal;
    DerivPtr deriv;
};

// A parsed .cdgl file: named games, formulas, proofs and derivations.
// Declarations resolve against earlier declarations only.
struct SourceFile {
    struct Decl {
        enum class Kind { Game, Formula, Proof, Derivation } kind;
        std::string name;
        GamePtr game;
        FormulaPtr formula;
        ProofDecl proof;
        DerivDecl deriv;
    };
    std::vector<Decl> decls;

    const Decl* find(const std::string& name) const;
    const Decl* find(const std::string& name, Decl::Kind kind) const;
};

// Standalone entry points. Names in `env` (may be null) are visible.
TermPtr parse_term(const std::string& text, const SourceFile* env = nullptr);
GamePtr parse_game(const std::string& text, const SourceFile* env = nullptr);
FormulaPtr parse_formula(const std::string& text, const SourceFile* env = nullptr);
ProofPtr parse_proof_term(const std::string& text, const SourceFile* env = nullptr);
DerivPtr parse_derivation(const std::string& text, const SourceFile* env = nullptr);
SourceFile parse_file(const std::string& text);

// Minimal-parenthesization pretty printers; parse(pretty(e)) == e.
std::string pretty(const TermPtr& t);
std::string pretty(const GamePtr& g);
std::string pretty(const FormulaPtr& f);
std::string pretty(const ProofPtr& p);
std::string pretty(const DerivPtr& d);
std::string pretty(const Context& ctx);
std::string pretty_sequent(const Context& ctx, const FormulaPtr& goal);
std::string pretty(const SourceFile& file);

}  // namespace cdgl
