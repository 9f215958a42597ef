#include <cstring>

#include "core/analysis.hpp"
#include "core/surface.hpp"

namespace cdgl {

namespace {

enum class Tok {
    Ident,
    PrimedIdent,
    Number,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Question,
    Assign,    // :=
    Star,
    CaretD,    // ^d
    PlusPlus,  // ++
    Amp,
    Bar,
    Bang,
    Arrow,     // ->
    IffOp,     // <->
    EqOp,
    NeOp,
    LeOp,
    GeOp,
    LtOp,
    GtOp,
    Plus,
    Minus,
    RefOp,   // =<
    ARefOp,  // =<<
    MutOp,   // ~~
    FatArrow,
    Turnstile,  // |-
    Prime,
    End,
};

struct Token {
    Tok kind;
    std::string text;
    int line, col;
};

struct UniAlias {
    const char* utf8;
    Tok kind;
    const char* text;
};

// Unicode accepted on input only; the printers emit ASCII.
const UniAlias kAliases[] = {
    {"∪", Tok::PlusPlus, "++"}, {"∧", Tok::Amp, "&"},     {"∨", Tok::Bar, "|"},
    {"→", Tok::Arrow, "->"},    {"¬", Tok::Bang, "!"},    {"≤", Tok::LeOp, "<="},
    {"≥", Tok::GeOp, ">="},     {"≠", Tok::NeOp, "!="},   {"↔", Tok::IffOp, "<->"},
    {"⊢", Tok::Turnstile, "|-"}, {"⊑", Tok::RefOp, "=<"}, {"≅", Tok::MutOp, "~~"},
    {"⟨", Tok::LtOp, "<"},      {"⟩", Tok::GtOp, ">"},    {"·", Tok::Star, "*"},
};

std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    size_t i = 0;
    int line = 1, col = 1;
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (src[i + k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        i += n;
    };
    auto push = [&](Tok k, std::string text, size_t n) {
        out.push_back({k, std::move(text), line, col});
        advance(n);
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        bool aliased = false;
        for (const auto& a : kAliases) {
            size_t n = std::strlen(a.utf8);
            if (src.compare(i, n, a.utf8) == 0) {
                push(a.kind, a.text, n);
                aliased = true;
                break;
            }
        }
        if (aliased) continue;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
                ++j;
            bool primed = j < src.size() && src[j] == '\'';
            std::string name = src.substr(i, j - i);
            if (primed) {
                push(Tok::PrimedIdent, name, j - i + 1);
            } else {
                push(Tok::Ident, name, j - i);
            }
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            if (j < src.size() && (src[j] == '.' || src[j] == '/') && j + 1 < src.size() &&
                std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            push(Tok::Number, src.substr(i, j - i), j - i);
            continue;
        }
        auto two = [&](char a, char b) {
            return c == a && i + 1 < src.size() && src[i + 1] == b;
        };
        switch (c) {
            case '(': push(Tok::LParen, "(", 1); continue;
            case ')': push(Tok::RParen, ")", 1); continue;
            case '{': push(Tok::LBrace, "{", 1); continue;
            case '}': push(Tok::RBrace, "}", 1); continue;
            case '[': push(Tok::LBracket, "[", 1); continue;
            case ']': push(Tok::RBracket, "]", 1); continue;
            case ',': push(Tok::Comma, ",", 1); continue;
            case ';': push(Tok::Semi, ";", 1); continue;
            case '?': push(Tok::Question, "?", 1); continue;
            case '\'': push(Tok::Prime, "'", 1); continue;
            case '*': push(Tok::Star, "*", 1); continue;
            case '&': push(Tok::Amp, "&", 1); continue;
            default: break;
        }
        if (two(':', '=')) { push(Tok::Assign, ":=", 2); continue; }
        if (c == ':') { push(Tok::Colon, ":", 1); continue; }
        if (two('^', 'd')) {
            if (i + 2 < src.size() &&
                (std::isalnum(static_cast<unsigned char>(src[i + 2])) || src[i + 2] == '_'))
                throw ParseError(line, col, "expected ^d");
            push(Tok::CaretD, "^d", 2);
            continue;
        }
        if (two('+', '+')) { push(Tok::PlusPlus, "++", 2); continue; }
        if (c == '+') { push(Tok::Plus, "+", 1); continue; }
        if (two('-', '>')) { push(Tok::Arrow, "->", 2); continue; }
        if (c == '-') { push(Tok::Minus, "-", 1); continue; }
        if (two('|', '-')) { push(Tok::Turnstile, "|-", 2); continue; }
        if (c == '|') { push(Tok::Bar, "|", 1); continue; }
        if (two('!', '=')) { push(Tok::NeOp, "!=", 2); continue; }
        if (c == '!') { push(Tok::Bang, "!", 1); continue; }
        if (two('~', '~')) { push(Tok::MutOp, "~~", 2); continue; }
        if (c == '=') {
            if (i + 1 < src.size() && src[i + 1] == '<') {
                if (i + 2 < src.size() && src[i + 2] == '<') { push(Tok::ARefOp, "=<<", 3); continue; }
                push(Tok::RefOp, "=<", 2);
                continue;
            }
            if (i + 1 < src.size() && src[i + 1] == '>') { push(Tok::FatArrow, "=>", 2); continue; }
            push(Tok::EqOp, "=", 1);
            continue;
        }
        if (c == '<') {
            if (i + 2 < src.size() && src[i + 1] == '-' && src[i + 2] == '>') {
                push(Tok::IffOp, "<->", 3);
                continue;
            }
            if (i + 1 < src.size() && src[i + 1] == '=') { push(Tok::LeOp, "<=", 2); continue; }
            push(Tok::LtOp, "<", 1);
            continue;
        }
        if (c == '>') {
            if (i + 1 < src.size() && src[i + 1] == '=') { push(Tok::GeOp, ">=", 2); continue; }
            push(Tok::GtOp, ">", 1);
            continue;
        }
        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    out.push_back({Tok::End, "", line, col});
    return out;
}

class Parser {
public:
    Parser(std::string text, const SourceFile* env) : toks_(lex(text)), env_(env) {}

    TermPtr term_entry() {
        TermPtr t = term();
        expect_end();
        return t;
    }
    GamePtr game_entry() {
        GamePtr g = game();
        expect_end();
        return g;
    }
    FormulaPtr formula_entry() {
        FormulaPtr f = formula();
        expect_end();
        return f;
    }
    ProofPtr proof_entry() {
        ProofPtr p = proof();
        expect_end();
        return p;
    }
    DerivPtr deriv_entry() {
        DerivPtr d = deriv();
        expect_end();
        return d;
    }
    SourceFile file_entry();

private:
    std::vector<Token> toks_;
    size_t pos_ = 0;
    const SourceFile* env_;
    SourceFile own_;  // grows while parsing a file

    const Token& cur() const { return toks_[pos_]; }
    const Token& peek(size_t n = 1) const { return toks_[std::min(pos_ + n, toks_.size() - 1)]; }
    bool at(Tok k) const { return cur().kind == k; }
    bool at_kw(const char* kw) const { return at(Tok::Ident) && cur().text == kw; }
    Token take() { return toks_[pos_++]; }
    bool eat(Tok k) {
        if (!at(k)) return false;
        ++pos_;
        return true;
    }
    bool eat_kw(const char* kw) {
        if (!at_kw(kw)) return false;
        ++pos_;
        return true;
    }
    [[noreturn]] void fail(const std::string& expected) const {
        const Token& t = cur();
        throw ParseError(t.line, t.col,
                         "expected " + expected + ", found '" + (t.kind == Tok::End ? "end of input" : t.text) + "'");
    }
    void expect(Tok k, const char* what) {
        if (!eat(k)) fail(what);
    }
    void expect_end() {
        if (!at(Tok::End)) fail("end of input");
    }

    const SourceFile::Decl* lookup(const std::string& name, SourceFile::Decl::Kind kind) const {
        if (const auto* d = own_.find(name, kind)) return d;
        if (env_)
            if (const auto* d = env_->find(name, kind)) return d;
        return nullptr;
    }

    // ---- terms ----

    TermPtr term() {
        TermPtr t = product();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            bool minus = take().kind == Tok::Minus;
            TermPtr r = product();
            if (minus) {
                t = (r->kind == Term::Kind::Rational) ? mk_sum(t, mk_rat(-r->value)) : mk_sum(t, mk_product(mk_int(-1), r));
            } else {
                t = mk_sum(t, r);
            }
        }
        return t;
    }

    TermPtr product() {
        TermPtr t = term_unary();
        while (at(Tok::Star)) {
            take();
            t = mk_product(t, term_unary());
        }
        return t;
    }

    TermPtr term_unary() {
        if (eat(Tok::Minus)) {
            TermPtr t = term_unary();
            return mk_neg(t);
        }
        return term_atom();
    }

    TermPtr term_atom() {
        if (at(Tok::Number)) return mk_rat(Rational::parse(take().text));
        if (at(Tok::Ident)) return mk_var(base_var(take().text));
        if (at(Tok::PrimedIdent)) return mk_var(primed_var(take().text));
        if (eat(Tok::LParen)) {
            TermPtr t = term();
            expect(Tok::RParen, "')'");
            if (eat(Tok::Prime)) return mk_differential(t);
            return t;
        }
        fail("a term");
    }

    // ---- games ----

    GamePtr game() {
        GamePtr g = game_seq();
        if (eat(Tok::PlusPlus)) return mk_choice(g, game());
        return g;
    }

    GamePtr game_seq() {
        GamePtr g = game_postfix();
        if (eat(Tok::Semi)) return mk_seq(g, game_seq());
        return g;
    }

    GamePtr game_postfix() {
        GamePtr g = game_atom();
        for (;;) {
            if (eat(Tok::Star)) {
                g = mk_repeat(g);
            } else if (eat(Tok::CaretD)) {
                g = mk_dual(g);
            } else {
                break;
            }
        }
        return g;
    }

    VarId varid() {
        if (at(Tok::Ident)) return base_var(take().text);
        if (at(Tok::PrimedIdent)) return primed_var(take().text);
        fail("a variable");
    }

    GamePtr game_atom() {
        if (eat(Tok::Question)) return mk_test(formula());
        if (eat(Tok::LBrace)) {
            // ODE when a primed identifier is followed by '='
            if (at(Tok::PrimedIdent) && peek().kind == Tok::EqOp) {
                std::vector<OdeEquation> eqs;
                for (;;) {
                    if (!at(Tok::PrimedIdent)) fail("a primed variable");
                    VarId v = base_var(take().text);
                    expect(Tok::EqOp, "'='");
                    eqs.push_back({v, term()});
                    if (!eat(Tok::Comma)) break;
                }
                FormulaPtr cond = eat(Tok::Amp) ? formula() : mk_verum();
                expect(Tok::RBrace, "'}'");
                return mk_ode(std::move(eqs), std::move(cond));
            }
            GamePtr g = game();
            expect(Tok::RBrace, "'}'");
            return g;
        }
        if (at_kw("skip")) {
            take();
            return mk_skip();
        }
        if (at(Tok::Ident) || at(Tok::PrimedIdent)) {
            if (peek().kind == Tok::Assign) {
                VarId v = varid();
                take();  // :=
                if (eat(Tok::Star)) return mk_nondet(v);
                return mk_assign(v, term());
            }
            if (at(Tok::Ident)) {
                if (const auto* d = lookup(cur().text, SourceFile::Decl::Kind::Game)) {
                    take();
                    return d->game;
                }
            }
            fail("a game (unknown name '" + cur().text + "')");
        }
        fail("a game");
    }

    // ---- formulas ----

    std::optional<unsigned> opt_rank() {
        if (!eat(Tok::LBracket)) return std::nullopt;
        if (!at(Tok::Number)) fail("a rank");
        Rational r = Rational::parse(take().text);
        expect(Tok::RBracket, "']'");
        long long v;
        if (!r.is_integer() || !r.num().fits_longlong(v) || v < 0) fail("a natural rank");
        return static_cast<unsigned>(v);
    }

    FormulaPtr formula() { return formula_iff(); }

    FormulaPtr formula_iff() {
        FormulaPtr f = formula_imp();
        while (eat(Tok::IffOp)) f = mk_iff(f, formula_imp());
        return f;
    }

    FormulaPtr formula_imp() {
        FormulaPtr f = formula_or();
        if (eat(Tok::Arrow)) return mk_imp(f, formula_imp());
        return f;
    }

    FormulaPtr formula_or() {
        FormulaPtr f = formula_and();
        while (eat(Tok::Bar)) f = mk_or(f, formula_and());
        return f;
    }

    FormulaPtr formula_and() {
        FormulaPtr f = formula_unary();
        while (eat(Tok::Amp)) f = mk_and(f, formula_unary());
        return f;
    }

    static CompareOp cmp_of(Tok k) {
        switch (k) {
            case Tok::LeOp: return CompareOp::Le;
            case Tok::LtOp: return CompareOp::Lt;
            case Tok::EqOp: return CompareOp::Eq;
            case Tok::NeOp: return CompareOp::Ne;
            case Tok::GtOp: return CompareOp::Gt;
            case Tok::GeOp: return CompareOp::Ge;
            default: return CompareOp::Eq;
        }
    }

    static bool is_cmp(Tok k) {
        return k == Tok::LeOp || k == Tok::LtOp || k == Tok::EqOp || k == Tok::NeOp ||
               k == Tok::GtOp || k == Tok::GeOp;
    }

    FormulaPtr formula_unary() {
        if (eat(Tok::Bang)) return mk_not(formula_unary());
        if (eat_kw("forall")) {
            VarId v = varid();
            return mk_forall(v, formula_unary());
        }
        if (eat_kw("exists")) {
            VarId v = varid();
            return mk_exists(v, formula_unary());
        }
        if (at(Tok::LBracket)) {
            take();
            GamePtr g = game();
            expect(Tok::RBracket, "']'");
            return mk_box(g, formula_unary());
        }
        if (at(Tok::LtOp)) {
            take();
            GamePtr g = game();
            expect(Tok::GtOp, "'>'");
            return mk_diamond(g, formula_unary());
        }
        return formula_atom();
    }

    FormulaPtr formula_atom() {
        if (eat_kw("true")) return mk_verum();
        if (eat_kw("false")) return mk_falsum();
        // comparison chain?
        {
            size_t save = pos_;
            try {
                TermPtr t = term();
                if (is_cmp(cur().kind)) {
                    std::vector<FormulaPtr> parts;
                    while (is_cmp(cur().kind)) {
                        CompareOp op = cmp_of(take().kind);
                        TermPtr r = term();
                        parts.push_back(mk_compare(op, t, r));
                        t = r;
                    }
                    FormulaPtr f = parts[0];
                    for (size_t k = 1; k < parts.size(); ++k) f = mk_and(f, parts[k]);
                    return f;
                }
            } catch (const ParseError&) {
            }
            pos_ = save;
        }
        // refinement?
        {
            size_t save = pos_;
            try {
                GamePtr l = game();
                if (at(Tok::RefOp) || at(Tok::ARefOp) || at(Tok::MutOp)) {
                    Tok op = take().kind;
                    std::optional<unsigned> rank = opt_rank();
                    GamePtr r = game();
                    if (op == Tok::RefOp) return mk_refine(rank, l, r);
                    if (op == Tok::ARefOp) return mk_arefine(rank, l, r);
                    return mk_and(mk_refine(rank, l, r), mk_refine(rank, r, l));
                }
            } catch (const ParseError&) {
            }
            pos_ = save;
        }
        if (eat(Tok::LParen)) {
            FormulaPtr f = formula();
            expect(Tok::RParen, "')'");
            return f;
        }
        if (at(Tok::Ident)) {
            if (const auto* d = lookup(cur().text, SourceFile::Decl::Kind::Formula)) {
                take();
                return d->formula;
            }
        }
        fail("a formula");
    }

    // ---- proof terms ----

    std::string binder_name() {
        if (!at(Tok::Ident)) fail("a hypothesis label");
        return take().text;
    }

    ProofPtr proof() {
        if (eat(Tok::LParen)) {
            ProofPtr m = proof();
            if (eat(Tok::Comma)) {
                std::vector<ProofPtr> parts{m};
                do {
                    parts.push_back(proof());
                } while (eat(Tok::Comma));
                expect(Tok::RParen, "')'");
                ProofPtr acc = parts.back();
                for (size_t i = parts.size() - 1; i-- > 0;) acc = p_pair(parts[i], acc);
                return acc;
            }
            expect(Tok::RParen, "')'");
            return m;
        }
        if (!at(Tok::Ident)) fail("a proof term");
        std::string head = cur().text;
        if (head == "triv") {
            take();
            return p_triv();
        }
        if (peek().kind != Tok::LParen && head != "boxref" && head != "dref") {
            // plain hypothesis reference, or a named proof from the file
            if (const auto* d = lookup(head, SourceFile::Decl::Kind::Proof)) {
                take();
                return d->proof.proof;
            }
            take();
            return p_hyp(head);
        }
        take();
        std::optional<unsigned> rank;
        if (head == "boxref" || head == "dref") rank = opt_rank();
        expect(Tok::LParen, "'('");
        auto comma = [&] { expect(Tok::Comma, "','"); };
        ProofPtr out;
        if (head == "injL") out = p_injl(proof());
        else if (head == "injR") out = p_injr(proof());
        else if (head == "stop") out = p_stop(proof());
        else if (head == "go") out = p_go(proof());
        else if (head == "seq") out = p_seqi(proof());
        else if (head == "dual") out = p_duali(proof());
        else if (head == "seqE") out = p_seqe(proof());
        else if (head == "dualE") out = p_duale(proof());
        else if (head == "asgnE") out = p_assigne(proof());
        else if (head == "projL") out = p_projl(proof());
        else if (head == "projR") out = p_projr(proof());
        else if (head == "dw") out = p_dw(proof());
        else if (head == "case" || head == "repcase" || head == "fp") {
            ProofPtr scrut = proof();
            comma();
            std::string lb = binder_name();
            expect(Tok::FatArrow, "'=>'");
            ProofPtr l = proof();
            comma();
            std::string rb = binder_name();
            expect(Tok::FatArrow, "'=>'");
            ProofPtr r = proof();
            out = head == "case"      ? p_case(scrut, lb, l, rb, r)
                  : head == "repcase" ? p_repcase(scrut, lb, l, rb, r)
                                      : p_fp(scrut, lb, l, rb, r);
        } else if (head == "lam") {
            std::string name = binder_name();
            expect(Tok::Colon, "':'");
            if (at_kw("R") && peek().kind == Tok::Comma) {
                take();
                comma();
                out = p_lam_real(base_var(name), proof());
            } else if (at(Tok::Ident) && cur().text == "_" && peek().kind == Tok::Comma) {
                take();
                comma();
                out = p_lam(name, nullptr, proof());
            } else {
                FormulaPtr hyp = formula();
                comma();
                out = p_lam(name, hyp, proof());
            }
        } else if (head == "lamv") {
            VarId v = varid();
            comma();
            out = p_lam_real(v, proof());
        } else if (head == "asgn") {
            VarId ghost = varid();
            comma();
            VarId target = varid();
            comma();
            std::string b = binder_name();
            comma();
            out = p_assign(ghost, target, b, proof());
        } else if (head == "wit") {
            TermPtr f = term();
            comma();
            VarId ghost = varid();
            comma();
            std::string b = binder_name();
            comma();
            out = p_dassign(f, ghost, b, proof());
        } else if (head == "rep") {
            ProofPtr base = proof();
            comma();
            FormulaPtr inv = formula();
            comma();
            std::string sb = binder_name();
            expect(Tok::FatArrow, "'=>'");
            ProofPtr step = proof();
            comma();
            std::string pb = binder_name();
            expect(Tok::FatArrow, "'=>'");
            ProofPtr post = proof();
            out = p_rep(base, inv, sb, step, pb, post);
        } else if (head == "for") {
            VarId m0 = varid();
            comma();
            if (!at(Tok::Number)) fail("a positive rational bound");
            Rational eps = Rational::parse(take().text);
            comma();
            TermPtr metric = term();
            comma();
            FormulaPtr variant = formula();
            comma();
            ProofPtr base = proof();
            comma();
            expect(Tok::LParen, "'('");
            std::string pb = binder_name();
            comma();
            std::string qb = binder_name();
            expect(Tok::RParen, "')'");
            expect(Tok::FatArrow, "'=>'");
            ProofPtr step = proof();
            comma();
            ProofPtr post = proof();
            out = p_for(m0, eps, metric, variant, base, pb, qb, step, post);
        } else if (head == "app") {
            ProofPtr fn = proof();
            comma();
            out = p_app(fn, proof());
        } else if (head == "appt") {
            ProofPtr fn = proof();
            comma();
            out = p_appt(fn, term());
        } else if (head == "unpack") {
            ProofPtr packed = proof();
            comma();
            VarId y = varid();
            comma();
            std::string b = binder_name();
            expect(Tok::FatArrow, "'=>'");
            out = p_unpack(packed, y, b, proof());
        } else if (head == "qe" || head == "dec") {
            FormulaPtr target = formula();
            comma();
            ProofPtr m = proof();
            out = head == "qe" ? p_qe(target, m) : p_dec(target, m);
        } else if (head == "split") {
            TermPtr l = term();
            comma();
            TermPtr r = term();
            comma();
            out = p_split(l, r, proof());
        } else if (head == "ghost") {
            VarId v = varid();
            comma();
            TermPtr f = term();
            comma();
            std::string b = binder_name();
            expect(Tok::FatArrow, "'=>'");
            out = p_ghost(v, f, b, proof());
        } else if (head == "mon") {
            ProofPtr main = proof();
            comma();
            if (at(Tok::Ident) && peek().kind == Tok::FatArrow) {
                std::string b = binder_name();
                expect(Tok::FatArrow, "'=>'");
                out = p_mon(main, b, proof());
            } else {
                FormulaPtr mainF = formula();
                comma();
                std::string b = binder_name();
                expect(Tok::FatArrow, "'=>'");
                out = p_mon_at(main, mainF, b, proof());
            }
        } else if (head == "di") {
            ProofPtr a = proof();
            comma();
            out = p_di(a, proof());
        } else if (head == "dc") {
            FormulaPtr cut = formula();
            comma();
            ProofPtr show = proof();
            comma();
            out = p_dc(cut, show, proof());
        } else if (head == "dg") {
            VarId y = varid();
            comma();
            TermPtr y0 = term();
            comma();
            TermPtr a = term();
            comma();
            TermPtr b = term();
            comma();
            out = p_dg(y, y0, a, b, proof());
        } else if (head == "bsolve") {
            auto slns = solution_list();
            comma();
            out = p_bsolve(slns, proof());
        } else if (head == "dsolve") {
            TermPtr d = term();
            comma();
            auto slns = solution_list();
            comma();
            ProofPtr dom = proof();
            comma();
            out = p_dsolve(d, slns, dom, proof());
        } else if (head == "boxref" || head == "dref") {
            GamePtr alpha = game();
            comma();
            ProofPtr main = proof();
            comma();
            DerivPtr d = deriv();
            out = head == "boxref" ? p_boxref(rank, alpha, main, d) : p_dref(rank, alpha, main, d);
        } else if (head == "byref") {
            out = p_byref(deriv());
        } else {
            fail("a proof constructor");
        }
        expect(Tok::RParen, "')'");
        return out;
    }

    std::vector<std::pair<VarId, TermPtr>> solution_list() {
        expect(Tok::LBracket, "'['");
        std::vector<std::pair<VarId, TermPtr>> slns;
        do {
            VarId v = varid();
            expect(Tok::EqOp, "'='");
            slns.emplace_back(v, term());
        } while (eat(Tok::Comma));
        expect(Tok::RBracket, "']'");
        return slns;
    }

    // ---- derivations ----

    DerivPtr deriv() {
        if (eat(Tok::LParen)) {
            DerivPtr d = deriv();
            expect(Tok::RParen, "')'");
            return d;
        }
        if (!at(Tok::Ident)) fail("a refinement rule");
        std::string head = take().text;
        static const std::map<std::string, RuleName> nullary = {
            {"refl", RuleName::RefRefl},         {"arefRand", RuleName::ArefRand},
            {"drefRand", RuleName::DrefRand},    {"choiceL1", RuleName::RefChoiceL1},
            {"choiceL2", RuleName::RefChoiceL2}, {"achoiceR1", RuleName::ArefChoiceR1},
            {"achoiceR2", RuleName::ArefChoiceR2}, {"unrollL", RuleName::UnrollL},
            {"dualSkip", RuleName::DualSkip},    {"dualSeq", RuleName::DualSeq},
            {"dualAssign", RuleName::DualAssign}, {"dualDNE", RuleName::DualDNE},
            {"seqIdL", RuleName::SeqIdL},        {"seqIdR", RuleName::SeqIdR},
            {"annihL", RuleName::AnnihL},        {"nopAssign", RuleName::NopAssign},
            {"seqDistR", RuleName::SeqDistR},    {"seqAssoc", RuleName::SeqAssoc},
            {"assignCancel", RuleName::AssignCancel}, {"choiceAssoc", RuleName::ChoiceAssoc},
            {"choiceComm", RuleName::ChoiceComm}, {"choiceIdem", RuleName::ChoiceIdem},
            {"dwRef", RuleName::RefDW},          {"dgRef", RuleName::RefDG},
            {"sysK", RuleName::SysK},            {"sysKd", RuleName::SysKd},
            {"sysBoxAnd", RuleName::SysBoxAnd},
        };
        auto n = nullary.find(head);
        if (n != nullary.end()) {
            if (const auto* d = lookup(head, SourceFile::Decl::Kind::Derivation)) (void)d;
            return d_rule(n->second);
        }
        if (head != "boxref" && head != "dref") {
            if (const auto* d = lookup(head, SourceFile::Decl::Kind::Derivation)) {
                if (!at(Tok::LParen)) return d->deriv.deriv;
            }
        }
        std::optional<unsigned> rank;
        if (head == "boxref" || head == "dref") rank = opt_rank();
        expect(Tok::LParen, "'('");
        auto comma = [&] { expect(Tok::Comma, "','"); };
        DerivPtr out;
        if (head == "arefTest") out = d_rule(RuleName::ArefTest, {}, {proof()});
        else if (head == "drefTest") out = d_rule(RuleName::DrefTest, {}, {proof()});
        else if (head == "unloop") out = d_rule(RuleName::RefUnloop, {}, {proof()});
        else if (head == "dcRef") out = d_rule(RuleName::RefDC, {}, {proof()});
        else if (head == "sol") {
            ProofPtr p1 = proof();
            comma();
            ProofPtr p2 = proof();
            comma();
            ProofPtr p3 = proof();
            out = d_rule(RuleName::RefSolve, {}, {p1, p2, p3});
        }
        else if (head == "choiceR" || head == "achoiceL" || head == "seqG") {
            DerivPtr a = deriv();
            comma();
            DerivPtr b = deriv();
            RuleName r = head == "choiceR"    ? RuleName::RefChoiceR
                         : head == "achoiceL" ? RuleName::ArefChoiceL
                                              : RuleName::RefSeqG;
            out = d_rule(r, {a, b});
        } else if (head == "trans") {
            GamePtr mid = game();
            comma();
            DerivPtr a = deriv();
            comma();
            DerivPtr b = deriv();
            out = d_trans(mid, a, b);
        } else if (head == "seqS") {
            DerivPtr a = deriv();
            comma();
            ProofPtr p = proof();
            out = d_rule(RuleName::RefSeq, {a}, {p});
        } else if (head == "loopInline") {
            FormulaPtr inv = formula();
            comma();
            VarId m0 = varid();
            comma();
            if (!at(Tok::Number)) fail("a positive rational bound");
            TermPtr eps = mk_rat(Rational::parse(take().text));
            comma();
            std::string invL = binder_name();
            comma();
            std::string decL = binder_name();
            comma();
            ProofPtr base = proof();
            comma();
            ProofPtr step = proof();
            comma();
            DerivPtr body = deriv();
            comma();
            ProofPtr transfer = proof();
            out = d_loop_inline(inv, m0, eps, invL, decL, base, step, body, transfer);
        } else if (head == "boxref" || head == "dref") {
            GamePtr alpha = game();
            comma();
            ProofPtr main = proof();
            comma();
            DerivPtr d = deriv();
            out = head == "boxref" ? d_boxref(rank, alpha, main, d) : d_dref(rank, alpha, main, d);
        } else {
            fail("a refinement rule");
        }
        expect(Tok::RParen, "')'");
        return out;
    }

    // ---- files ----

    Context sequent_ctx() {
        Context ctx;
        if (at(Tok::Turnstile)) return ctx;
        do {
            std::string label = binder_name();
            expect(Tok::Colon, "':'");
            FormulaPtr f = formula();
            if (ctx.has_label(label)) fail("a distinct hypothesis label ('" + label + "' reused)");
            ctx.items.push_back({label, f});
        } while (eat(Tok::Comma));
        return ctx;
    }
};

SourceFile Parser::file_entry() {
    while (!at(Tok::End)) {
        SourceFile::Decl decl;
        if (eat_kw("game")) {
            decl.kind = SourceFile::Decl::Kind::Game;
            decl.name = binder_name();
            expect(Tok::Assign, "':='");
            decl.game = game();
        } else if (eat_kw("formula")) {
            decl.kind = SourceFile::Decl::Kind::Formula;
            decl.name = binder_name();
            expect(Tok::Assign, "':='");
            decl.formula = formula();
        } else if (eat_kw("proof")) {
            decl.kind = SourceFile::Decl::Kind::Proof;
            decl.name = binder_name();
            expect(Tok::Colon, "':'");
            decl.proof.ctx = sequent_ctx();
            expect(Tok::Turnstile, "'|-'");
            decl.proof.goal = formula();
            expect(Tok::Assign, "':='");
            decl.proof.proof = proof();
        } else if (eat_kw("derivation")) {
            decl.kind = SourceFile::Decl::Kind::Derivation;
            decl.name = binder_name();
            expect(Tok::Colon, "':'");
            decl.deriv.ctx = sequent_ctx();
            expect(Tok::Turnstile, "'|-'");
            decl.deriv.goal = formula();
            expect(Tok::Assign, "':='");
            decl.deriv.deriv = deriv();
        } else {
            fail("a declaration (game, formula, proof, derivation)");
        }
        if (own_.find(decl.name)) fail("a fresh declaration name ('" + decl.name + "' reused)");
        own_.decls.push_back(std::move(decl));
    }
    return std::move(own_);
}

}  // namespace

const SourceFile::Decl* SourceFile::find(const std::string& name) const {
    for (const auto& d : decls)
        if (d.name == name) return &d;
    return nullptr;
}

const SourceFile::Decl* SourceFile::find(const std::string& name, Decl::Kind kind) const {
    const Decl* d = find(name);
    return d && d->kind == kind ? d : nullptr;
}

TermPtr parse_term(const std::string& text, const SourceFile* env) {
    return Parser(text, env).term_entry();
}

GamePtr parse_game(const std::string& text, const SourceFile* env) {
    return Parser(text, env).game_entry();
}

FormulaPtr parse_formula(const std::string& text, const SourceFile* env) {
    return Parser(text, env).formula_entry();
}

ProofPtr parse_proof_term(const std::string& text, const SourceFile* env) {
    return Parser(text, env).proof_entry();
}

DerivPtr parse_derivation(const std::string& text, const SourceFile* env) {
    return Parser(text, env).deriv_entry();
}

SourceFile parse_file(const std::string& text) { return Parser(text, nullptr).file_entry(); }

}  // namespace cdgl
