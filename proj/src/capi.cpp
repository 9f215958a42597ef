#include "cdgl/cdgl.h"

#include <cstring>
#include <fstream>
#include <sstream>

#include "core/inliner.hpp"
#include "core/kernel.hpp"
#include "core/sim.hpp"
#include "core/surface.hpp"

using namespace cdgl;

struct cdgl_source {
    SourceFile file;
};

struct cdgl_report {
    CheckReport report;
};

namespace {

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void set_error(char** error, const std::string& msg) {
    if (error) *error = dup_string(msg);
}

template <typename Fn>
cdgl_status guarded(char** error, Fn&& fn) {
    try {
        return fn();
    } catch (const ParseError& e) {
        set_error(error, e.what());
        return CDGL_PARSE_ERROR;
    } catch (const NotNormalForm& e) {
        set_error(error, std::string("not in normal shape: ") + e.what());
        return CDGL_REJECTED;
    } catch (const NotSystemTest& e) {
        set_error(error, std::string("outside the system-test fragment: ") + e.what());
        return CDGL_REJECTED;
    } catch (const std::exception& e) {
        set_error(error, e.what());
        return CDGL_ERROR;
    }
}

const SourceFile::Decl* need(const cdgl_source* src, const char* name,
                             SourceFile::Decl::Kind kind, const char* what, char** error) {
    if (!src || !name) {
        set_error(error, "null argument");
        return nullptr;
    }
    const SourceFile::Decl* d = src->file.find(name, kind);
    if (!d) set_error(error, std::string("no ") + what + " named " + name);
    return d;
}

}  // namespace

extern "C" {

const char* cdgl_version(void) { return "cdgl 0.1.0"; }

void cdgl_string_free(char* s) { std::free(s); }

cdgl_status cdgl_parse_string(const char* text, cdgl_source** out, char** error) {
    if (!text || !out) {
        set_error(error, "null argument");
        return CDGL_USAGE;
    }
    return guarded(error, [&] {
        auto* src = new cdgl_source{parse_file(text)};
        *out = src;
        return CDGL_OK;
    });
}

cdgl_status cdgl_parse_file(const char* path, cdgl_source** out, char** error) {
    if (!path || !out) {
        set_error(error, "null argument");
        return CDGL_USAGE;
    }
    std::ifstream in(path);
    if (!in.good()) {
        set_error(error, std::string("cannot open ") + path);
        return CDGL_ERROR;
    }
    std::ostringstream os;
    os << in.rdbuf();
    std::string text = os.str();
    return cdgl_parse_string(text.c_str(), out, error);
}

void cdgl_source_free(cdgl_source* src) { delete src; }

cdgl_status cdgl_check_proof(const cdgl_source* src, const char* proof_name, cdgl_report** out,
                             char** error) {
    const auto* d = need(src, proof_name, SourceFile::Decl::Kind::Proof, "proof", error);
    if (!d) return CDGL_USAGE;
    if (!out) {
        set_error(error, "null report out-pointer");
        return CDGL_USAGE;
    }
    return guarded(error, [&] {
        auto* r = new cdgl_report{check_proof(d->proof.ctx, d->proof.proof, d->proof.goal)};
        *out = r;
        return r->report.accepted ? CDGL_OK : CDGL_REJECTED;
    });
}

cdgl_status cdgl_check_derivation(const cdgl_source* src, const char* derivation_name,
                                  cdgl_report** out, char** error) {
    const auto* d =
        need(src, derivation_name, SourceFile::Decl::Kind::Derivation, "derivation", error);
    if (!d) return CDGL_USAGE;
    if (!out) {
        set_error(error, "null report out-pointer");
        return CDGL_USAGE;
    }
    return guarded(error, [&] {
        auto* r = new cdgl_report{check_refinement(d->deriv.ctx, d->deriv.deriv, d->deriv.goal)};
        *out = r;
        return r->report.accepted ? CDGL_OK : CDGL_REJECTED;
    });
}

int cdgl_report_accepted(const cdgl_report* r) { return r && r->report.accepted ? 1 : 0; }

int cdgl_report_assumed(const cdgl_report* r) { return r ? r->report.assumed_count() : 0; }

char* cdgl_report_text(const cdgl_report* r) {
    return r ? dup_string(r->report.render()) : nullptr;
}

void cdgl_report_free(cdgl_report* r) { delete r; }

cdgl_status cdgl_inline_proof(const cdgl_source* src, const char* proof_name, int emit_transfer,
                              int emit_refinement, char** out_text, char** error) {
    const auto* d = need(src, proof_name, SourceFile::Decl::Kind::Proof, "proof", error);
    if (!d) return CDGL_USAGE;
    if (!out_text) {
        set_error(error, "null out-pointer");
        return CDGL_USAGE;
    }
    return guarded(error, [&] {
        NormalShapeProof shape = to_normal_shape(d->proof.ctx, d->proof.proof, d->proof.goal);
        SourceFile outFile;
        std::string base = proof_name;
        SourceFile::Decl g;
        g.kind = SourceFile::Decl::Kind::Game;
        g.name = base + "_inlined";
        g.game = shape.inlined;
        outFile.decls.push_back(g);
        if (emit_transfer) {
            SourceFile::Decl p;
            p.kind = SourceFile::Decl::Kind::Proof;
            p.name = base + "_transfer";
            p.proof = ProofDecl{shape.ctx, mk_box(shape.inlined, shape.post),
                                synthesize_transfer(shape)};
            outFile.decls.push_back(p);
        }
        if (emit_refinement) {
            SourceFile::Decl dd;
            dd.kind = SourceFile::Decl::Kind::Derivation;
            dd.name = base + "_refinement";
            dd.deriv = DerivDecl{shape.ctx,
                                 mk_refine(std::nullopt, shape.inlined, shape.source_game),
                                 synthesize_refinement(shape)};
            outFile.decls.push_back(dd);
        }
        *out_text = dup_string(pretty(outFile));
        return CDGL_OK;
    });
}

cdgl_status cdgl_format(const cdgl_source* src, char** out_text, char** error) {
    if (!src || !out_text) {
        set_error(error, "null argument");
        return CDGL_USAGE;
    }
    return guarded(error, [&] {
        *out_text = dup_string(pretty(src->file));
        return CDGL_OK;
    });
}

cdgl_status cdgl_simulate(const cdgl_source* src, const char* system_name, const char* init_text,
                          const char* script_text, const char* post_formula, int force_rk4,
                          char** out_trace, char** error) {
    const auto* d = need(src, system_name, SourceFile::Decl::Kind::Game, "game", error);
    if (!d) return CDGL_USAGE;
    if (!init_text || !script_text || !post_formula || !out_trace) {
        set_error(error, "null argument");
        return CDGL_USAGE;
    }
    return guarded(error, [&] {
        SimState init = parse_init(init_text);
        DemonScript script = parse_script(script_text);
        FormulaPtr post = parse_formula(post_formula, &src->file);
        SimOptions opts;
        opts.force_rk4 = force_rk4 != 0;
        Trace t = run_system(d->game, init, script, post, opts);
        *out_trace = dup_string(render_trace(t));
        return t.verdict == Trace::Verdict::PostconditionHolds ? CDGL_OK : CDGL_REJECTED;
    });
}

}  // extern "C"
