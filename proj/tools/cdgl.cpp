// cdgl: check, refine, inline, simulate and format .cdgl files.
// Talks to the shared library exclusively through the public C interface.

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cdgl/cdgl.h"

namespace {

bool color_enabled() {
    const char* c = std::getenv("CDGL_COLOR");
    return c && std::strcmp(c, "1") == 0;
}

void diag(const std::string& msg) {
    if (color_enabled())
        std::cerr << "\033[31m" << msg << "\033[0m\n";
    else
        std::cerr << msg << "\n";
}

int usage() {
    std::cerr << "usage:\n"
              << "  cdgl check FILE --proof NAME [--allow-assumed]\n"
              << "  cdgl refine FILE --derivation NAME [--allow-assumed]\n"
              << "  cdgl inline FILE --proof NAME [--emit-transfer] [--emit-refinement]\n"
              << "  cdgl simulate FILE --system NAME --init FILE --script FILE --post FORMULA\n"
              << "                [--force-rk4]\n"
              << "  cdgl fmt FILE\n";
    return 2;
}

struct Args {
    std::string command, file;
    std::string proof, derivation, system, init, script, post;
    bool allow_assumed = false, emit_transfer = false, emit_refinement = false,
         force_rk4 = false;
};

bool parse_args(int argc, char** argv, Args& a) {
    if (argc < 3) return false;
    a.command = argv[1];
    a.file = argv[2];
    for (int i = 3; i < argc; ++i) {
        std::string s = argv[i];
        auto next = [&](std::string& slot) {
            if (i + 1 >= argc) return false;
            slot = argv[++i];
            return true;
        };
        if (s == "--proof") {
            if (!next(a.proof)) return false;
        } else if (s == "--derivation") {
            if (!next(a.derivation)) return false;
        } else if (s == "--system") {
            if (!next(a.system)) return false;
        } else if (s == "--init") {
            if (!next(a.init)) return false;
        } else if (s == "--script") {
            if (!next(a.script)) return false;
        } else if (s == "--post") {
            if (!next(a.post)) return false;
        } else if (s == "--allow-assumed") {
            a.allow_assumed = true;
        } else if (s == "--emit-transfer") {
            a.emit_transfer = true;
        } else if (s == "--emit-refinement") {
            a.emit_refinement = true;
        } else if (s == "--force-rk4") {
            a.force_rk4 = true;
        } else {
            return false;
        }
    }
    return true;
}

bool slurp(const std::string& path, std::string& out) {
    std::ifstream in(path);
    if (!in.good()) return false;
    std::ostringstream os;
    os << in.rdbuf();
    out = os.str();
    return true;
}

int from_status(cdgl_status st, char* error) {
    if (error) {
        diag(error);
        cdgl_string_free(error);
    }
    switch (st) {
        case CDGL_OK: return 0;
        case CDGL_REJECTED: return 1;
        case CDGL_USAGE: return 2;
        case CDGL_PARSE_ERROR: return 3;
        default: return 4;
    }
}

int run_check(const Args& a, cdgl_source* src, bool derivation) {
    cdgl_report* report = nullptr;
    char* error = nullptr;
    cdgl_status st =
        derivation ? cdgl_check_derivation(src, a.derivation.c_str(), &report, &error)
                   : cdgl_check_proof(src, a.proof.c_str(), &report, &error);
    if (st != CDGL_OK && st != CDGL_REJECTED) return from_status(st, error);
    if (error) {
        diag(error);
        cdgl_string_free(error);
    }
    char* text = cdgl_report_text(report);
    std::cout << text;
    cdgl_string_free(text);
    int assumed = cdgl_report_assumed(report);
    bool accepted = cdgl_report_accepted(report) != 0;
    cdgl_report_free(report);
    if (!accepted) return 1;
    if (assumed > 0 && !a.allow_assumed) return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Args a;
    if (!parse_args(argc, argv, a)) return usage();

    cdgl_source* src = nullptr;
    char* error = nullptr;
    cdgl_status st = cdgl_parse_file(a.file.c_str(), &src, &error);
    if (st != CDGL_OK) return from_status(st, error);

    int rc = 2;
    if (a.command == "check" && !a.proof.empty()) {
        rc = run_check(a, src, false);
    } else if (a.command == "refine" && !a.derivation.empty()) {
        rc = run_check(a, src, true);
    } else if (a.command == "inline" && !a.proof.empty()) {
        char* text = nullptr;
        st = cdgl_inline_proof(src, a.proof.c_str(), a.emit_transfer ? 1 : 0,
                               a.emit_refinement ? 1 : 0, &text, &error);
        if (st == CDGL_OK) {
            std::cout << text;
            cdgl_string_free(text);
            rc = 0;
        } else {
            rc = from_status(st, error);
        }
    } else if (a.command == "simulate" && !a.system.empty() && !a.init.empty() &&
               !a.script.empty() && !a.post.empty()) {
        std::string initText, scriptText;
        if (!slurp(a.init, initText) || !slurp(a.script, scriptText)) {
            diag("cannot read --init or --script file");
            rc = 2;
        } else {
            char* trace = nullptr;
            st = cdgl_simulate(src, a.system.c_str(), initText.c_str(), scriptText.c_str(),
                               a.post.c_str(), a.force_rk4 ? 1 : 0, &trace, &error);
            if (st == CDGL_OK || st == CDGL_REJECTED) {
                if (trace) {
                    std::cout << trace;
                    cdgl_string_free(trace);
                }
                if (error) {
                    diag(error);
                    cdgl_string_free(error);
                }
                rc = st == CDGL_OK ? 0 : 1;
            } else {
                rc = from_status(st, error);
            }
        }
    } else if (a.command == "fmt") {
        char* text = nullptr;
        st = cdgl_format(src, &text, &error);
        if (st == CDGL_OK) {
            std::cout << text;
            cdgl_string_free(text);
            rc = 0;
        } else {
            rc = from_status(st, error);
        }
    } else {
        cdgl_source_free(src);
        return usage();
    }
    cdgl_source_free(src);
    return rc;
}
