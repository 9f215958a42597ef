// Exercises the shared-library surface the way an external client would:
// strings in, opaque handles, status codes, no core headers.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "cdgl/cdgl.h"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Source {
    cdgl_source* ptr = nullptr;
    ~Source() { cdgl_source_free(ptr); }
};

}  // namespace

TEST_CASE("parse errors carry positions and the right status") {
    Source src;
    char* error = nullptr;
    cdgl_status st = cdgl_parse_string("game g := x :=", &src.ptr, &error);
    CHECK(st == CDGL_PARSE_ERROR);
    REQUIRE(error != nullptr);
    CHECK(std::string(error).find("1:") != std::string::npos);
    cdgl_string_free(error);

    CHECK(cdgl_parse_string(nullptr, &src.ptr, &error) == CDGL_USAGE);
}

TEST_CASE("check accepts the shipped push-pull proof") {
    Source src;
    char* error = nullptr;
    REQUIRE(cdgl_parse_file((std::string(SOURCE_DIR) + "/pp.cdgl").c_str(), &src.ptr, &error) ==
            CDGL_OK);
    cdgl_report* report = nullptr;
    CHECK(cdgl_check_proof(src.ptr, "ppSafe", &report, &error) == CDGL_OK);
    REQUIRE(report != nullptr);
    CHECK(cdgl_report_accepted(report) == 1);
    CHECK(cdgl_report_assumed(report) == 0);
    char* text = cdgl_report_text(report);
    CHECK(std::string(text).find("VERDICT ACCEPTED 0") != std::string::npos);
    cdgl_string_free(text);
    cdgl_report_free(report);

    // unknown names are usage errors
    CHECK(cdgl_check_proof(src.ptr, "nope", &report, &error) == CDGL_USAGE);
    if (error) cdgl_string_free(error);
}

TEST_CASE("rejected proofs report their reason") {
    Source src;
    char* error = nullptr;
    REQUIRE(cdgl_parse_string("proof bad : |- [x := 1] x = 2 := asgn(y, x, p, qe(x = 2, p))",
                              &src.ptr, &error) == CDGL_OK);
    cdgl_report* report = nullptr;
    CHECK(cdgl_check_proof(src.ptr, "bad", &report, &error) == CDGL_REJECTED);
    REQUIRE(report != nullptr);
    CHECK(cdgl_report_accepted(report) == 0);
    char* text = cdgl_report_text(report);
    CHECK(std::string(text).find("VERDICT REJECTED") != std::string::npos);
    cdgl_string_free(text);
    cdgl_report_free(report);
}

TEST_CASE("inline emits self-contained artifacts") {
    Source src;
    char* error = nullptr;
    REQUIRE(cdgl_parse_file((std::string(SOURCE_DIR) + "/pp.cdgl").c_str(), &src.ptr, &error) ==
            CDGL_OK);
    char* text = nullptr;
    REQUIRE(cdgl_inline_proof(src.ptr, "ppSafe", 1, 1, &text, &error) == CDGL_OK);
    std::string emitted = text;
    cdgl_string_free(text);
    CHECK(emitted.find("game ppSafe_inlined") != std::string::npos);
    CHECK(emitted.find("proof ppSafe_transfer") != std::string::npos);
    CHECK(emitted.find("derivation ppSafe_refinement") != std::string::npos);

    Source round;
    REQUIRE(cdgl_parse_string(emitted.c_str(), &round.ptr, &error) == CDGL_OK);
    cdgl_report* report = nullptr;
    CHECK(cdgl_check_proof(round.ptr, "ppSafe_transfer", &report, &error) == CDGL_OK);
    cdgl_report_free(report);
    CHECK(cdgl_check_derivation(round.ptr, "ppSafe_refinement", &report, &error) == CDGL_OK);
    cdgl_report_free(report);
}

TEST_CASE("format is idempotent over the C surface") {
    Source src;
    char* error = nullptr;
    REQUIRE(cdgl_parse_file((std::string(SOURCE_DIR) + "/pp.cdgl").c_str(), &src.ptr, &error) ==
            CDGL_OK);
    char* once = nullptr;
    REQUIRE(cdgl_format(src.ptr, &once, &error) == CDGL_OK);
    Source again;
    REQUIRE(cdgl_parse_string(once, &again.ptr, &error) == CDGL_OK);
    char* twice = nullptr;
    REQUIRE(cdgl_format(again.ptr, &twice, &error) == CDGL_OK);
    CHECK(std::string(once) == std::string(twice));
    cdgl_string_free(once);
    cdgl_string_free(twice);
}

TEST_CASE("simulate runs scripts against named systems") {
    Source src;
    char* error = nullptr;
    REQUIRE(cdgl_parse_string("game counter := {x := x + 1}*", &src.ptr, &error) == CDGL_OK);
    char* trace = nullptr;
    cdgl_status st = cdgl_simulate(src.ptr, "counter", "x = 0\n", "C\nC\nC\nS\n", "x = 3", 0,
                                   &trace, &error);
    CHECK(st == CDGL_OK);
    REQUIRE(trace != nullptr);
    CHECK(std::string(trace).find("VERDICT POSTCONDITION-HOLDS") != std::string::npos);
    cdgl_string_free(trace);

    st = cdgl_simulate(src.ptr, "counter", "x = 0\n", "C\nS\n", "x = 3", 0, &trace, &error);
    CHECK(st == CDGL_REJECTED);
    CHECK(std::string(trace).find("VERDICT POSTCONDITION-FAILS") != std::string::npos);
    cdgl_string_free(trace);
}
