#include <doctest.h>

#include "sboltz/errors.hpp"
#include "sboltz/verify.hpp"

using namespace sboltz;

namespace {

const CoeffTable& table6() {
    static const CoeffTable t = build_table(6, KernelParams{0.5, 1.0});
    return t;
}

}  // namespace

TEST_SUITE("verify") {
    TEST_CASE("every suite passes on a fresh table") {
        for (const std::string& name : suite_names()) {
            SuiteResult r = run_suite(name, table6());
            INFO(name << ": " << r.detail);
            CHECK(r.name == name);
            CHECK(r.passed);
            CHECK(r.seconds >= 0.0);
            nlohmann::json j = suite_json(r);
            CHECK(j.at("name") == name);
            CHECK(j.at("passed") == true);
        }
        CHECK(suite_names().size() == 7);
    }

    TEST_CASE("a perturbed coefficient breaks orthogonality") {
        CoeffTable t = table6();
        auto it = t.mu.find(MuKey{0, 0, 2, 2, 0, 0, 0});
        REQUIRE(it != t.mu.end());
        it->second *= 1.0 + 1e-3;
        SuiteResult r = run_suite("orthogonality", t);
        CHECK_FALSE(r.passed);
        CHECK(r.metric > 1e-6);
        CHECK(run_suite("eigen-identity", t).passed);
    }

    TEST_CASE("a corrupted eigenvalue breaks the identity") {
        CoeffTable t = table6();
        t.linear[{1, 2}] *= 1.0 + 1e-6;
        CHECK_FALSE(run_suite("eigen-identity", t).passed);
    }

    TEST_CASE("unknown suites are rejected") {
        CHECK_THROWS_AS(run_suite("no-such-suite", table6()), DomainError);
    }
}
