// ===========================================================================
// JSON schemas: parse/serialize round-trips and the shape validators
// ===========================================================================
#include "corrspec/json_io.hpp"

#include <cstdio>
#include <fstream>

#include "corrspec/dpi.hpp"
#include "corrspec/error.hpp"
#include "corrspec/oracle.hpp"
#include "corrspec/regions.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace corrspec;
namespace jio = corrspec::jsonio;
using jio::json;
using testutil::bss;

TEST_CASE("joint documents round-trip exactly") {
    const auto src = bss(0.25);
    const json doc = jio::to_json(src);
    jio::check_schema(doc, "joint");
    const auto back = jio::parse_joint(doc);
    CHECK(back.rows == src.rows);
    CHECK(back.cols == src.cols);
    CHECK((back.mass - src.mass).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("factored documents round-trip exactly") {
    const auto f = prob::from_pair(bss(0.25), "u", "v");
    const json doc = jio::to_json(f);
    jio::check_schema(doc, "factored");
    CHECK(jio::is_factored_document(doc));
    CHECK_FALSE(jio::is_factored_document(jio::to_json(bss(0.25))));
    const auto back = jio::parse_factored(doc);
    REQUIRE(back.rank() == 2);
    CHECK(back.axes[0].name == "u");
    CHECK(back.mass == f.mass);
}

TEST_CASE("kernel documents round-trip and reject bad shapes") {
    const auto k = testutil::bsc(0.1);
    const json doc = jio::to_json(k);
    jio::check_schema(doc, "kernel");
    const auto back = jio::parse_kernel(doc);
    CHECK((back.rows - k.rows).cwiseAbs().maxCoeff() == 0.0);

    json bad = doc;
    bad["rows"] = {{0.9, 0.1}}; // one row, two from-symbols
    try {
        jio::parse_kernel(bad);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Err::ParseError);
    }
}

TEST_CASE("parsers name the offending field") {
    auto expect_parse_error = [](const json& doc, const std::string& needle) {
        try {
            jio::parse_joint(doc);
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.code() == Err::ParseError);
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_parse_error(json{{"rows", {"a"}}, {"cols", {"b"}}}, "mass");
    expect_parse_error(json{{"rows", {"a", "b"}},
                            {"cols", {"c", "d"}},
                            {"mass", {{0.5, 0.5}, {0.0}}}},
                       "ragged");
    expect_parse_error(json{{"schema", "corrspec/999"},
                            {"rows", {"a"}},
                            {"cols", {"b"}},
                            {"mass", {{1.0}}}},
                       "schema");
    expect_parse_error(json::array({1, 2}), "object");
}

TEST_CASE("file loading distinguishes missing from malformed") {
    try {
        jio::load_file("/nonexistent/path.json");
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Err::ParseError);
    }

    const std::string path = "/tmp/corrspec_io_test.json";
    {
        std::ofstream f(path);
        f << "{\"rows\": [";
    }
    try {
        jio::load_file(path);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Err::ParseError);
    }
    std::remove(path.c_str());
}

TEST_CASE("every verdict document passes its own schema check") {
    const auto src = bss(0.25);

    jio::check_schema(jio::spectrum_report(src), "spectrum");

    auto link = testutil::bsc(0.1);
    link.from = src.cols;
    dpi::ChainSpec chain{src, link};
    jio::check_schema(jio::to_json(dpi::check_dpi(chain)), "dpi");

    jio::check_schema(jio::to_json(dpi::necc_check(src, 0.5), "single_letter"),
                      "membership");

    oracle::OracleConfig ocfg;
    const auto frontier = oracle::frontier(src, ocfg);
    const json fdoc = jio::to_json(frontier);
    jio::check_schema(fdoc, "frontier");
    CHECK(fdoc.at("mode") == "exhaustive");
    CHECK(fdoc.at("first_violation_id").is_null()); // kNoPair serializes as null
    CHECK(fdoc.at("worst_margins").at("nec").is_null()); // +inf serializes as null

    regions::DistortionSpec ds;
    ds.d1 = prob::Mat::Identity(2, 2);
    ds.d1 << 0, 1, 1, 0;
    ds.d2 = ds.d1;
    regions::SamplerConfig scfg;
    scfg.budget = 8;
    scfg.seed = 5;
    const auto sampled = regions::rd_region_sample(src, ds, 0.5, 0.5,
                                                   regions::SetPredicate::Sout4, scfg);
    jio::check_schema(jio::to_json(sampled, "sout4"), "rd_region");

    try {
        jio::check_schema(json{{"schema", jio::kSchema}}, "no-such-kind");
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Err::ParseError);
    }
}
