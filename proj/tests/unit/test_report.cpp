#include "thickpoints/report.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace thickpoints::report;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("reals round trip through 17 digits") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::nextafter(1.0, 2.0)})
        CHECK(std::strtod(format_real(v).c_str(), nullptr) == v);
    CHECK(format_real(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("csv cells and tables") {
    CHECK(Cell(3).text() == "3");
    CHECK(Cell(true).text() == "true");
    CHECK(Cell(0.5).text() == "0.5");
    CHECK(Cell("plain").text() == "plain");
    CHECK(Cell("a,b").text() == "\"a,b\"");
    CHECK(Cell("say \"hi\"").text() == "\"say \"\"hi\"\"\"");
    CsvTable t({"N", "value"});
    t.add_row({64, 0.25});
    t.add_row({128, "x"});
    CHECK(t.rows() == 2u);
    CHECK(t.str() == "N,value\n64,0.25\n128,x\n");
    CHECK_THROWS(t.add_row({1}));
    CHECK_THROWS(CsvTable({}));
}

TEST_CASE("sha-256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("estimate reports leave out wall time") {
    thickpoints::mc::EstimateReport r;
    r.estimator = "e";
    r.wall_time = 12.0;
    const auto j = to_json(r);
    CHECK_FALSE(j.contains("wall_time"));
    CHECK(j["target"].is_null());
    CHECK(j["verdict"] == "informational");
}

TEST_CASE("output set and manifest") {
    const auto dir = std::filesystem::temp_directory_path() / "thickpoints-report-test";
    std::filesystem::remove_all(dir);
    OutputSet out(dir);
    out.write("a.txt", "abc");
    out.write_json("sub/b.json", json{{"k", 1}});
    CsvTable t({"x"});
    t.add_row({1.5});
    out.write_csv("c.csv", t);
    out.write_manifest(json{{"command", "test"}}, 7, json{{"seconds", 0.1}});

    const auto m = json::parse(slurp(dir / "manifest.json"));
    CHECK(m["schema"] == kManifestSchema);
    CHECK(m["master_seed"] == 7);
    REQUIRE(m["files"].size() == 3u);
    for (const auto& f : m["files"]) {
        const auto content = slurp(dir / f["name"].get<std::string>());
        CHECK(f["sha256"] == sha256_hex(content));
        CHECK(f["bytes"] == content.size());
    }
    CHECK(m["files"][0]["sha256"] == sha256_hex("abc"));
    CHECK(slurp(dir / "sub/b.json") == "{\n  \"k\": 1\n}\n");
    CHECK_THROWS_AS(out.write("late.txt", "x"), std::logic_error);
    std::filesystem::remove_all(dir);
}
