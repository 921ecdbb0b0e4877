#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "citecheck/attribution.hpp"
#include "citecheck/run_store.hpp"
#include "citecheck/serialization.hpp"

using namespace citecheck;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("citecheck-store-" + name);
    fs::remove_all(d);
    return d;
}

RunRecord sample(std::string id) {
    RunRecord r;
    r.query_id = std::move(id);
    r.query = "q";
    r.document = parse_document("Claim here [1].\n\n[1]: https://a.example/\n");
    EvalResult e;
    e.attribution_id = 0;
    e.citation_id = r.document.citations.at(0).id;
    e.dimension = Dimension::link_works;
    e.score = 1;
    e.fetch_category = FetchCategory::ok;
    e.http_status = 200;
    r.document.evals = {e};
    r.success = true;
    r.acquisition_attempts = 1;
    return r;
}

}  // namespace

TEST_CASE("document file names are safe") {
    CHECK(document_file_name("q-1_a.b") == "q-1_a.b.document.json");
    CHECK(document_file_name("../etc/passwd") == "_.._etc_passwd.document.json");
    CHECK(document_file_name("") == "_.document.json");
    CHECK(document_file_name("a b/c") == "a_b_c.document.json");
}

TEST_CASE("timestamps honour SOURCE_DATE_EPOCH") {
    setenv("SOURCE_DATE_EPOCH", "0", 1);
    CHECK(utc_timestamp() == "1970-01-01T00:00:00Z");
    CHECK(reproducible_timestamps());
    unsetenv("SOURCE_DATE_EPOCH");
    CHECK_FALSE(reproducible_timestamps());
    CHECK(utc_timestamp().size() == 20);
}

TEST_CASE("run directory round trip") {
    fs::path dir = scratch_dir("roundtrip");
    RunConfig cfg;
    cfg.dimensions = {Dimension::link_works};
    std::vector<RunRecord> recs = {sample("q/1"), sample("q:1"), sample("q2")};
    recs[2].success = false;
    recs[2].diagnostics.push_back({"generation_failed", "boom", std::nullopt});
    recs[2].document = {};
    MetricsReport m = write_run_directory(dir, {"r1", "Model A", "2026-01-01T00:00:00Z"}, recs, cfg);

    for (const char* f : {"manifest.json", "report.json", "report.md", "report.csv"}) CHECK(fs::exists(dir / f));
    // Two ids sanitize to the same name and must not overwrite each other.
    CHECK(fs::exists(dir / "q_1.document.json"));
    CHECK(fs::exists(dir / "q_1-1.document.json"));

    LoadedRun run = load_run_directory(dir);
    CHECK(run.label == "Model A");
    CHECK(run.dimensions == cfg.dimensions);
    REQUIRE(run.records.size() == 3);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        RunRecord expected = recs[i];
        expected.elapsed_ms = run.records[i].elapsed_ms;
        CHECK(run.records[i] == expected);
    }
    CHECK(build_report(run.label, run.records, run.dimensions) == m);
    CHECK(report_from_json(nlohmann::json::parse(read_file(dir / "report.json"))) == m);

    auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    CHECK(manifest["config"]["fetch_policy"]["max_retries"] == 5);
    CHECK(manifest["config"]["evaluator_concurrency"] == 15);
    CHECK(manifest.dump().find("api_key") == std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("finding run directories") {
    fs::path root = scratch_dir("find");
    RunConfig cfg;
    write_run_directory(root / "b", {"b", "B", "t"}, std::vector<RunRecord>{sample("x")}, cfg);
    write_run_directory(root / "a", {"a", "A", "t"}, std::vector<RunRecord>{sample("x")}, cfg);
    fs::create_directories(root / "not-a-run");
    auto dirs = find_run_directories(root);
    REQUIRE(dirs.size() == 2);
    CHECK(dirs[0].filename() == "a");
    CHECK(find_run_directories(root / "a").size() == 1);
    CHECK(find_run_directories(root / "nope").empty());
    CHECK_THROWS(load_run_directory(root / "not-a-run"));
    write_file(root / "a" / "manifest.json", "{ not json");
    CHECK_THROWS(load_run_directory(root / "a"));
    fs::remove_all(root);
}

TEST_CASE("ablation directory layout") {
    fs::path dir = scratch_dir("ablation");
    std::map<int, std::vector<RunRecord>> by_budget = {{10, {sample("x")}}, {2, {sample("x")}}};
    by_budget[10][0].budget = 10;
    by_budget[2][0].budget = 2;
    RunConfig cfg;
    write_ablation_directory(dir, {"ab", "Ablation", "t"}, by_budget, cfg);
    CHECK(fs::exists(dir / "budget-2" / "manifest.json"));
    CHECK(fs::exists(dir / "budget-10" / "manifest.json"));
    std::string csv = read_file(dir / "ablation.csv");
    CHECK(csv.find("2,link_works") < csv.find("10,link_works"));
    auto m = nlohmann::json::parse(read_file(dir / "budget-10" / "manifest.json"));
    CHECK(m["config"]["tool_call_budget"] == 10);
    CHECK(find_run_directories(dir).size() == 2);
    fs::remove_all(dir);
}
