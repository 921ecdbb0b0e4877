#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "citecheck/serialization.hpp"

using namespace citecheck;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path work_dir() {
    static fs::path d = [] {
        fs::path p = fs::temp_directory_path() / "citecheck-cli-test";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return d;
}

CliResult run_cli(const std::string& args) {
    fs::path out = work_dir() / "stdout.txt", err = work_dir() / "stderr.txt";
    std::string cmd = "cd '" + work_dir().string() + "' && SOURCE_DATE_EPOCH=1700000000 '" CITECHECK_CLI_PATH "' " +
                      args + " > '" + out.string() + "' 2> '" + err.string() + "'";
    int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
}

const char* kReport =
    "# Report\n\nSolar output rose in 2023 [1]. Costs fell [2].\n\n"
    "[1]: https://a.example/solar\n[2]: https://b.example/costs\n";

// Replay cassette: one page served, the other unknown (unreachable).
void write_cassette(const fs::path& dir) {
    fs::create_directories(dir);
    std::string key;
    {
        // cassette_key is FNV-1a over the URL; recomputed here to stay independent.
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : std::string("https://a.example/solar")) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        key = buf;
    }
    write_file(dir / (key + ".0.body"), "<p>Solar output rose in 2023 across the region.</p>");
    write_file(dir / (key + ".json"),
               R"({"url":"https://a.example/solar","attempts":[{"status":200,"error":"none","headers":{"content-type":"text/html"},"final_url":"https://a.example/solar","elapsed_ms":3,"detail":"","body_file":")" +
                   key + R"(.0.body"}]})");
}

}  // namespace

TEST_CASE("cli usage errors exit 2") {
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("frobnicate").code == 2);
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("parse").code == 2);
    CHECK(run_cli("parse missing.md").code == 2);
    CHECK(run_cli("report --runs nowhere").code == 2);
    CHECK(run_cli("evaluate").code == 2);
    CHECK(run_cli("evaluate --doc x.json --judge bogus").code == 2);
    CHECK(run_cli("ablate --queries q.json").code == 2);
}

TEST_CASE("cli parse, evaluate and report") {
    write_file(work_dir() / "r.md", kReport);
    write_cassette(work_dir() / "cassette");

    auto parsed = run_cli("parse r.md --out r.document.json");
    REQUIRE(parsed.code == 0);
    CHECK(parsed.out.find("2 citations, 2 attributions, 2 pairs") != std::string::npos);
    auto doc = document_from_json(read_file(work_dir() / "r.document.json"));
    CHECK(doc.attributions.size() == 2);

    auto ev = run_cli("evaluate --doc r.document.json --replay cassette --out runs/heur --label Heuristic");
    REQUIRE(ev.code == 0);
    CHECK(fs::exists(work_dir() / "runs/heur/manifest.json"));
    auto report = nlohmann::json::parse(read_file(work_dir() / "runs/heur/report.json"));
    CHECK(report["dimensions"]["link_works"]["passed"] == 1);
    CHECK(report["dimensions"]["link_works"]["failed"] == 1);
    CHECK(report["dimensions"]["relevant_content"]["passed"] == 1);
    CHECK(report["error_breakdown"]["unreachable"] == 1);
    auto manifest = nlohmann::json::parse(read_file(work_dir() / "runs/heur/manifest.json"));
    CHECK(manifest["started_at"] == "2023-11-14T22:13:20Z");

    write_file(work_dir() / "judge.json", R"({"default":"SCORE: 0\nEXPLANATION: no"})");
    auto ev2 = run_cli("evaluate --doc r.document.json --replay cassette --out runs/strict --label Strict "
                       "--judge scripted:judge.json --dims link,relevant");
    REQUIRE(ev2.code == 0);
    auto m2 = nlohmann::json::parse(read_file(work_dir() / "runs/strict/manifest.json"));
    CHECK(m2["config"]["dimensions"].size() == 2);

    auto md = run_cli("report --runs runs --format markdown");
    REQUIRE(md.code == 0);
    CHECK(md.out.find("| Heuristic |") < md.out.find("| Strict |"));
    CHECK(md.out.find("| Strict | 100.0% | 50.0% | 0.0% | - |") != std::string::npos);
    auto csv = run_cli("report --runs runs --format csv --out all.csv");
    REQUIRE(csv.code == 0);
    CHECK(read_file(work_dir() / "all.csv").rfind("label,n_queries", 0) == 0);
    CHECK(run_cli("report --runs runs --format xml").code == 2);
}

TEST_CASE("cli config precedence and batch manifests") {
    write_file(work_dir() / "q1.md", kReport);
    write_file(work_dir() / "batch.json", R"([{"query_id":"q1"},{"query_id":"q-missing"}])");
    write_file(work_dir() / "cfg.json", R"({"evaluator_concurrency": 3, "dimensions": ["link_works"],
                                          "fetch_policy": {"max_retries": 1, "truncation_limit": 99}})");
    fs::create_directories(work_dir() / "cassette");
    auto r = run_cli("evaluate --manifest batch.json --config cfg.json --evaluator-concurrency 2 "
                     "--replay cassette --out runs-batch/b");
    REQUIRE(r.code == 0);
    auto m = nlohmann::json::parse(read_file(work_dir() / "runs-batch/b/manifest.json"));
    CHECK(m["config"]["evaluator_concurrency"] == 2);
    CHECK(m["config"]["dimensions"] == nlohmann::json::array({"link_works"}));
    CHECK(m["config"]["fetch_policy"]["truncation_limit"] == 99);
    CHECK(m["config"]["fetch_policy"]["max_retries"] == 1);
    REQUIRE(m["records"].size() == 2);
    CHECK(m["records"][0]["success"] == true);
    CHECK(m["records"][1]["success"] == false);
    CHECK(m["records"][1]["acquisition_attempts"] == 2);
    CHECK(m["records"][1]["elapsed_ms"] == 0);

    write_file(work_dir() / "bad.json", R"({"evaluator_concurrency": -1})");
    CHECK(run_cli("evaluate --manifest batch.json --config bad.json --replay cassette").code == 2);
}

TEST_CASE("cli exits 3 when the judge is unreachable") {
    fs::create_directories(work_dir() / "cassette");
    write_cassette(work_dir() / "cassette");
    write_file(work_dir() / "r.md", kReport);
    REQUIRE(run_cli("parse r.md --out r.document.json").code == 0);
    auto r = run_cli("evaluate --doc r.document.json --replay cassette --out runs-down/x --judge remote "
                     "--judge-endpoint http://127.0.0.1:9/v1 --judge-model m --max-retries 1 --retry-delay-ms 1 "
                     "--dims relevant");
    CHECK(r.code == 3);
    CHECK(r.err.find("unreachable") != std::string::npos);
}

TEST_CASE("cli ablate writes per-budget runs") {
    write_file(work_dir() / "queries.json", R"([{"query_id":"a","query":"Claim A"},{"query_id":"b","query":"Claim B"}])");
    fs::create_directories(work_dir() / "cassette");
    auto r = run_cli("ablate --queries queries.json --budgets 10,2 --replay cassette --dims link --out abl "
                     "--agent-cmd \"printf '%s [1].\\n\\n[1]: https://a.example/solar\\n' '{query} {budget}'\"");
    REQUIRE(r.code == 0);
    CHECK(read_file(work_dir() / "abl/ablation.csv") ==
          "budget,dimension,passed,failed,not_evaluated,rate\n2,link_works,2,0,0,100.0%\n10,link_works,2,0,0,100.0%\n");
    CHECK(fs::exists(work_dir() / "abl/budget-2/a.document.json"));
    auto doc = document_from_json(read_file(work_dir() / "abl/budget-10/b.document.json"));
    REQUIRE(doc.attributions.size() == 1);
    CHECK(doc.attributions[0].text_nocite == "Claim B 10.");
    CHECK(run_cli("ablate --queries queries.json --budgets 2,x --agent-cmd true").code == 2);
}
