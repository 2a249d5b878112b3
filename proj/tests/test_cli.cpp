#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end checks of the command-line binary. The path to the built binary
// arrives via MOBGAME_BIN so the suite works from any build directory.

namespace {

namespace fs = std::filesystem;

std::string bin() {
    const char* b = std::getenv("MOBGAME_BIN");
    REQUIRE_MESSAGE(b != nullptr, "MOBGAME_BIN must point at the CLI binary");
    return b;
}

std::string scenario(const std::string& name) {
    return std::string(MOBGAME_SCENARIO_DIR) + "/" + name;
}

// Runs a command with stdout/stderr silenced and returns its exit code.
int run(const std::string& cmd) {
    std::string full = cmd + " >/dev/null 2>&1";
    int status = std::system(full.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& tag) {
    fs::path d = fs::temp_directory_path() / ("mobgame_cli_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE_MESSAGE(in.good(), ("missing file: " + p.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("assign solves a scenario and writes annotated outputs") {
    fs::path out = fresh_dir("assign");
    int code = run(bin() + " assign --scenario " + scenario("pigou.json") + " --out " +
                   out.string());
    CHECK(code == 0);

    std::string flows = slurp(out / "assign_flows.csv");
    CHECK(flows.rfind("# artifact_version=", 0) == 0);
    CHECK(flows.find("# scenario=pigou") != std::string::npos);
    CHECK(flows.find("edge_id,class,flow,time,price") != std::string::npos);

    std::string trace = slurp(out / "assign_trace.csv");
    CHECK(trace.find("iteration,beckmann,tstc,sptc,rel_gap,alpha") != std::string::npos);

    std::string summary = slurp(out / "assign_summary.json");
    CHECK(summary.find("\"command\": \"assign\"") != std::string::npos);
    CHECK(summary.find("\"scenario\": \"pigou\"") != std::string::npos);
    fs::remove_all(out);
}

TEST_CASE("invalid inputs exit with code 1") {
    fs::path out = fresh_dir("invalid");
    SUBCASE("missing scenario file") {
        CHECK(run(bin() + " assign --scenario /nonexistent.json --out " + out.string()) == 1);
    }
    SUBCASE("malformed scenario json") {
        fs::path bad = out / "bad.json";
        std::ofstream(bad) << "{ definitely not json";
        CHECK(run(bin() + " assign --scenario " + bad.string() + " --out " + out.string()) == 1);
    }
    SUBCASE("dataset with zero samples") {
        CHECK(run(bin() + " dataset --scenario " + scenario("mini_multimodal.json") +
                  " --samples 0 --out " + out.string()) == 1);
    }
    SUBCASE("unknown optimize method is rejected at parse time") {
        CHECK(run(bin() + " optimize --scenario " + scenario("mini_multimodal.json") +
                  " --method annealing --out " + out.string()) != 0);
    }
    SUBCASE("missing required --scenario") { CHECK(run(bin() + " assign") != 0); }
    fs::remove_all(out);
}

TEST_CASE("an iteration-starved solve exits with code 2 but still writes results") {
    fs::path out = fresh_dir("starved");
    int code = run(bin() + " assign --scenario " + scenario("grid.json") +
                   " --epsilon 1e-9 --max-iter 1 --out " + out.string());
    CHECK(code == 2);
    // Partial results are still on disk for inspection.
    CHECK(fs::exists(out / "assign_flows.csv"));
    CHECK(fs::exists(out / "assign_trace.csv"));
    std::string summary = slurp(out / "assign_summary.json");
    CHECK(summary.find("\"converged\": false") != std::string::npos);
    fs::remove_all(out);
}

TEST_CASE("dataset runs are byte-identical across reruns and worker counts") {
    fs::path out1 = fresh_dir("ds1");
    fs::path out2 = fresh_dir("ds2");
    fs::path out3 = fresh_dir("ds3");
    std::string base = bin() + " dataset --scenario " + scenario("mini_multimodal.json") +
                       " --samples 3";
    REQUIRE(run(base + " --workers 1 --out " + out1.string()) == 0);
    REQUIRE(run(base + " --workers 1 --out " + out2.string()) == 0);
    REQUIRE(run(base + " --workers 3 --out " + out3.string()) == 0);

    std::string a = slurp(out1 / "dataset.csv");
    std::string b = slurp(out2 / "dataset.csv");
    std::string c = slurp(out3 / "dataset.csv");
    CHECK(a == b);  // rerun
    CHECK(a == c);  // worker-count invariance
    CHECK(slurp(out1 / "dataset_summary.json") == slurp(out3 / "dataset_summary.json"));
    fs::remove_all(out1);
    fs::remove_all(out2);
    fs::remove_all(out3);
}

TEST_CASE("mne writes traces and strategies; reruns are byte-identical") {
    fs::path out1 = fresh_dir("mne1");
    fs::path out2 = fresh_dir("mne2");
    std::string base = bin() + " mne --scenario " + scenario("mini_multimodal.json") +
                       " --iters 5 --rounds 3";
    int code = run(base + " --out " + out1.string());
    CHECK((code == 0 || code == 2));  // a tiny budget may legitimately not converge
    REQUIRE(run(base + " --out " + out2.string()) == code);

    std::string trace = slurp(out1 / "mne_trace.csv");
    CHECK(trace.find("round,iteration,operator,x0,x1,x2,x3,x4,f_plus,f_minus,ok") !=
          std::string::npos);
    CHECK(trace == slurp(out2 / "mne_trace.csv"));
    CHECK(slurp(out1 / "mne_summary.json") == slurp(out2 / "mne_summary.json"));
    CHECK(slurp(out1 / "mne_flows.csv") == slurp(out2 / "mne_flows.csv"));
    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("dataset -> train -> surrogate optimize round trip") {
    fs::path out = fresh_dir("pipeline");
    REQUIRE(run(bin() + " dataset --scenario " + scenario("mini_multimodal.json") +
                " --samples 12 --out " + out.string()) == 0);
    REQUIRE(run(bin() + " train --scenario " + scenario("mini_multimodal.json") + " --dataset " +
                (out / "dataset.csv").string() + " --epochs 40 --hidden 8 --out " +
                out.string()) == 0);
    CHECK(fs::exists(out / "surrogate.json"));
    std::string tsum = slurp(out / "train_summary.json");
    CHECK(tsum.find("\"records\": 12") != std::string::npos);

    int code = run(bin() + " optimize --scenario " + scenario("mini_multimodal.json") +
                   " --method random --evaluator surrogate --surrogate " +
                   (out / "surrogate.json").string() + " --budget 40 --out " + out.string());
    CHECK(code == 0);
    std::string trace = slurp(out / "optimize_random_trace.csv");
    CHECK(trace.find("iteration,tau_pt,tau_tx,lambda,sigma_pt,sigma_tx,j_plus,j_minus,j_best,ok,"
                     "evaluator,wallclock_ms,method") != std::string::npos);
    std::string osum = slurp(out / "optimize_random_summary.json");
    CHECK(osum.find("\"method\": \"random\"") != std::string::npos);
    CHECK(osum.find("\"evaluations\": 40") != std::string::npos);
    CHECK(osum.find("\"best_J\"") != std::string::npos);
    fs::remove_all(out);
}

TEST_CASE("optimize with the exact evaluator honors a tiny budget") {
    fs::path out = fresh_dir("opt_exact");
    int code = run(bin() + " optimize --scenario " + scenario("mini_multimodal.json") +
                   " --method random --evaluator exact --budget 2 --out " + out.string());
    CHECK(code == 0);
    std::string osum = slurp(out / "optimize_random_summary.json");
    CHECK(osum.find("\"budget\": 2") != std::string::npos);
    CHECK(osum.find("\"evaluator\": \"exact\"") != std::string::npos);
    fs::remove_all(out);
}
