#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(RECSHARPE_CLI_PATH) + " " + args + " 2>&1";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t got = 0;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string without_config(const std::string& text) {
    std::istringstream in(text);
    std::string line, kept;
    while (std::getline(in, line))
        if (line.rfind("# config ", 0) != 0) kept += line + '\n';
    return kept;
}

fs::path scratch() {
    const fs::path dir = fs::temp_directory_path() / "recsharpe_cli_test";
    fs::create_directories(dir);
    return dir;
}

// Small table shared by the CLI cases; deterministic in its flags.
std::string table_path() {
    static const std::string path = [] {
        const fs::path p = scratch() / "table.txt";
        const Run r = run("calibrate --grid-n 20,50 --navg 60 --permutations 20 --seed 3 --out " + p.string() +
                          " -o " + (scratch() / "calibrate.out").string());
        REQUIRE(r.status == 0);
        return p.string();
    }();
    return path;
}

} // namespace

TEST_SUITE("cli") {
TEST_CASE("records on a literal list") {
    const Run r = run("records --returns 1,1,1");
    CHECK(r.status == 0);
    CHECK(r.out.find("r_plus=4\n") != std::string::npos);
    CHECK(r.out.find("r_minus=1\n") != std::string::npos);
    CHECK(r.out.find("# config returns=1,1,1\n") != std::string::npos);
}

TEST_CASE("distinct exit codes with machine-readable errors") {
    const Run usage = run("records --no-such-flag");
    CHECK(usage.status == 2);
    CHECK(usage.out.rfind("error: code=usage ", 0) == 0);
    const Run table = run("estimate --input " RECSHARPE_DATA_DIR "/toy.csv --table /nonexistent/t.txt");
    CHECK(table.status == 4);
    CHECK(table.out.rfind("error: code=table ", 0) == 0);
    const fs::path bad = scratch() / "bad.csv";
    std::ofstream(bad) << "date,ticker,price\n2020-01-01,A,1\n";
    const Run csv = run("estimate --input " + bad.string() + " --table " + table_path());
    CHECK(csv.status == 3);
    CHECK(csv.out.rfind("error: code=input ", 0) == 0);
    CHECK(run("").status == 2);
}

TEST_CASE("estimate on the toy CSV matches the golden file") {
    const fs::path out = scratch() / "toy_estimate.csv";
    const Run r = run("estimate --input " RECSHARPE_DATA_DIR "/toy.csv --table " + table_path() + " --seed 1 -o " +
                      out.string());
    REQUIRE(r.status == 0);
    // The config line echoes machine-specific paths; everything else is fixed.
    CHECK(without_config(slurp(out)) == slurp(fs::path(RECSHARPE_GOLDEN_DIR) / "estimate_toy.csv"));
}

TEST_CASE("outputs are byte-identical across runs and job counts") {
    const std::string base = "estimate --input " RECSHARPE_DATA_DIR "/sample.csv --table " + table_path() +
                             " --window 40 --permutations 30 --seed 5";
    const fs::path a = scratch() / "a.csv", b = scratch() / "b.csv";
    REQUIRE(run(base + " --jobs 1 -o " + a.string()).status == 0);
    REQUIRE(run(base + " --jobs 3 -o " + b.string()).status == 0);
    const std::string ta = slurp(a), tb = slurp(b);
    CHECK(ta.size() > 1000);
    // Only the echoed jobs flag differs.
    CHECK(ta.substr(ta.find("# seed")) == tb.substr(tb.find("# seed")));
}

TEST_CASE("config file merges under command-line flags") {
    const fs::path cfg = scratch() / "run.cfg";
    std::ofstream(cfg) << "# analytics settings\nwhich = n0\nc = 0.1\n";
    const Run r = run("analytics --config " + cfg.string());
    CHECK(r.status == 0);
    CHECK(r.out.find("0.1,648") != std::string::npos);
    const Run o = run("analytics --config " + cfg.string() + " --c 0.05");
    CHECK(o.out.find("0.05,") != std::string::npos);
    CHECK(o.out.find("0.1,648") == std::string::npos);
    std::ofstream(cfg) << "bogus = 1\n";
    CHECK(run("analytics --config " + cfg.string()).status == 2);
}

TEST_CASE("rank-compare and backtest produce their tables") {
    const std::string common = " --input " RECSHARPE_DATA_DIR "/sample.csv --table " + table_path() +
                               " --window 40 --permutations 20 --no-liquidity";
    const Run rank = run("rank-compare" + common + " --min-assets 10 --quantile 0.1");
    CHECK(rank.status == 0);
    CHECK(rank.out.find("date,assets,quantile_size,top_overlap") != std::string::npos);
    const Run bt = run("backtest" + common);
    CHECK(bt.status == 0);
    CHECK(bt.out.find("date,method,daily_return,log_wealth,positions") != std::string::npos);
    CHECK(bt.out.find("# turnover record=") != std::string::npos);
}

TEST_CASE("analytics outputs") {
    const Run pmf = run("analytics --which driftless-pmf --n 2");
    CHECK(pmf.out.find("records,probability\n1,0.375\n2,0.375\n3,0.25\n") != std::string::npos);
    const Run p0 = run("analytics --which pconv0 --n 1");
    CHECK(p0.out.find("1,0.636619772368,") != std::string::npos);
}
}
