#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef SRDISC_CLI_PATH
#error "SRDISC_CLI_PATH must be defined"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SRDISC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path d = fs::temp_directory_path() / ("srdisc_cli_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string config_line(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind("# config=", 0) == 0) return line.substr(9);
    FAIL("no config echo line found");
    return {};
}

}  // namespace

TEST_CASE("zeta subcommand writes a parseable report") {
    const auto dir = fresh_dir("zeta");
    REQUIRE(run_cli("zeta --out-dir " + dir.string() + " --a-eps 3 --a-s 1 --n-min 32 --n-max 1024") == 0);
    const json report = json::parse(slurp(dir / "zeta.json"));

    CHECK(report["poles"]["DI"]["lambda_num"] == 1);
    CHECK(report["poles"]["DI"]["lambda_den"] == 2);
    CHECK(report["poles"]["DI"]["multiplicity"] == 2);
    CHECK(report["poles"]["SPADE"]["lambda_num"] == 1);
    CHECK(report["poles"]["SPADE"]["lambda_den"] == 2);
    CHECK(report["poles"]["SPADE"]["multiplicity"] == 1);
    CHECK(report["poles"]["user"]["lambda_den"] == 3);
    CHECK(report["poles"]["user"]["multiplicity"] == 1);

    const auto& table = report["asymptotes"];
    REQUIRE(table.size() == 6);  // 32, 64, ..., 1024
    for (const auto& row : table) {
        const long n = row["n"].get<long>();
        const double diff = row["difference"].get<double>();
        CHECK(diff == Catch::Approx(std::log(std::log((double)n))).margin(1e-12));
    }
}

TEST_CASE("kl-table output is deterministic") {
    const auto d1 = fresh_dir("kl1");
    const auto d2 = fresh_dir("kl2");
    REQUIRE(run_cli("kl-table --out-dir " + d1.string()) == 0);
    REQUIRE(run_cli("kl-table --out-dir " + d2.string()) == 0);
    CHECK(slurp(d1 / "kl_table.csv") == slurp(d2 / "kl_table.csv"));
    // header plus 6 x 5 grid rows plus the comment line
    std::istringstream in(slurp(d1 / "kl_table.csv"));
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++rows;
    CHECK(rows == 31);
}

TEST_CASE("power-curve output is byte-identical across thread counts") {
    const auto d1 = fresh_dir("pc1");
    const auto d2 = fresh_dir("pc2");
    const std::string common =
        " --s-min 0.1 --s-max 0.3 --s-step 0.1 --n 100 --mc-reps 2000 --seed 77";
    REQUIRE(run_cli("power-curve --out-dir " + d1.string() + common + " --threads 1") == 0);
    REQUIRE(run_cli("power-curve --out-dir " + d2.string() + common + " --threads 4") == 0);
    const std::string a = slurp(d1 / "power_curve.csv");
    CHECK(a == slurp(d2 / "power_curve.csv"));
    // both schemes present
    CHECK(a.find("DI,") != std::string::npos);
    CHECK(a.find("bSPADE,") != std::string::npos);
}

TEST_CASE("power-vs-n respects scheme selection and grids") {
    const auto dir = fresh_dir("pvn");
    REQUIRE(run_cli("power-vs-n --out-dir " + dir.string() +
                    " --scheme bSPADE --n-grid 50 100 --s-values 0.05 0.2 --seed 5") == 0);
    const std::string body = slurp(dir / "power_vs_n.csv");
    CHECK(body.find("bSPADE,") != std::string::npos);
    CHECK(body.find("DI,") == std::string::npos);
    std::istringstream in(body);
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++rows;
    CHECK(rows == 5);  // header + 2x2 grid
}

TEST_CASE("config file applies and flags override it") {
    const auto dir = fresh_dir("cfg");
    const fs::path cfg = dir / "run.json";
    {
        std::ofstream out(cfg);
        out << R"({"sigma": 2.0, "theta": 0.2, "seed": 999})" << "\n";
    }
    REQUIRE(run_cli("kl-table --config " + cfg.string() + " --out-dir " + dir.string() +
                    " --theta 0.3") == 0);
    const json echo = json::parse(config_line(slurp(dir / "kl_table.csv")));
    CHECK(echo["sigma"].get<double>() == 2.0);     // from the config file
    CHECK(echo["theta"].get<double>() == 0.3);     // flag wins
    CHECK(echo["seed"].get<std::uint64_t>() == 999);
    CHECK(echo["profile"].get<std::string>() == "ci");
}

TEST_CASE("free-energy emits per-replicate records") {
    const auto dir = fresh_dir("fe");
    REQUIRE(run_cli("free-energy --out-dir " + dir.string() +
                    " --n 32 --replicates 8 --quad-nodes 16 --seed 3") == 0);
    const std::string body = slurp(dir / "free_energy.csv");
    std::istringstream in(body);
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++rows;
    CHECK(rows == 9);  // header + 8 replicates
    const json echo = json::parse(config_line(body));
    CHECK(echo["replicates"].get<long>() == 8);
}

TEST_CASE("error paths exit with code 2") {
    const auto dir = fresh_dir("err");
    CHECK(run_cli("no-such-subcommand") == 2);
    CHECK(run_cli("kl-table --config /nonexistent/file.json") == 2);
    CHECK(run_cli("kl-table --profile bogus --out-dir " + dir.string()) == 2);
    // invalid model parameter surfaces as a domain error
    CHECK(run_cli("power-curve --epsilon 1.5 --s-min 0.1 --s-max 0.1 --s-step 0.1 --n 50 "
                  "--mc-reps 1000 --out-dir " + dir.string()) == 2);
}
