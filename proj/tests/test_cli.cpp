// Drives the installed command-line binary end to end; the binary path comes
// in as argv[1] from CTest.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string g_binary;

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string out_file = "cli_test_output.tmp";
    const std::string command = g_binary + " " + args + " > " + out_file + " 2>&1";
    const int raw = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(out_file);
    std::stringstream buffer;
    buffer << in.rdbuf();
    result.output = buffer.str();
    std::remove(out_file.c_str());
    return result;
}

} // namespace

TEST_CASE("qfi subcommand prints the closed form with a numeric residual") {
    const auto r = run_cli("qfi --n 4 --s 0.6 --which epsilon --parametrization identity");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.output);
    CHECK(j["closed_form"].get<double>() == doctest::Approx(6.25));
    CHECK(j["residual"].get<double>() < 1e-7);
}

TEST_CASE("spectrum subcommand normalizes") {
    const auto r = run_cli("spectrum --n 6 --epsilon 0.4");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.output);
    double total = 0.0;
    for (const auto& e : j["entries"]) total += e["p"].get<double>();
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("moments subcommand emits the closed forms") {
    const auto r = run_cli("moments --n 2 --s 0 --parametrization identity --format csv");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("mean_J2") != std::string::npos);
    CHECK(r.output.find("1.5") != std::string::npos);
}

TEST_CASE("conjecture subcommand reports the tritter split") {
    const auto r = run_cli("conjecture --n 3 --statistics boson");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.output);
    CHECK(j["passed"].get<bool>());
    bool saw_triple = false, saw_distinct = false;
    for (const auto& e : j["s0"]["signatures"]) {
        const auto pattern = e["pattern"].get<std::vector<int>>();
        if (pattern == std::vector<int>{3}) saw_triple = true;
        if (pattern == std::vector<int>{1, 1, 1}) saw_distinct = true;
    }
    CHECK(saw_triple);
    CHECK(saw_distinct);
}

TEST_CASE("ratio subcommand prints the exact fraction") {
    const auto r6 = run_cli("ratio --n 6");
    REQUIRE(r6.exit_code == 0);
    CHECK(r6.output.find("449/462") != std::string::npos);

    const auto r4 = run_cli("ratio --n 4");
    REQUIRE(r4.exit_code == 0);
    CHECK(r4.output.substr(0, 1) == "1");
}

TEST_CASE("signatures subcommand dumps the documented sets") {
    const auto r = run_cli("signatures --n 2 --input tau0 --statistics boson --zero-test exact");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.output);
    REQUIRE(j["signatures"].size() == 1);
    CHECK(j["signatures"][0]["pattern"].get<std::vector<int>>() == std::vector<int>{2});
    CHECK(j["signatures"][0]["exact"].get<std::string>() == "1");
}

TEST_CASE("validation failures exit with code 1") {
    CHECK(run_cli("qfi --n 4 --which epsilon").exit_code == 1); // neither --epsilon nor --s
    CHECK(run_cli("qfi --n 4 --s 0.5 --epsilon 0.5").exit_code == 1);
    CHECK(run_cli("ratio --n 10").exit_code == 1); // missing --long
    CHECK(run_cli("qfi --n 4 --s 0.5 --bogus-flag 3").exit_code == 1);
    CHECK(run_cli("nonexistent-subcommand").exit_code == 1);
}

TEST_CASE("simulate subcommand is deterministic given a seed") {
    const std::string args =
        "simulate --n 2 --nu 2000 --seed 7 --epsilon 0.894427190999916 --format csv";
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    CHECK(a.output == b.output);
    CHECK(a.output.find("weighted") != std::string::npos);
}

TEST_CASE("custom table parametrizations are accepted") {
    const std::string table = "cli_table_test.csv";
    {
        std::ofstream out(table);
        out << "# epsilon,s\n";
        for (int i = 0; i <= 30; ++i) {
            const double e = 0.05 + i * (1.5 - 0.05) / 30.0;
            out << e << "," << 1.0 - e * e / 8.0 << "\n";
        }
    }
    const auto r = run_cli("qfi --n 2 --epsilon 0.4 --which phi --parametrization custom-table "
                           "--table " + table);
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.output);
    const double s = 1.0 - 0.4 * 0.4 / 8.0;
    CHECK(j["closed_form"].get<double>() == doctest::Approx(2 * s * s).epsilon(1e-5));
    std::remove(table.c_str());

    CHECK(run_cli("qfi --n 2 --epsilon 0.4 --parametrization custom-table").exit_code == 1);
}

TEST_CASE("mse-curve emits analytic and optional Monte Carlo columns") {
    const auto analytic = run_cli("mse-curve --n 2,3,4 --epsilon 0.894427190999916");
    REQUIRE(analytic.exit_code == 0);
    const auto j = nlohmann::json::parse(analytic.output);
    REQUIRE(j.size() == 3);
    CHECK(j[0]["collective"].get<double>() > j[0]["ultimate"].get<double>());
    CHECK_FALSE(j[0].contains("empirical_weighted"));

    const auto mc = run_cli(
        "mse-curve --n 2 --epsilon 0.894427190999916 --nu 2000 --seed 5 --format csv");
    REQUIRE(mc.exit_code == 0);
    CHECK(mc.output.find("empirical_weighted") != std::string::npos);
}

TEST_CASE("output lands in --out files") {
    const std::string path = "cli_out_test.json";
    const auto r = run_cli("spectrum --n 3 --epsilon 0.2 --out " + path);
    REQUIRE(r.exit_code == 0);
    std::ifstream in(path);
    REQUIRE(in.good());
    nlohmann::json j;
    in >> j;
    CHECK(j["N"] == 3);
    std::remove(path.c_str());
}

int main(int argc, char** argv) {
    if (argc > 1) g_binary = argv[1];
    doctest::Context context;
    context.applyCommandLine(argc > 1 ? 1 : argc, argv);
    return context.run();
}
