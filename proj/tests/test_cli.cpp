#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace {

struct Result {
    int code;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(ANNULUS_MODULI_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

int run_stderr(const std::string& args, std::string& err) {
    const std::string cmd = std::string(ANNULUS_MODULI_CLI_PATH) + " " + args + " 2>&1 >/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) err.append(buf, n);
    const int status = pclose(p);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

std::filesystem::path scratch(const std::string& name) {
    const auto d = std::filesystem::temp_directory_path() / "annulus_moduli_cli_test";
    std::filesystem::create_directories(d);
    return d / name;
}

}  // namespace

TEST(Cli, EvalCsvHasMetadataAndSeventeenDigits) {
    const auto r = run("eval eta --tau 1");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "# eval=eta tau=1\nvalue\n0.76822542232605662\n");
}

TEST(Cli, EvalJson) {
    const auto r = run("eval cle-mgf --lambda 0 --kappa 3 --j 2 --format json");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["meta"]["eval"], "cle-mgf");
    EXPECT_NEAR(j["rows"][0][0].get<double>(), 1.0, 1e-15);
}

TEST(Cli, UsageErrorsExitTwo) {
    std::string err;
    EXPECT_EQ(run_stderr("eval nonexistent", err), 2);
    EXPECT_NE(err.find("Usage"), std::string::npos);
    EXPECT_EQ(run("eval eta").code, 2);
    EXPECT_EQ(run("eval eta --tau abc").code, 2);
    EXPECT_EQ(run("eval eta --tau -1").code, 2);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("sample ba --a 1 --b 2").code, 2);
    EXPECT_EQ(run("verify --suite nope").code, 2);
    EXPECT_EQ(run("density unknown").code, 2);
}

TEST(Cli, DensityWritesAtomically) {
    const auto path = scratch("ba.csv");
    std::filesystem::remove(path);
    ASSERT_EQ(run("density ba --a 1 --b 2.5 --grid 0.01,5,200 --out " + path.string()).code, 0);
    const std::string s = slurp(path);
    EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    EXPECT_EQ(s.rfind("# density=ba a=1 b=2.5 grid=0.01,5,200 mass=", 0), 0u);
    EXPECT_NE(s.find("\nx,density\n"), std::string::npos);
    std::size_t lines = 0;
    for (char c : s) lines += c == '\n';
    EXPECT_EQ(lines, 202u);
}

TEST(Cli, SampleIsReproducible) {
    const auto a = run("sample ba --a 1 --b 2.5 --n 5 --seed 8");
    const auto b = run("sample ba --a 1 --b 2.5 --n 5 --seed 8");
    const auto c = run("sample ba --a 1 --b 2.5 --n 5 --seed 9");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, c.out);
}

TEST(Cli, McPathsReportsClosedForm) {
    const auto r = run("mc paths --a 0 --theta 1 --samples 200 --dt 1e-3 --seed 3");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("quantity,estimate,std_error,closed_form"), std::string::npos);
}

TEST(Cli, McGmcRatioJson) {
    const auto r = run("mc gmc-ratio --gamma 1 --tau 1 --x 0.5,1 --samples 64 --n-boundary 128 --seed 2");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["estimates"].size(), 2u);
    EXPECT_EQ(j["n_samples"], 64);
}

TEST(Cli, VerifyReportIsByteStableWithoutTimings) {
    const auto p1 = scratch("r1.json"), p2 = scratch("r2.json");
    ASSERT_EQ(run("verify --suite specfun --no-timing --json " + p1.string()).code, 0);
    ASSERT_EQ(run("verify --suite specfun --no-timing --json " + p2.string()).code, 0);
    const std::string a = slurp(p1);
    EXPECT_EQ(a, slurp(p2));
    const auto j = nlohmann::json::parse(a);
    EXPECT_EQ(j["summary"]["failed"], 0);
    for (const auto& c : j["checks"]) {
        EXPECT_EQ(c["suite"], "specfun");
        EXPECT_FALSE(c.contains("seconds"));
    }
}

TEST(Cli, VerifyFailureExitsOne) {
    const auto r = run("verify --suite specfun --tol 01_special_functions=1e-30");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("FAIL 01_special_functions"), std::string::npos);
}
