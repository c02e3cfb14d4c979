// Interface contracts of the command-line binary: determinism of generated
// artifacts, sweep output shape, exit codes, and the no-partial-output rule.

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(CLI_BINARY) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("gen-gge reruns byte-identically") {
    const fs::path dir = fresh_dir("spinobs_cli_det");
    const std::string base = (dir / "ds").string();
    const std::string args = "gen-gge --nc 2 --n 30 --L 8 --seed 7 --out " + base;
    REQUIRE(run(args) == 0);
    const std::string obs = slurp(base + ".obs");
    const std::string meta = slurp(base + ".meta");
    const std::string split = slurp(base + ".split");
    REQUIRE(run(args) == 0);
    CHECK(slurp(base + ".obs") == obs);
    CHECK(slurp(base + ".meta") == meta);
    CHECK(slurp(base + ".split") == split);
    CHECK(meta.find("gen-gge; nc=2") != std::string::npos);  // embedded config
}

TEST_CASE("sweep writes the csv and svg artifacts") {
    const fs::path dir = fresh_dir("spinobs_cli_sweep");
    const std::string base = (dir / "ds").string();
    REQUIRE(run("gen-gge --nc 1 --n 40 --L 8 --seed 5 --out " + base) == 0);
    const std::string out = (dir / "sw").string();
    REQUIRE(run("sweep --data " + base +
                " --nl-list 0,1 --seeds 1 --widths 8 --steps 100 --eval-every 50 --batch 16"
                " --out " + out) == 0);

    const std::string csv = slurp(out + "/sweep.csv");
    std::istringstream lines(csv);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line.rfind("# config: sweep;", 0) == 0);
    REQUIRE(std::getline(lines, line));
    CHECK(line == "n_latent,best_test_loss");
    int rows = 0;
    while (std::getline(lines, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2);

    CHECK(fs::exists(out + "/sweep_runs.csv"));
    const std::string svg = slurp(out + "/sweep.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("best test loss") != std::string::npos);
}

TEST_CASE("usage errors exit 1 without partial outputs") {
    const fs::path dir = fresh_dir("spinobs_cli_usage");
    CHECK(run("gen-gge --no-such-flag") == 1);
    CHECK(run("definitely-not-a-subcommand") == 1);
    CHECK(run("train --data " + (dir / "missing").string()) == 1);

    // Invalid physics parameters fail validation before any file is opened.
    const std::string base = (dir / "bad").string();
    CHECK(run("gen-gge --nc 9 --n 10 --L 8 --out " + base) == 1);
    CHECK_FALSE(fs::exists(base + ".obs"));
    CHECK_FALSE(fs::exists(base + ".meta"));
}

TEST_CASE("reconstruct guard drives the exit code") {
    const fs::path dir = fresh_dir("spinobs_cli_guard");
    const std::string base = (dir / "ds").string();
    REQUIRE(run("gen-gge --nc 1 --n 30 --L 8 --seed 2 --out " + base) == 0);
    const std::string latents = (dir / "latents.csv").string();
    {
        std::ofstream out(latents);
        out << "latent0\n";
        for (int r = 0; r < 30; ++r) out << 0.1 * r << "\n";
    }
    const std::string common = "reconstruct --data " + base + " --latents " + latents;
    // No sweep evidence supplied: refused as a usage error.
    CHECK(run(common) == 1);
    // Evidence present but failing the thermality test: numerical failure.
    CHECK(run(common + " --guard-ratio 0.5") == 2);
}

}  // TEST_SUITE
