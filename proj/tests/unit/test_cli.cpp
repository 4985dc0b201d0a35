#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "config.hpp"
#include "runner.hpp"

using namespace gammalab;
using namespace gammalab::cli;
namespace fs = std::filesystem;

namespace {

const std::string kConfigDir = GAMMALAB_CONFIG_DIR;
const std::string kCli = GAMMALAB_CLI_PATH;

const fs::path kScratchRoot = fs::temp_directory_path() / ("gammalab-test-cli-" + std::to_string(::getpid()));

struct ScratchCleanup {
    ~ScratchCleanup() {
        std::error_code ec;
        fs::remove_all(kScratchRoot, ec);
    }
} const cleanup;

fs::path scratch(const std::string& name) {
    const fs::path dir = kScratchRoot / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Outcome {
    int status = -1;
    std::string out;
    std::string err;
};

Outcome run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string command = "'" + kCli + "' " + args + " > '" + out.string() + "' 2> '" + err.string() + "'";
    const int raw = std::system(command.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
}

void write_file(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("shipped configs survive an emit and parse round trip") {
    for (const auto& entry : fs::directory_iterator(kConfigDir)) {
        if (entry.path().extension() != ".yaml") continue;
        CAPTURE(entry.path().string());
        const ExperimentConfig c = load_config(entry.path().string());
        const ExperimentConfig back = parse_config(emit_config(c), "emitted");
        CHECK(back == c);
        CHECK(emit_config(back) == emit_config(c));
    }
}

TEST_CASE("non-default values round trip losslessly") {
    ExperimentConfig c = parse_config("experiment: sweep-eps\n");
    c.seed = 123456789012345ULL;
    c.dimension = 2;
    c.xi = Vec{0.1, -1.0 / 3.0};
    c.nonlocal = DensityDecl{"periodic-kernel-p-difference", {{"kernel", std::string("triangle")}, {"b_max", 2.5}}};
    c.local = DensityDecl{"double-well-1d", {{"delta", 0.07}}};
    c.k_list = {2.0, 4.5};
    c.T_list = {1, 3, 9};
    c.layer = LayerMode::layer;
    c.grid.cells_per_unit = 12;
    c.grid.refinement = 0.25;
    c.grid.two_scale = false;
    c.solver.grad_tol = 1e-9;
    c.solver.restarts = 5;
    c.f0.xi = {Vec{0.1, 0.2}, Vec{std::nextafter(1.0, 2.0), 0.0}};
    c.minimize.eps_period = 0.125;
    const ExperimentConfig back = parse_config(emit_config(c));
    CHECK(back.xi == c.xi);
    CHECK(back.f0.xi == c.f0.xi);
    REQUIRE(back.nonlocal);
    CHECK(back.nonlocal->name == c.nonlocal->name);
    CHECK(std::get<std::string>(back.nonlocal->params.at("kernel")) == "triangle");
    CHECK(std::get<double>(back.nonlocal->params.at("b_max")) == 2.5);
    // Resolution fills in the defaults and the dimension.
    CHECK(std::get<double>(back.nonlocal->params.at("dimension")) == 2.0);
    CHECK(back.local == c.local);
    CHECK(back.minimize == c.minimize);
    // Densities are resolved on parse, so compare after a second pass.
    CHECK(parse_config(emit_config(back)) == back);
}

TEST_CASE("malformed configs name the key and its line") {
    try {
        parse_config("experiment: f0\nf0:\n  kernal: uniform\n", "bad.yaml");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("bad.yaml:3:") != std::string::npos);
        CHECK(what.find("f0.kernal") != std::string::npos);
    }
    CHECK_THROWS_WITH_AS(parse_config("experiment: nope\n"), doctest::Contains("experiment"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("seed: [1]\n"), doctest::Contains("seed"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("solver:\n  armijo_c: 2\n"), doctest::Contains("solver.armijo_c"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("local:\n  name: no-such-density\n"), doctest::Contains("local"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("local:\n  name: double-well-1d\n  params: {gamma: 1}\n"),
                         doctest::Contains("gamma"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config("local:\n  name: kernel-p-difference\n"), doctest::Contains("local"),
                         ConfigError);
    CHECK_THROWS_AS(parse_config("k_list: [4, 2]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("a: [unclosed\n"), ConfigError);
}

TEST_CASE("f0 experiment reproduces the analytic squares") {
    const fs::path dir = scratch("f0");
    ExperimentConfig c = load_config(kConfigDir + "/f0-uniform.yaml");
    const RunResult r = run_experiment(c, dir);
    std::ifstream csv(dir / "f0.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line.rfind("xi,f0", 0) == 0);
    for (double xi : {0.0, 1.0, 2.0, 3.0}) {
        REQUIRE(std::getline(csv, line));
        std::istringstream row(line);
        std::string a, b;
        std::getline(row, a, ',');
        std::getline(row, b, ',');
        CHECK(std::stod(a) == xi);
        CHECK(std::abs(std::stod(b) - xi * xi) <= 1e-8);
    }
    const auto report = nlohmann::json::parse(r.report);
    CHECK(report["experiment"] == "f0");
    CHECK(report["config"]["f0"]["kernel"] == "uniform");
    CHECK(report["version"].get<std::string>().size() > 0);
}

TEST_CASE("validate experiment passes for a built-in") {
    const fs::path dir = scratch("validate");
    const RunResult r = run_experiment(load_config(kConfigDir + "/validate-double-well.yaml"), dir);
    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(report["results"]["all_pass"] == true);
    CHECK(report == nlohmann::json::parse(r.report));
    CHECK(fs::exists(dir / "validate.csv"));
}

TEST_CASE("sweeps are byte-reproducible and mark their verdict") {
    ExperimentConfig c = parse_config(
        "experiment: sweep-eps\nseed: 5\ndimension: 1\n"
        "local: {name: double-well-1d}\n"
        "xi: 0\nk_list: [2, 4]\ngrid: {cells_per_unit: 8, two_scale: false}\n"
        "solver: {restarts: 3}\n");
    const fs::path a = scratch("sweep-a"), b = scratch("sweep-b");
    run_experiment(c, a);
    c.jobs = 2;
    c.solver.jobs = 2;
    const RunResult r = run_experiment(c, b);
    CHECK(slurp(a / "sweep.csv") == slurp(b / "sweep.csv"));
    REQUIRE(r.sweep);
    CHECK(r.sweep->points.size() == 2);
    const auto report = nlohmann::json::parse(r.report);
    CHECK(report["results"].contains("convergent"));
}

TEST_CASE("built-in catalog lists densities and their parameters") {
    const std::string text = builtin_catalog_text();
    CHECK(text.find("double-well-1d") != std::string::npos);
    CHECK(text.find("kernel-p-difference") != std::string::npos);
    const auto at = text.find("periodic-coefficient-local");
    REQUIRE(at != std::string::npos);
    // The entry ends at the next unindented line.
    auto end = text.find('\n', at);
    while (end != std::string::npos && end + 1 < text.size() && text[end + 1] == ' ') end = text.find('\n', end + 1);
    const auto section = text.substr(at, end - at);
    CHECK(section.find("kernel-p-difference") == std::string::npos);
    CHECK(section.find("a_min") != std::string::npos);
    CHECK(section.find("a_max") != std::string::npos);
}

TEST_CASE("the executable reports errors with the failing subcommand") {
    const fs::path dir = scratch("exe");
    const Outcome list = run_cli("list-builtins", dir);
    CHECK(list.status == 0);
    CHECK(list.out.find("double-well-1d") != std::string::npos);

    const Outcome ok = run_cli("f0 -c '" + kConfigDir + "/f0-uniform.yaml' --out '" + (dir / "f0").string() + "'", dir);
    CHECK(ok.status == 0);
    CHECK(fs::exists(dir / "f0" / "f0.csv"));

    write_file(dir / "typo.yaml", "experiment: f0\nf0:\n  pp: 2\n");
    const Outcome typo = run_cli("run -c '" + (dir / "typo.yaml").string() + "'", dir);
    CHECK(typo.status != 0);
    CHECK(typo.err.find("gamma-lab: run: error:") != std::string::npos);
    CHECK(typo.err.find(":3:") != std::string::npos);
    CHECK(typo.err.find("f0.pp") != std::string::npos);

    const Outcome mismatch = run_cli("cell -c '" + kConfigDir + "/f0-uniform.yaml'", dir);
    CHECK(mismatch.status != 0);
    CHECK(mismatch.err.find("gamma-lab: cell: error:") != std::string::npos);

    // Module errors propagate: a cell problem with too few cells per period.
    write_file(dir / "coarse.yaml",
               "experiment: cell\nlocal: {name: periodic-coefficient-local}\nxi: 1\nT: 2\n"
               "grid: {cells_per_unit: 4, two_scale: false}\n");
    const Outcome coarse = run_cli("cell -c '" + (dir / "coarse.yaml").string() + "' --out '" + (dir / "c").string() + "'", dir);
    CHECK(coarse.status != 0);
    CHECK(coarse.err.find("gamma-lab: cell: error:") != std::string::npos);

    CHECK(run_cli("", dir).status != 0);
    CHECK(run_cli("f0", dir).status != 0);
    const Outcome version = run_cli("--version", dir);
    CHECK(version.status == 0);
    CHECK(version.out.find(tool_version()) != std::string::npos);
}
