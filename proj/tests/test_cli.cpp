#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "lptv/image_io.hpp"
#include "lptv/serialization.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace lptv;

namespace {

struct Workdir {
  fs::path dir;
  Workdir() {
    dir = fs::temp_directory_path() / "lptv_cli_tests";
    fs::remove_all(dir);
    fs::create_directories(dir);
    save_grayscale(Image(oracle::piecewise_constant_phantom(64, 64)), dir / "truth.png");
  }
  fs::path operator/(const std::string& name) const { return dir / name; }
};

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + LPTV_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int line_count(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

nlohmann::json without_timing(nlohmann::json j) {
  j.erase("timestamp");
  j.erase("wall_ms");
  return j;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("degrade, deblur and metrics end to end") {
    const Workdir w;
    const std::string truth = (w / "truth.png").string();
    REQUIRE(run("degrade --input " + truth + " --kernel gaussian:9:2 --bsnr 30 --seed 4 --output " +
                (w / "obs.png").string() + " --raw " + (w / "obs.f64").string()) == 0);
    CHECK(fs::exists(w / "obs.png.kernel.json") == false);
    const auto manifest = read_json(w / "obs.manifest.json");
    CHECK(manifest["noise_generator"] == "mt19937_64+box-muller/v1");
    CHECK(std::abs(manifest["empirical_bsnr"].get<double>() - 30.0) <= 0.5);
    CHECK(read_kernel(w / "obs.kernel.json").size() == 9);

    REQUIRE(run("deblur --input " + (w / "obs.f64").string() + " --kernel " +
                (w / "obs.kernel.json").string() + " --mu 2 --bsnr 30 --reference " + truth +
                " --output " + (w / "rest.png").string()) == 0);
    const auto summary = read_json(w / "rest.manifest.json")["summary"];
    CHECK(summary["terminated_by"] == "tolerance");
    CHECK(summary["config"]["beta"].get<double>() == 0.009);
    CHECK(summary["psnr"].get<double>() > manifest["degraded_vs_truth"]["psnr"].get<double>());
    CHECK(line_count(w / "rest.trace.csv") == summary["iterations"].get<int>() + 1);

    CHECK(run("metrics " + truth + " " + (w / "rest.png").string()) == 0);
  }

  TEST_CASE("degrade manifests are reproducible apart from timing") {
    const Workdir w;
    const std::string base = "degrade --input " + (w / "truth.png").string() +
                             " --kernel gaussian:5:1 --bsnr 20 --seed 9 --output ";
    REQUIRE(run(base + (w / "a.png").string() + " --manifest " + (w / "m.json").string()) == 0);
    const auto first = read_json(w / "m.json");
    REQUIRE(run(base + (w / "a.png").string() + " --manifest " + (w / "m.json").string()) == 0);
    CHECK(without_timing(first) == without_timing(read_json(w / "m.json")));
  }

  TEST_CASE("--max-iter 1 stops by the cap with a single trace row") {
    const Workdir w;
    REQUIRE(run("deblur --input " + (w / "truth.png").string() +
                " --kernel gaussian:9:2 --mu 2 --beta 0.009 --max-iter 1 --output " +
                (w / "one.png").string()) == 0);
    const auto summary = read_json(w / "one.manifest.json")["summary"];
    CHECK(summary["terminated_by"] == "max_iter");
    CHECK(summary["iterations"] == 1);
    CHECK(line_count(w / "one.trace.csv") == 2);
  }

  TEST_CASE("--p 1 (convex TV) converges") {
    const Workdir w;
    REQUIRE(run("degrade --input " + (w / "truth.png").string() +
                " --kernel gaussian:9:2 --bsnr 30 --output " + (w / "obs.png").string()) == 0);
    REQUIRE(run("deblur --input " + (w / "obs.png").string() + " --kernel " +
                (w / "obs.kernel.json").string() + " --mu 0.05 --beta 0.009 --p 1 --accelerated --output " +
                (w / "tv.png").string()) == 0);
    CHECK(read_json(w / "tv.manifest.json")["summary"]["terminated_by"] == "tolerance");
  }

  TEST_CASE("failures leave no outputs behind") {
    const Workdir w;
    CHECK(run("degrade --input " + (w / "missing.png").string() + " --bsnr 30 --output " +
              (w / "x.png").string()) != 0);
    CHECK_FALSE(fs::exists(w / "x.png"));
    CHECK_FALSE(fs::exists(w / "x.manifest.json"));

    // A kernel larger than the image fails after argument parsing.
    CHECK(run("degrade --input " + (w / "truth.png").string() +
              " --kernel gaussian:65:3 --bsnr 30 --output " + (w / "y.png").string()) == 2);
    CHECK_FALSE(fs::exists(w / "y.png"));
    CHECK_FALSE(fs::exists(w / "y.kernel.json"));

    CHECK(run("deblur --input " + (w / "truth.png").string() +
              " --kernel delta --mu 1 --output " + (w / "z.png").string()) == 2);
    CHECK_FALSE(fs::exists(w / "z.png"));
  }
}
