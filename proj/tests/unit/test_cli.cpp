#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fieldlink/analytics/report.hpp"
#include "fieldlink/tools/cli.hpp"
#include "unit_support.hpp"

using namespace fieldlink;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = tools::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::string config_for(const testing::TempDir& dir) {
  const auto path = dir / "config.json";
  std::ofstream(path) << nlohmann::json{{"data_dir", (dir / "data").string()}, {"password_hashing", "minimal"}}.dump();
  return path.string();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 2") {
    CHECK(cli({}).code == tools::kExitUsage);
    const auto r = cli({"frobnicate"});
    CHECK(r.code == tools::kExitUsage);
    CHECK(r.err.find("usage error") != std::string::npos);
    CHECK(cli({"index"}).code == tools::kExitUsage);
    CHECK(cli({"index", "--image", "/no/such/file.png"}).code == tools::kExitUsage);
    CHECK(cli({"--help"}).code == tools::kExitOk);
  }

  TEST_CASE("index summarises an image and writes a heatmap") {
    testing::TempDir dir;
    write_bytes(dir / "gray.png", testing::png_bytes(testing::solid_image(8, 8, 90, 90, 90)));
    const auto r = cli({"index", "--image", (dir / "gray.png").string(), "--kind", "grvi", "--out",
                        (dir / "heat.png").string()});
    REQUIRE(r.code == tools::kExitOk);
    const auto summary = nlohmann::json::parse(r.out);
    CHECK(summary["mean"] == 0.0);
    CHECK(fs::exists(dir / "heat.png"));
    CHECK(cli({"index", "--image", (dir / "gray.png").string(), "--kind", "ndvi"}).code == tools::kExitUsage);
  }

  TEST_CASE("module errors exit with 1 and name the code") {
    testing::TempDir dir;
    std::ofstream(dir / "junk.png") << "not an image";
    const auto r = cli({"index", "--image", (dir / "junk.png").string()});
    CHECK(r.code == tools::kExitDomainError);
    CHECK(r.err.rfind("error: DecodeError", 0) == 0);
  }

  TEST_CASE("train, evaluate and predict on a toy dataset") {
    testing::TempDir dir;
    testing::write_dataset_dir(testing::color_patch_dataset(4, 16, 3), dir / "set");
    const auto model = (dir / "m.bin").string();
    const auto trained = cli({"train", "--data", (dir / "set").string(), "--out", model, "--arch", "compact",
                              "--epochs", "30", "--batch-size", "4", "--learning-rate", "0.01", "--seed", "1",
                              "--no-augment"});
    INFO(trained.err);
    REQUIRE(trained.code == tools::kExitOk);
    CHECK(trained.out.find("written to") != std::string::npos);
    CHECK(fs::exists(model));

    const auto eval = cli({"evaluate", "--model", model, "--data", (dir / "set").string()});
    REQUIRE(eval.code == tools::kExitOk);
    CHECK(eval.out.rfind("class,precision,recall,f1\n", 0) == 0);
    CHECK(std::count(eval.out.begin(), eval.out.end(), '\n') >= 7);

    write_bytes(dir / "leaf.png", testing::png_bytes(testing::solid_image(16, 16, 40, 160, 30)));
    const auto pred = cli({"predict", "--model", model, "--image", (dir / "leaf.png").string()});
    REQUIRE(pred.code == tools::kExitOk);
    CHECK(pred.out.rfind("class,probability\n", 0) == 0);
    CHECK(pred.out.find("\ntop,") != std::string::npos);

    std::ofstream(dir / "bad.bin") << "garbage";
    CHECK(cli({"evaluate", "--model", (dir / "bad.bin").string(), "--data", (dir / "set").string()}).code ==
          tools::kExitDomainError);
  }

  TEST_CASE("seed and stats export through a config") {
    testing::TempDir dir;
    const auto config = config_for(dir);
    const auto seeded = cli({"seed", "--fixture", "downloads", "--config", config, "--days", "15", "--seed", "4"});
    REQUIRE(seeded.code == tools::kExitOk);
    CHECK(seeded.out == "recorded 15 days of downloads\n");

    const auto csv = (dir / "usage.csv").string();
    REQUIRE(cli({"stats", "--out", csv, "--config", config}).code == tools::kExitOk);
    CHECK(analytics::parse_usage_csv(read_text(csv)) == analytics::UsageStats{});

    const auto png = (dir / "trend.png").string();
    REQUIRE(cli({"stats", "--out", png, "--config", config}).code == tools::kExitOk);
    CHECK(fs::file_size(png) > 0);

    const auto wrong = cli({"stats", "--out", (dir / "usage.txt").string(), "--config", config});
    CHECK(wrong.code == tools::kExitDomainError);
    CHECK(wrong.err.rfind("error: InvalidArgument", 0) == 0);
    CHECK(cli({"seed", "--fixture", "goats", "--config", config}).code == tools::kExitUsage);
  }
}
