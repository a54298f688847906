#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include <json.hpp>

#include "udderid/dataset_io.hpp"

#ifndef UDDERID_CLI
#error "UDDERID_CLI must point at the command-line binary"
#endif

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(UDDERID_CLI) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (const std::size_t got = fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("udderid_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& f : fs::recursive_directory_iterator(root)) {
    if (f.is_regular_file()) out[fs::relative(f.path(), root).string()] = slurp(f.path());
  }
  return out;
}

int line_count(const std::string& text) { return static_cast<int>(std::count(text.begin(), text.end(), '\n')); }

TEST(Cli, SynthWritesManifestAndIsDeterministic) {
  const fs::path a = scratch("synth_a");
  const fs::path b = scratch("synth_b");
  const RunResult ra = run("synth --count 75 --seed 5 --out " + a.string());
  ASSERT_EQ(ra.exit_code, 0) << ra.output;
  EXPECT_NE(ra.output.find("config: "), std::string::npos);
  ASSERT_EQ(run("synth --count 75 --seed 5 --out " + b.string()).exit_code, 0);

  const udderid::Manifest m = udderid::load_manifest(a / "collection1.json");
  EXPECT_EQ(m.entries.size(), 150u);
  EXPECT_EQ(tree_contents(a), tree_contents(b));

  const fs::path c = scratch("synth_c");
  ASSERT_EQ(run("synth --count 75 --seed 6 --out " + c.string()).exit_code, 0);
  EXPECT_NE(tree_contents(a), tree_contents(c));
}

TEST(Cli, SynthRejectsEmptyHerd) {
  const fs::path dir = scratch("synth_zero");
  EXPECT_NE(run("synth --count 0 --out " + dir.string()).exit_code, 0);
}

TEST(Cli, SynthTwoCollections) {
  const fs::path dir = scratch("synth_two");
  ASSERT_EQ(run("synth --count 10 --collections 2 --shared 4 --out " + dir.string()).exit_code, 0);
  const udderid::Manifest m1 = udderid::load_manifest(dir / "collection1.json");
  const udderid::Manifest m2 = udderid::load_manifest(dir / "collection2.json");
  EXPECT_EQ(m2.collection, 2);
  EXPECT_EQ(m2.entries.size(), 20u);
  int shared = 0;
  for (const auto& e : m2.entries) {
    for (const auto& f : m1.entries) shared += e.cow_id == f.cow_id && e.day == f.day;
  }
  EXPECT_EQ(shared, 8);
}

TEST(Cli, ExtractAndMissingAnnotation) {
  const fs::path dir = scratch("extract");
  ASSERT_EQ(run("synth --count 1 --images --out " + dir.string()).exit_code, 0);
  const RunResult r = run("extract --manifest " + (dir / "collection1.json").string() + " --layout combined-89 --out " +
                          (dir / "f.csv").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const std::string csv = slurp(dir / "f.csv");
  EXPECT_EQ(line_count(csv), 3);
  EXPECT_NE(csv.find(",f88\n"), std::string::npos);

  const udderid::Manifest m = udderid::load_manifest(dir / "collection1.json");
  fs::remove(m.entries[1].annotation);
  const RunResult bad = run("extract --manifest " + (dir / "collection1.json").string() + " --out " +
                            (dir / "g.csv").string());
  EXPECT_NE(bad.exit_code, 0);
  EXPECT_NE(bad.output.find(m.entries[1].cow_id), std::string::npos) << bad.output;
  EXPECT_NE(bad.output.find("day 2"), std::string::npos) << bad.output;
}

TEST(Cli, EvaluateAllAlgorithmsIsReproducible) {
  const fs::path dir = scratch("evaluate");
  ASSERT_EQ(run("synth --count 12 --out " + dir.string()).exit_code, 0);
  const std::string base = "evaluate --manifest " + (dir / "collection1.json").string() +
                           " --algorithm all --n 2,5,12 --trials 4 --out ";
  const RunResult r1 = run(base + (dir / "r1.csv").string());
  ASSERT_EQ(r1.exit_code, 0) << r1.output;
  ASSERT_EQ(run(base + (dir / "r2.csv").string() + " --threads 3").exit_code, 0);
  const std::string csv = slurp(dir / "r1.csv");
  EXPECT_EQ(line_count(csv), 1 + 5 * 3);
  EXPECT_EQ(csv, slurp(dir / "r2.csv"));
  for (const char* alg : {"knn,", "logreg,", "svm,", "tree,", "forest,"}) {
    EXPECT_NE(csv.find(std::string("\n") + alg), std::string::npos) << alg;
  }
  const auto config = r1.output.find("config: ");
  ASSERT_NE(config, std::string::npos);
  const auto cfg = nlohmann::json::parse(r1.output.substr(config + 8, r1.output.find('\n', config) - config - 8));
  EXPECT_EQ(cfg["seed"], 42);
  EXPECT_EQ(cfg["trials"], 4);
}

TEST(Cli, EvaluateFromFeatureCsv) {
  const fs::path dir = scratch("evaluate_csv");
  ASSERT_EQ(run("synth --count 6 --out " + dir.string()).exit_code, 0);
  ASSERT_EQ(run("extract --manifest " + (dir / "collection1.json").string() + " --out " + (dir / "f.csv").string())
                .exit_code,
            0);
  const RunResult from_manifest = run("evaluate --manifest " + (dir / "collection1.json").string() +
                                      " --n 3,6 --trials 5 --out " + (dir / "a.csv").string());
  const RunResult from_csv =
      run("evaluate --features " + (dir / "f.csv").string() + " --n 3,6 --trials 5 --out " + (dir / "b.csv").string());
  ASSERT_EQ(from_manifest.exit_code, 0) << from_manifest.output;
  ASSERT_EQ(from_csv.exit_code, 0) << from_csv.output;
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));

  EXPECT_EQ(run("evaluate --out " + (dir / "c.csv").string()).exit_code, 2);
  EXPECT_NE(run("evaluate --features " + (dir / "f.csv").string() + " --n 7 --out " + (dir / "c.csv").string()).exit_code,
            0);
}

TEST(Cli, EnrollIdentify) {
  const fs::path dir = scratch("enroll");
  ASSERT_EQ(run("synth --count 8 --out " + dir.string()).exit_code, 0);
  const std::string manifest = (dir / "collection1.json").string();
  ASSERT_EQ(run("enroll --manifest " + manifest + " --out " + (dir / "model.json").string()).exit_code, 0);
  const RunResult r = run("identify --model " + (dir / "model.json").string() + " --manifest " + manifest +
                          " --out " + (dir / "pred.csv").string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const std::string csv = slurp(dir / "pred.csv");
  EXPECT_EQ(line_count(csv), 9);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "cow_id,collection,day,predicted,correct");
}

}  // namespace
