// Runs the textcue binary as a subprocess.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kBin = TC_CLI_PATH;
const std::string kFixtures = TC_FIXTURE_DIR;

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = kBin + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

fs::path scratch() {
  const auto d = fs::temp_directory_path() / "tc_cli_test";
  fs::create_directories(d);
  return d;
}

// Raster payload of a binary PPM written by the tool.
std::string ppm_pixels(const fs::path& p, int& w, int& h) {
  std::istringstream in(slurp(p));
  std::string magic;
  int maxval = 0;
  in >> magic >> w >> h >> maxval;
  in.get();
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("usage errors exit 64") {
  CHECK(run("crop --no-such-flag x").code == 64);
  CHECK(run("").code == 64);
  CHECK(run("frobnicate").code == 64);
  CHECK(run("--help").code == 0);
}

TEST_CASE("crop: golden plan, byte-stable, atomic --out") {
  const std::string args = kFixtures + "/e2e/dump.tcad --words " + kFixtures +
                           "/e2e/words.jsonl --m 1 --n 2";
  const auto a = run("crop " + args);
  const auto b = run("crop " + args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == slurp(kFixtures + "/e2e/expected_plan.json"));

  const auto out = scratch() / "plan.json";
  REQUIRE(run("crop " + args + " --out " + out.string()).code == 0);
  CHECK(slurp(out) == a.out);
  CHECK_FALSE(fs::exists(out.string() + ".tmp"));
}

TEST_CASE("crop: fallback and error exits") {
  const std::string dump = kFixtures + "/e2e/dump.tcad";
  const auto r = run("crop " + dump + " --m 1 --n 2");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["refinement"] == "fallback");

  CHECK(run("crop " + dump).code == 5);  // default window needs 27 layers
  CHECK(run("crop " + dump + " --m 1 --n 2 --enlarge 0.0001").code == 3);
  CHECK(run("crop /nonexistent.tcad").code == 6);

  const auto trunc = scratch() / "trunc.tcad";
  const auto bytes = slurp(dump);
  std::ofstream(trunc, std::ios::binary) << bytes.substr(0, bytes.size() - 10);
  CHECK(run("crop " + trunc.string() + " --m 1 --n 2").code == 1);

  // Grid 6x5 over 36 tokens.
  auto shaped = bytes;
  shaped[6 + 4 * 3] = 5;
  const auto bad = scratch() / "shape.tcad";
  std::ofstream(bad, std::ios::binary) << shaped;
  CHECK(run("crop " + bad.string() + " --m 1 --n 2").code == 2);
}

TEST_CASE("crop: overlay image") {
  const auto dir = scratch();
  {
    std::ofstream f(dir / "page.ppm", std::ios::binary);
    f << "P6\n1344 1008\n255\n" << std::string(1344 * 1008 * 3, '\x20');
  }
  const auto r = run("crop " + kFixtures + "/e2e/dump.tcad --words " + kFixtures +
                     "/e2e/words.jsonl --m 1 --n 2 --overlay-image " + (dir / "page.ppm").string() +
                     " --overlay-out " + (dir / "overlay.png").string());
  CHECK(r.code == 0);
  CHECK(fs::file_size(dir / "overlay.png") > 0);
}

TEST_CASE("eval --mode cot reproduces the bucket table") {
  const auto r = run("eval " + kFixtures + "/harness/manifest.jsonl " + kFixtures +
                     "/harness/responses.jsonl --mode cot");
  REQUIRE(r.code == 0);
  const auto got = json::parse(r.out);
  const auto want = json::parse(slurp(kFixtures + "/harness/expected_cot.json"));
  CHECK(got["overall"]["correct"] == want["overall"][0]);
  CHECK(got["overall"]["total"] == want["overall"][1]);
  for (const char* table : {"by_subset", "gen_by_type_count", "gen_by_tag", "real_by_tag",
                            "by_layout", "by_font"}) {
    for (const auto& [k, v] : want[table].items()) {
      INFO(table << "/" << k);
      CHECK(got[table][k]["correct"] == v[0]);
      CHECK(got[table][k]["total"] == v[1]);
    }
  }
  CHECK(got["unparsed"] == want["unparsed"]);
  CHECK(got["missing"] == want["missing"]);

  CHECK(run("judge " + kFixtures + "/harness/manifest.jsonl " + kFixtures +
            "/harness/responses.jsonl").code == 15);
}

TEST_CASE("rotate 90 four times is bit-identical") {
  const auto dir = scratch();
  std::string px;
  for (int i = 0; i < 5 * 3 * 3; ++i) px.push_back(static_cast<char>(i * 11));
  std::ofstream(dir / "in.ppm", std::ios::binary) << "P6\n5 3\n255\n" << px;
  REQUIRE(run("rotate " + (dir / "in.ppm").string() + " " + (dir / "r1.png").string() + " --deg 90").code == 0);
  REQUIRE(run("rotate " + (dir / "r1.png").string() + " " + (dir / "r2.png").string() + " --deg 90").code == 0);
  REQUIRE(run("rotate " + (dir / "r2.png").string() + " " + (dir / "r3.png").string() + " --deg 90").code == 0);
  REQUIRE(run("rotate " + (dir / "r3.png").string() + " " + (dir / "r4.ppm").string() + " --deg 90").code == 0);
  int w = 0, h = 0;
  CHECK(ppm_pixels(dir / "r4.ppm", w, h) == px);
  CHECK(w == 5);
  CHECK(h == 3);
  CHECK(run("rotate " + (dir / "in.ppm").string() + " " + (dir / "x.png").string() + " --deg 45").code == 14);
}

TEST_CASE("ocr, stats, dedup and prompt subcommands") {
  const auto dir = scratch();
  std::ofstream(dir / "pred.jsonl") << R"({"id":"a","text":"kitten"})" << "\n";
  std::ofstream(dir / "ref.jsonl") << R"({"id":"a","text":"sitting"})" << "\n"
                                   << R"({"id":"b","text":"extra line"})" << "\n";
  auto r = run("ocr " + (dir / "pred.jsonl").string() + " " + (dir / "ref.jsonl").string());
  REQUIRE(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["count"] == 2);
  CHECK(j["missing_predictions"] == 1);
  CHECK(j["edit_distance"].get<double>() == doctest::Approx((3.0 / 7.0 + 1.0) / 2.0));

  r = run("stats " + kFixtures + "/harness/manifest.jsonl");
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["total"] == 10);

  {
    std::ofstream f(dir / "e.tcem", std::ios::binary);
    f.write("TCEM", 4);
    const uint16_t ver = 1;
    const uint32_t n = 3, dim = 2;
    const float v[] = {1, 0, 0.99f, 0.01f, 0, 1};
    f.write(reinterpret_cast<const char*>(&ver), 2);
    f.write(reinterpret_cast<const char*>(&n), 4);
    f.write(reinterpret_cast<const char*>(&dim), 4);
    f.write(reinterpret_cast<const char*>(v), sizeof v);
  }
  std::ofstream(dir / "e_ids.jsonl") << "\"p\"\n\"q\"\n\"r\"\n";
  r = run("dedup " + (dir / "e.tcem").string() + " " + (dir / "e_ids.jsonl").string() +
          " --threshold 0.95");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["kept"] == json::array({"p", "r"}));

  r = run("prompt --list");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("gen.image.cot\n") != std::string::npos);
  r = run("prompt generic.instruction");
  CHECK(r.out == "Write a general description of the image.\n");
}
