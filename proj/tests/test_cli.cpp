#include <doctest.h>

#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "ckidx/dataset_io.hpp"
#include "ckidx/metadata.hpp"
#include "cli.hpp"

using namespace ckidx;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("ckidx_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  [[nodiscard]] std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string gen(const TempDir& dir, const std::string& name, const std::string& count = "3000") {
  const std::string f = dir.file(name);
  const Run r = run({"gen", "--s", "2.5", "--n", "48", "--m", "0", "--count", count, "--seed",
                     "7", "--out", f});
  REQUIRE(r.code == cli::kOk);
  return f;
}

}  // namespace

TEST_CASE("gen") {
  TempDir dir;
  const std::string a = gen(dir, "a.dks");
  const std::string b = gen(dir, "b.dks");
  const KeySet ks = read_dataset_file(a);
  CHECK(ks.size() == 3000);
  CHECK(ks.schema() == Schema({ColumnType::fixed_string(48)}));
  CHECK(read_file_bytes(a) == read_file_bytes(b));

  const Run bad = run({"gen", "--s", "2.5", "--n", "48", "--m", "8", "--count", "10", "--out",
                       dir.file("c.dks")});
  CHECK(bad.code == cli::kUsage);
  CHECK_FALSE(std::filesystem::exists(dir.file("c.dks")));
  CHECK(run({"gen", "--s", "1", "--n", "12", "--count", "10", "--out", dir.file("d.dks")}).code ==
        cli::kUsage);
}

TEST_CASE("usage and runtime errors") {
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  CHECK(run({"stats"}).code == cli::kUsage);
  CHECK(run({"--help"}).code == cli::kOk);
  CHECK(run({"stats", "--data", "/nonexistent/file.dks"}).code == cli::kRuntimeError);
  TempDir dir;
  const std::string data = gen(dir, "d.dks", "100");
  CHECK(run({"bench", "--data", data, "--threads", "1,x"}).code == cli::kUsage);
}

TEST_CASE("build, rebuild, stats and meta inspect") {
  TempDir dir;
  const std::string data = gen(dir, "d.dks");
  const std::string meta = dir.file("m.dsm");
  const Run b = run({"build", "--data", data, "--meta-out", meta, "--json"});
  REQUIRE(b.code == cli::kOk);
  const json bj = json::parse(b.out);
  CHECK(bj["schema_version"] == cli::kJsonSchemaVersion);
  CHECK(bj["method"] == "full");
  CHECK(bj["key_count"] == 3000);

  const Run r = run({"rebuild", "--table", data, "--meta", meta, "--threads", "2", "--json"});
  REQUIRE(r.code == cli::kOk);
  const json rj = json::parse(r.out);
  CHECK(rj["method"] == "compressed");
  CHECK(rj["height"] == bj["height"]);
  CHECK(rj["sort_key_bytes"].get<int>() < bj["sort_key_bytes"].get<int>());

  const Run text = run({"rebuild", "--table", data, "--meta", meta});
  CHECK(text.code == cli::kOk);
  CHECK(text.out.find("compressed") != std::string::npos);

  const Run s = run({"stats", "--data", data, "--meta", meta, "--json"});
  REQUIRE(s.code == cli::kOk);
  const json sj = json::parse(s.out);
  CHECK(sj["full_sort_key_bytes"] == 56);
  CHECK(sj["key_count"] == 3000);

  const Run m = run({"meta", "inspect", "--meta", meta, "--json"});
  REQUIRE(m.code == cli::kOk);
  const json mj = json::parse(m.out);
  CHECK(mj["key_bits"] == 384);
  CHECK(mj["distinction_positions"].size() == sj["distinction_bits"].get<std::size_t>());
  CHECK(run({"meta", "inspect", meta}).code == cli::kOk);
  CHECK(run({"meta", "inspect", "--meta", data}).code == cli::kRuntimeError);

  const Run t = run({"tree", "verify", "--data", data, "--meta", meta});
  CHECK(t.code == cli::kOk);
  CHECK(t.out.find("tree ok") != std::string::npos);
}

TEST_CASE("bench") {
  TempDir dir;
  const std::string data = gen(dir, "d.dks", "2000");
  const std::string out = dir.file("bench.json");
  const Run b = run({"bench", "--data", data, "--threads", "1,2", "--json-out", out});
  REQUIRE(b.code == cli::kOk);
  CHECK(b.out.find("ratio") != std::string::npos);
  const auto bytes = read_file_bytes(out);
  const json j = json::parse(std::string(bytes.begin(), bytes.end()));
  CHECK(j["schema_version"] == cli::kJsonSchemaVersion);
  REQUIRE(j["rows"].size() == 2);
  const json& one = j["rows"][0];
  const json& two = j["rows"][1];
  CHECK(one["identical_scan"] == true);
  CHECK(one["violations"].empty());
  const double ratio = one["full"]["total_seconds"].get<double>() /
                       one["compressed"]["total_seconds"].get<double>();
  CHECK(one["total_time_ratio"].get<double>() == doctest::Approx(ratio));
  CHECK(one["speedup_full"].get<double>() == doctest::Approx(1.0));
  CHECK(two["speedup_full"].get<double>() ==
        doctest::Approx(one["full"]["total_seconds"].get<double>() /
                        two["full"]["total_seconds"].get<double>()));
  CHECK(two["speedup_compressed"].get<double>() ==
        doctest::Approx(one["compressed"]["total_seconds"].get<double>() /
                        two["compressed"]["total_seconds"].get<double>()));
}

TEST_CASE("verify") {
  TempDir dir;
  const std::string data = gen(dir, "d.dks");
  const std::string meta = dir.file("m.dsm");
  REQUIRE(run({"build", "--data", data, "--meta-out", meta}).code == cli::kOk);

  const Run fresh = run({"verify", "--data", data, "--meta", meta});
  CHECK(fresh.code == cli::kOk);
  CHECK(fresh.out.find("FAIL") == std::string::npos);
  CHECK(run({"verify", "--data", data, "--samples", "20"}).code == cli::kOk);

  // Extra positions are safe.
  DSMetadata m = load_file(meta);
  DSMetadata stale = m;
  for (std::size_t i = 0; i < stale.key_bits(); i += 5) {
    stale.dbitmap.set(i);
    stale.variant_bitmap.set(i);
  }
  save_file(stale, dir.file("stale.dsm"));
  CHECK(run({"verify", "--data", data, "--meta", dir.file("stale.dsm")}).code == cli::kOk);

  // A cleared distinction position breaks the order.
  DSMetadata broken = m;
  broken.dbitmap.reset(broken.dbitmap.positions().front());
  save_file(broken, dir.file("broken.dsm"));
  const Run bad = run({"verify", "--data", data, "--meta", dir.file("broken.dsm"), "--json"});
  CHECK(bad.code == cli::kCheckFailed);
  const json bj = json::parse(bad.out);
  CHECK(bj["passed"] == false);
  bool order_failed = false;
  for (const auto& c : bj["checks"]) {
    if (c["check"].get<std::string>().find("compressed") != std::string::npos &&
        c["passed"] == false) {
      order_failed = true;
    }
  }
  CHECK(order_failed);
}
