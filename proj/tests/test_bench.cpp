#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "aliasfree/bench.hpp"
#include "aliasfree/config.hpp"
#include "aliasfree/errors.hpp"

using namespace aliasfree;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

int run_cli(const std::string& args) {
  const char* exe = std::getenv("ALIASBENCH");
  REQUIRE_MESSAGE(exe != nullptr, "ALIASBENCH not set");
  const std::string cmd = std::string(exe) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("aliasfree_bench_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Keeps `per_type` rows of each waveform in bench.csv.
void shrink_bench(const fs::path& dir, std::size_t per_type) {
  const auto all = lines(slurp(dir / "bench.csv"));
  std::string out = all[0] + "\n";
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 1; i < all.size(); ++i) {
    const auto type = all[i].substr(0, all[i].find(','));
    if (seen[type]++ % (48 / per_type) == 0) out += all[i] + "\n";
  }
  std::ofstream(dir / "bench.csv", std::ios::binary) << out;
}

}  // namespace

TEST_CASE("parallel_for visits each index once and rethrows the first failure") {
  for (std::size_t threads : {1u, 3u, 8u}) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, threads, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    try {
      parallel_for(50, threads, [](std::size_t i) {
        if (i == 17 || i == 40) throw std::runtime_error("boom " + std::to_string(i));
      });
      FAIL("expected exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "boom 17");
    }
  }
}

TEST_CASE("write_file_atomic replaces content and leaves no temp file") {
  const auto dir = scratch("atomic");
  write_file_atomic(dir / "a.csv", "one\n");
  write_file_atomic(dir / "a.csv", "two\n");
  CHECK(slurp(dir / "a.csv") == "two\n");
  CHECK(!fs::exists(dir / "a.csv.tmp"));
}

TEST_CASE("gen-bench: counts, metadata and determinism") {
  const auto a = scratch("gen_a"), b = scratch("gen_b"), c = scratch("gen_c");
  REQUIRE(run_cli("gen-bench --out " + a.string()) == 0);
  std::size_t wavs = 0;
  for (const auto& e : fs::directory_iterator(a)) wavs += e.path().extension() == ".wav";
  CHECK(wavs == 144);
  const auto idx = lines(slurp(a / "bench.csv"));
  CHECK(idx.size() == 145);
  CHECK(idx[0] == "type,index,pitch,f0_hz,duration_s,sample_rate,path");

  REQUIRE(run_cli("gen-bench --out " + b.string()) == 0);
  for (const auto& e : fs::directory_iterator(a)) CHECK(slurp(e.path()) == slurp(b / e.path().filename()));

  REQUIRE(run_cli("gen-bench --note-grid chromatic --out " + c.string()) == 0);
  CHECK(read_bench_index(c).size() == 108);
  CHECK(load_bench(c).size() == 108);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  std::ofstream(dir / "empty.cfg") << "\n# nothing\n";
  std::ofstream(dir / "bad.cfg") << "name=x\nkind=elu\nalpha=zero\n";
  CHECK(run_cli("run-activations --bench " + dir.string() + " --configs " + (dir / "empty.cfg").string() +
                " --out " + (dir / "s.csv").string()) == 2);
  CHECK(run_cli("run-activations --bench " + dir.string() + " --configs " + (dir / "bad.cfg").string() +
                " --out " + (dir / "s.csv").string()) == 2);
  CHECK(run_cli("run-activations --bench " + (dir / "missing").string() + " --out " + (dir / "s.csv").string()) == 3);
  CHECK(run_cli("run-upsamplers --bench " + (dir / "missing").string() + " --out " + (dir / "u.csv").string()) == 3);
  CHECK(run_cli("no-such-command --out x") == 2);
  CHECK(run_cli("filter-response --kind designed --N 1 --out " + (dir / "r.csv").string()) == 2);
}

TEST_CASE("run-activations on a reduced benchmark") {
  const auto bench = scratch("acts_bench");
  gen_bench(bench, NoteGrid::LogUniform48);
  shrink_bench(bench, 3);
  const auto out = scratch("acts_out");
  std::ofstream(out / "cfg.txt") << "name=lrelu\nkind=leaky_relu\nslope=0.1\n\n"
                                    "name=ours\nkind=adaa_snakebeta\noversample=2\n\n"
                                    "name=generic_elu\nkind=adaa_generic\nbase=elu\ngroup=oversampling\n";
  const std::string args = "run-activations --bench " + bench.string() + " --configs " + (out / "cfg.txt").string();
  REQUIRE(run_cli(args + " --out " + (out / "a.csv").string()) == 0);
  REQUIRE(run_cli(args + " --threads 3 --out " + (out / "b.csv").string()) == 0);

  const auto summary = lines(slurp(out / "a.csv"));
  REQUIRE(summary.size() == 3);
  CHECK(summary[0] == "module,Sine,Sawtooth,Triangle,Average");
  CHECK(summary[1].rfind("lrelu,", 0) == 0);
  CHECK(lines(slurp(out / "a_oversampling.csv")).size() == 2);
  const auto per = lines(slurp(out / "a_per_signal.csv"));
  CHECK(per[0] == "module_name,config_hash,waveform,f0_hz,ahr_db");
  CHECK(per.size() == 1 + 3 * 9);
  CHECK(slurp(out / "a.csv") == slurp(out / "b.csv"));
  CHECK(slurp(out / "a_per_signal.csv") == slurp(out / "b_per_signal.csv"));

  const auto manifest = nlohmann::json::parse(slurp(out / "a_manifest.json"));
  CHECK(manifest["configs"].size() == 3);
  CHECK(manifest["signal_count"] == 9);
  CHECK(manifest["bench_hash"].get<std::string>().size() == 16);
  for (const auto& e : fs::directory_iterator(out)) CHECK(e.path().extension() != ".tmp");
}

TEST_CASE("run-upsamplers: only ConvTranspose depends on the seed count") {
  const auto bench = scratch("ups_bench");
  gen_bench(bench, NoteGrid::LogUniform48);
  shrink_bench(bench, 2);
  const auto out = scratch("ups_out");
  RunOptions opts;
  const auto one = run_upsamplers(bench, 2, 1, out / "one.csv", opts);
  const auto three = run_upsamplers(bench, 2, 3, out / "three.csv", opts);
  REQUIRE(one.size() == 4);
  CHECK(one[0].runs.size() == 1);
  CHECK(three[0].runs.size() == 3);
  CHECK(three[0].seed_std_db >= 0.0);
  CHECK(std::isnan(one[1].seed_std_db));
  const auto a = lines(slurp(out / "one.csv")), b = lines(slurp(out / "three.csv"));
  CHECK(a[0] == "module,Sine,Sawtooth,Triangle,Average,Average_prior_on,tonal_probe_db,seed_std_db");
  for (std::size_t i = 2; i < 5; ++i) CHECK(a[i] == b[i]);
  CHECK(a[2].find(",NA,") != std::string::npos);
  CHECK(a[4].find(",NA") == a[4].size() - 3);  // only seed_std_db is NA for the resampler
}

TEST_CASE("filter-response CLI") {
  const auto out = scratch("resp");
  const auto read_mag = [&](const fs::path& p) {
    std::vector<std::pair<double, double>> rows;
    const auto ls = lines(slurp(p));
    for (std::size_t i = 1; i < ls.size(); ++i) {
      double w, m, db, ph;
      std::sscanf(ls[i].c_str(), "%lf,%lf,%lf,%lf", &w, &m, &db, &ph);
      rows.emplace_back(w, db);
    }
    return rows;
  };
  REQUIRE(run_cli("filter-response --kind linear --N 2 --out " + (out / "lin.csv").string()) == 0);
  auto lin = read_mag(out / "lin.csv");
  CHECK(lin.size() == 4096);
  CHECK(lin.back().first == 1.0);
  CHECK(lin.back().second <= -250.0);
  CHECK(fs::exists(out / "lin_ideal.csv"));

  REQUIRE(run_cli("filter-response --kind nearest --N 1 --out " + (out / "near.csv").string()) == 0);
  auto near = read_mag(out / "near.csv");
  CHECK(near.front().second - near.back().second == doctest::Approx(20 * std::log10(3.0)).epsilon(1e-6));

  REQUIRE(run_cli("filter-response --kind designed --N 2 --out " + (out / "des.csv").string()) == 0);
  for (const auto& [w, db] : read_mag(out / "des.csv")) {
    if (w >= 0.5 + 0.025 / 2) CHECK(db <= -97.0);
  }
}

TEST_CASE("sweep CLI writes six panels") {
  const auto out = scratch("sweep");
  REQUIRE(run_cli("sweep --out " + out.string()) == 0);
  std::size_t pgm = 0, csv = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    pgm += e.path().extension() == ".pgm";
    csv += e.path().extension() == ".csv" && e.path().filename() != "sweep_summary.csv";
  }
  CHECK(pgm == 6);
  CHECK(csv == 6);
  const auto summary = lines(slurp(out / "sweep_summary.csv"));
  REQUIRE(summary.size() == 7);
  CHECK(summary[1].rfind("no_activation,", 0) == 0);
}
