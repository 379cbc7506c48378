#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gazeload/dataset.hpp"
#include "gazeload/forest.hpp"
#include "gazeload/ivt.hpp"
#include "gazeload/mlp.hpp"
#include "gazeload/preprocess.hpp"
#include "gazeload/session_io.hpp"
#include "gazeload/types.hpp"

using namespace gazeload;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CmdResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
  REQUIRE(out.good());
}

// Runs the installed binary with the given arguments; optional stdin file and
// extra environment prefix (e.g. "GAZELOAD_LOG=info").
CmdResult run_cmd(const std::vector<std::string>& args, const std::string& stdin_path = "",
                  const std::string& env = "") {
  static int invocation = 0;
  const fs::path out_path = fs::temp_directory_path() / ("gazeload_cli_out_" +
                                                         std::to_string(++invocation));
  const fs::path err_path = out_path.string() + ".err";
  std::string cmd;
  if (!env.empty()) cmd += env + " ";
  cmd += "'" GAZELOAD_BIN "'";
  for (const std::string& a : args) {
    REQUIRE(a.find('\'') == std::string::npos);
    cmd += " '" + a + "'";
  }
  if (!stdin_path.empty()) cmd += " < '" + stdin_path + "'";
  cmd += " > '" + out_path.string() + "' 2> '" + err_path.string() + "'";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  CmdResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -2;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  fs::remove(out_path);
  fs::remove(err_path);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small synthetic cohort on disk; returns the output directory.
fs::path synth_dir(const std::string& name, size_t n_low, size_t n_high, double duration_s,
                   uint64_t seed) {
  const fs::path dir = fresh_dir(name);
  CmdResult r = run_cmd({"synth", "--out-dir", dir.string(), "--n-low", std::to_string(n_low),
                         "--n-high", std::to_string(n_high), "--duration-s",
                         std::to_string(duration_s), "--seed", std::to_string(seed)});
  REQUIRE(r.code == 0);
  return dir;
}

size_t line_count(const std::string& s) {
  size_t n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("help and version exit zero; bad invocations exit one") {
  CmdResult help = run_cmd({"--help"});
  CHECK(help.code == 0);
  for (const char* sub : {"synth", "preprocess", "fixations", "dataset", "train-mlp", "train-rf",
                          "evaluate", "serve", "pipeline", "rerun"})
    CHECK(help.out.find(sub) != std::string::npos);

  CmdResult version = run_cmd({"--version"});
  CHECK(version.code == 0);
  CHECK(version.out.find("0.1.0") != std::string::npos);

  CHECK(run_cmd({}).code == 1);                                // subcommand required
  CHECK(run_cmd({"frobnicate"}).code == 1);                    // unknown subcommand
  CHECK(run_cmd({"synth"}).code == 1);                         // missing required --out-dir
  CHECK(run_cmd({"synth", "--out-dir", "/tmp/x", "--bogus"}).code == 1);
  CHECK(run_cmd({"fixations", "--in", "a", "--manifest", "b"}).code == 1);  // missing --out
}

TEST_CASE("unreadable input data exits two with an error message") {
  CmdResult r = run_cmd({"fixations", "--in", "/tmp/gazeload_no_such.csv", "--manifest",
                         "/tmp/gazeload_no_such.txt", "--out", "/tmp/gazeload_cli_fix.csv"});
  CHECK(r.code == 2);
  CHECK(r.err.find("error:") != std::string::npos);

  CmdResult mism = run_cmd({"dataset", "--in", "/tmp/a.csv", "--in", "/tmp/b.csv", "--manifest",
                            "/tmp/a.txt", "--out", "/tmp/gazeload_cli_ds.glds"});
  CHECK(mism.code == 1);  // --in/--manifest count mismatch is a usage error
}

TEST_CASE("synth writes one csv, manifest, and truth file per participant") {
  const fs::path dir = fresh_dir("gazeload_cli_synth");
  CmdResult r = run_cmd({"synth", "--out-dir", dir.string(), "--n-low", "2", "--n-high", "1",
                         "--duration-s", "4", "--seed", "3"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("wrote 3 sessions") != std::string::npos);
  for (const char* pid : {"P01", "P02", "P03"}) {
    CHECK(fs::exists(dir / (std::string(pid) + ".csv")));
    CHECK(fs::exists(dir / (std::string(pid) + ".manifest.txt")));
    CHECK(fs::exists(dir / (std::string(pid) + ".truth.csv")));
  }
  CHECK(fs::exists(dir / "run_manifest.json"));

  // load one back and sanity-check the trimmed session
  GazeSession s = load_session((dir / "P01.csv").string(), (dir / "P01.manifest.txt").string());
  CHECK(s.meta.participant_id == "P01");
  CHECK(s.samples.size() == 800);  // 4 s at 200 Hz

  const fs::path no_truth = fresh_dir("gazeload_cli_synth_nt");
  REQUIRE(run_cmd({"synth", "--out-dir", no_truth.string(), "--n-low", "1", "--n-high", "0",
                   "--duration-s", "4", "--no-truth"})
              .code == 0);
  CHECK(fs::exists(no_truth / "P01.csv"));
  CHECK_FALSE(fs::exists(no_truth / "P01.truth.csv"));
}

TEST_CASE("fixations subcommand reproduces the library result byte for byte") {
  const fs::path dir = synth_dir("gazeload_cli_fix", 1, 0, 6.0, 11);
  const fs::path out = dir / "fixations.csv";
  CmdResult r = run_cmd({"fixations", "--in", (dir / "P01.csv").string(), "--manifest",
                         (dir / "P01.manifest.txt").string(), "--out", out.string(),
                         "--ivt-threshold", "25", "--min-fixation-ms", "80"});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(out.string() + ".run.json"));

  GazeSession session =
      trim_pre_task(load_session((dir / "P01.csv").string(), (dir / "P01.manifest.txt").string()));
  PupilChannels pupil = preprocess_pupil(session, PreprocessConfig{});
  IvtConfig ivt;
  ivt.velocity_threshold_deg_s = 25;
  ivt.min_fixation_ms = 80;
  auto events = detect_fixations(session, pupil, ivt);
  REQUIRE(!events.empty());
  const fs::path ref = dir / "fixations_ref.csv";
  save_fixations_csv(events, ref.string());
  CHECK(slurp(out) == slurp(ref));
}

TEST_CASE("dataset subcommand windows, exports csv, and splits like the library") {
  const fs::path dir = synth_dir("gazeload_cli_ds", 1, 1, 6.0, 11);
  const fs::path all_p = dir / "all.glds";
  const fs::path csv_p = dir / "all.csv";
  const fs::path tr_p = dir / "train.glds";
  const fs::path te_p = dir / "test.glds";
  CmdResult r = run_cmd({"dataset", "--in", (dir / "P01.csv").string(), "--manifest",
                         (dir / "P01.manifest.txt").string(), "--in", (dir / "P02.csv").string(),
                         "--manifest", (dir / "P02.manifest.txt").string(), "--out", all_p.string(),
                         "--csv", csv_p.string(), "--window-len", "400", "--stride", "200",
                         "--split", "window", "--test-fraction", "0.2", "--out-train",
                         tr_p.string(), "--out-test", te_p.string(), "--seed", "7"});
  REQUIRE(r.code == 0);

  WindowedDataset all = load_dataset(all_p.string());
  CHECK(all.rows() == 10);  // (1200 - 400) / 200 + 1 = 5 windows per session
  CHECK(all.inputs.cols == 800);
  CHECK(line_count(slurp(csv_p)) == 11);  // header + one line per window

  WindowedDataset tr = load_dataset(tr_p.string());
  WindowedDataset te = load_dataset(te_p.string());
  CHECK(tr.rows() + te.rows() == all.rows());
  auto [rtr, rte] = split(all, SplitMode::WindowRandom, 0.2, 7);
  CHECK(tr.rows() == rtr.rows());
  CHECK(te.rows() == rte.rows());
  CHECK(te.inputs.a == rte.inputs.a);  // same seed -> same split, bit for bit
  CHECK(tr.inputs.a == rtr.inputs.a);
  CHECK(tr.labels == rtr.labels);
  CHECK(te.groups == rte.groups);

  // --split demands both output paths
  CHECK(run_cmd({"dataset", "--in", (dir / "P01.csv").string(), "--manifest",
                 (dir / "P01.manifest.txt").string(), "--out", all_p.string(), "--split",
                 "window"})
            .code == 1);
}

TEST_CASE("train, evaluate, and serve consume the dataset artifacts") {
  const fs::path dir = synth_dir("gazeload_cli_train", 1, 1, 6.0, 19);
  const fs::path all_p = dir / "all.glds";
  REQUIRE(run_cmd({"dataset", "--in", (dir / "P01.csv").string(), "--manifest",
                   (dir / "P01.manifest.txt").string(), "--in", (dir / "P02.csv").string(),
                   "--manifest", (dir / "P02.manifest.txt").string(), "--out", all_p.string(),
                   "--window-len", "400", "--stride", "200"})
              .code == 0);

  const fs::path mlp_p = dir / "model.glmn";
  CmdResult tm = run_cmd({"train-mlp", "--data", all_p.string(), "--out", mlp_p.string(),
                          "--hidden", "8,4", "--epochs", "2", "--batch", "4", "--lr", "0.001",
                          "--seed", "5"});
  REQUIRE(tm.code == 0);
  MlpModel mlp = load_mlp(mlp_p.string());
  CHECK(mlp.input_dim == 800);
  CHECK(mlp.weights.size() == 3);
  CHECK(mlp.epoch_loss.size() == 2);

  const fs::path grid_p = dir / "grid.cfg";
  spit(grid_p,
       "n_trees=5\nmax_depth=4\nmin_samples_split=2\nmin_samples_leaf=1\n"
       "max_features=sqrt\nbootstrap=true\n");
  const fs::path rf_p = dir / "model.glrf";
  const fs::path scores_p = dir / "scores.csv";
  CmdResult trf = run_cmd({"train-rf", "--data", all_p.string(), "--out", rf_p.string(), "--grid",
                           grid_p.string(), "--scores", scores_p.string(), "--folds", "3",
                           "--seed", "5"});
  REQUIRE(trf.code == 0);
  CHECK(trf.out.find("searched 1 combinations") != std::string::npos);
  ForestModel rf = load_forest(rf_p.string());
  CHECK(rf.n_features == 800);
  CHECK(rf.trees.size() == 5);
  CHECK(line_count(slurp(scores_p)) == 2);  // header + one combination

  const fs::path report_p = dir / "report.csv";
  CmdResult ev = run_cmd({"evaluate", "--model", mlp_p.string(), "--data", all_p.string(), "--csv",
                          report_p.string()});
  REQUIRE(ev.code == 0);
  CHECK(ev.out.find("Model  Accuracy  Precision  Recall  F1") != std::string::npos);
  CHECK(slurp(report_p).find("model,accuracy,precision,recall,f1\nMLP,") == 0);
  CHECK(run_cmd({"evaluate", "--model", rf_p.string(), "--data", all_p.string()}).code == 0);
  // a dataset is not a model
  CHECK(run_cmd({"evaluate", "--model", all_p.string(), "--data", all_p.string()}).code == 2);

  // serve in pipe mode: model input must match 2 * window_len = 800
  std::ostringstream feed;
  for (int i = 1; i <= 450; ++i) {
    nlohmann::ordered_json o;
    o["t"] = 5000 * i;
    o["lx"] = 0.0;
    o["ly"] = 0.0;
    o["lz"] = 1.0;
    o["rx"] = 0.0;
    o["ry"] = 0.0;
    o["rz"] = 1.0;
    o["lp"] = 3.0 + 0.001 * (i % 7);
    o["rp"] = 3.0;
    o["lv"] = 1;
    o["rv"] = 1;
    feed << o.dump() << '\n';
  }
  feed << "garbage\n";
  const fs::path in_p = dir / "stream_in.jsonl";
  spit(in_p, feed.str());
  CmdResult sv = run_cmd({"serve", "--model", mlp_p.string(), "--address", "stdio",
                          "--window-len", "400", "--stride", "25"},
                         in_p.string());
  REQUIRE(sv.code == 0);
  auto lines = [&] {
    std::vector<std::string> v;
    std::istringstream in(sv.out);
    std::string l;
    while (std::getline(in, l))
      if (!l.empty()) v.push_back(l);
    return v;
  }();
  REQUIRE(lines.size() == (450 - 400) / 25 + 1 + 1);  // windows + trailing error record
  const json first = json::parse(lines.front());
  CHECK(first["t_end"] == 5000 * 400);
  CHECK(first.contains("p_high"));
  CHECK(json::parse(lines.back())["error"] == "unparseable record");
}

TEST_CASE("pipeline reruns bit-identically under a fixed seed") {
  const fs::path grid_p = fs::temp_directory_path() / "gazeload_cli_pl_grid.cfg";
  spit(grid_p,
       "n_trees=20,40\nmax_depth=5\nmin_samples_split=2\nmin_samples_leaf=1\n"
       "max_features=sqrt\nbootstrap=true\n");
  auto run_into = [&](const std::string& name) {
    const fs::path dir = fresh_dir(name);
    CmdResult r = run_cmd({"pipeline", "--synthetic", "--n-low", "2", "--n-high", "2",
                           "--duration-s", "30", "--window-len", "600", "--stride", "300",
                           "--epochs", "3", "--batch", "32", "--lr", "0.001", "--grid",
                           grid_p.string(), "--seed", "13", "--out-dir", dir.string()});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("Model  Accuracy") != std::string::npos);
    return dir;
  };
  const fs::path a = run_into("gazeload_cli_pl_a");
  const fs::path b = run_into("gazeload_cli_pl_b");
  for (const char* f :
       {"dataset.glds", "mlp.glmn", "rf.glrf", "grid_scores.csv", "report.csv", "report.txt"}) {
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  // manifests differ only in the recorded --out-dir argument
  json ma = json::parse(slurp(a / "run_manifest.json"));
  json mb = json::parse(slurp(b / "run_manifest.json"));
  ma["argv"] = json::array();
  mb["argv"] = json::array();
  CHECK(ma == mb);
}

TEST_CASE("rerun replays the manifest argv and reproduces the outputs") {
  const fs::path dir = synth_dir("gazeload_cli_rerun", 1, 1, 4.0, 23);
  const std::string before = slurp(dir / "P02.csv");
  REQUIRE(!before.empty());
  fs::remove(dir / "P02.csv");

  CmdResult r = run_cmd({"rerun", "--manifest", (dir / "run_manifest.json").string()});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "P02.csv") == before);

  // a manifest that replays another rerun is refused
  const fs::path loop_p = dir / "loop.json";
  spit(loop_p, R"({"argv": ["rerun", "--manifest", "x"]})");
  CHECK(run_cmd({"rerun", "--manifest", loop_p.string()}).code == 2);
  CHECK(run_cmd({"rerun", "--manifest", (dir / "nope.json").string()}).code == 2);
  const fs::path not_manifest = dir / "not_manifest.json";
  spit(not_manifest, R"({"hello": 1})");
  CHECK(run_cmd({"rerun", "--manifest", not_manifest.string()}).code == 2);
}

TEST_CASE("GAZELOAD_LOG raises verbosity on stderr only") {
  const fs::path dir = synth_dir("gazeload_cli_log", 1, 1, 6.0, 29);
  const fs::path out = dir / "all.glds";
  std::vector<std::string> args = {"dataset", "--in", (dir / "P01.csv").string(),
                                   "--manifest", (dir / "P01.manifest.txt").string(),
                                   "--in", (dir / "P02.csv").string(),
                                   "--manifest", (dir / "P02.manifest.txt").string(),
                                   "--out", out.string(),
                                   "--window-len", "400", "--stride", "400"};
  CmdResult quiet = run_cmd(args);
  REQUIRE(quiet.code == 0);
  CHECK(quiet.err.find("[gazeload debug]") == std::string::npos);

  CmdResult loud = run_cmd(args, "", "GAZELOAD_LOG=debug");
  REQUIRE(loud.code == 0);
  CHECK(loud.err.find("[gazeload debug]") != std::string::npos);
  CHECK(loud.out == quiet.out);  // logging never contaminates stdout
}
