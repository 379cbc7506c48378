// Acceptance checklist for the whole toolkit. Each case verifies one
// end-to-end property and prints a single [PASS]/[FAIL] line with the
// measured numbers, so running this binary produces a readable report.
// The same checklist is documented in README.md.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gazeload/dataset.hpp"
#include "gazeload/eval.hpp"
#include "gazeload/fft.hpp"
#include "gazeload/forest.hpp"
#include "gazeload/ivt.hpp"
#include "gazeload/matrix.hpp"
#include "gazeload/mlp.hpp"
#include "gazeload/pipeline.hpp"
#include "gazeload/preprocess.hpp"
#include "gazeload/rng.hpp"
#include "gazeload/serve.hpp"
#include "gazeload/stream.hpp"
#include "gazeload/synth.hpp"
#include "gazeload/types.hpp"
#include "oracle_forest.hpp"
#include "oracle_ivt.hpp"

using namespace gazeload;
using nlohmann::json;

namespace {

bool verdict(int n, const std::string& what, bool pass) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", n, what.c_str());
  std::fflush(stdout);
  return pass;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The O(N^2) transform definition, evaluated directly.
std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0, 0);
    for (size_t j = 0; j < n; ++j) {
      double ang = -2.0 * std::numbers::pi * static_cast<double>(j * k) / static_cast<double>(n);
      acc += x[j] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

std::string record_line(const GazeSample& s) {
  nlohmann::ordered_json o;
  o["t"] = s.timestamp_us;
  o["lx"] = s.left_dir.x;
  o["ly"] = s.left_dir.y;
  o["lz"] = s.left_dir.z;
  o["rx"] = s.right_dir.x;
  o["ry"] = s.right_dir.y;
  o["rz"] = s.right_dir.z;
  o["lp"] = s.left_pupil_mm;
  o["rp"] = s.right_pupil_mm;
  o["lv"] = s.left_valid ? 1 : 0;
  o["rv"] = s.right_valid;
  return o.dump();
}

std::vector<std::string> split_lines(const std::string& blob) {
  std::vector<std::string> out;
  std::istringstream in(blob);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

// Response equality modulo latency, which is wall-clock and never stable.
bool same_responses(const std::string& got_blob, const std::string& want_blob) {
  auto got = split_lines(got_blob), want = split_lines(want_blob);
  if (got.size() != want.size()) return false;
  for (size_t i = 0; i < got.size(); ++i) {
    json a = json::parse(got[i], nullptr, false);
    json b = json::parse(want[i], nullptr, false);
    if (a.is_discarded() || b.is_discarded()) return false;
    a.erase("latency_us");
    b.erase("latency_us");
    if (a != b) return false;
  }
  return true;
}

struct TcpClient {
  int fd = -1;

  explicit TcpClient(uint16_t port) {
    fd = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
  }
  ~TcpClient() {
    if (fd >= 0) ::close(fd);
  }

  void send_all(const std::string& data) {
    size_t off = 0;
    while (off < data.size()) {
      ssize_t k = ::send(fd, data.data() + off, data.size() - off, 0);
      REQUIRE(k > 0);
      off += static_cast<size_t>(k);
    }
  }
  void finish_writing() { ::shutdown(fd, SHUT_WR); }

  std::string read_all() {
    std::string out;
    char buf[4096];
    for (;;) {
      ssize_t k = ::recv(fd, buf, sizeof(buf), 0);
      if (k <= 0) break;
      out.append(buf, static_cast<size_t>(k));
    }
    return out;
  }
};

}  // namespace

// ---------------------------------------------------------------------------

TEST_CASE("criterion 1: separable cohort reaches 0.90 on both models in time") {
  PipelineConfig cfg;
  cfg.cohort.n_low = 10;
  cfg.cohort.n_high = 10;
  cfg.cohort.effect = 1.0;
  cfg.seed = 7;
  cfg.out_dir = "/tmp/gazeload_accept_c1";

  const auto t0 = std::chrono::steady_clock::now();
  PipelineResult res = run_pipeline(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  char msg[256];
  std::snprintf(msg, sizeof(msg),
                "effect 1.0, seed 7 -> MLP %.4f, RF %.4f test accuracy (floor 0.90) in %.0f s "
                "(limit 600)",
                res.mlp_report.accuracy, res.rf_report.accuracy, secs);
  const bool pass =
      res.mlp_report.accuracy >= 0.90 && res.rf_report.accuracy >= 0.90 && secs < 600.0;
  CHECK_MESSAGE(verdict(1, msg, pass), msg);
}

TEST_CASE("criterion 2: zero-effect cohort stays at chance level") {
  PipelineConfig cfg;
  cfg.cohort.n_low = 10;
  cfg.cohort.n_high = 10;
  cfg.cohort.effect = 0.0;
  cfg.seed = 7;
  cfg.out_dir = "/tmp/gazeload_accept_c2";

  PipelineResult res = run_pipeline(cfg);

  auto chance = [](double a) { return 0.40 <= a && a <= 0.60; };
  char msg[256];
  std::snprintf(msg, sizeof(msg),
                "effect 0.0, seed 7 -> MLP %.4f, RF %.4f test accuracy, both within [0.40, 0.60]",
                res.mlp_report.accuracy, res.rf_report.accuracy);
  const bool pass = chance(res.mlp_report.accuracy) && chance(res.rf_report.accuracy);
  CHECK_MESSAGE(verdict(2, msg, pass), msg);
}

TEST_CASE("criterion 3: analytic gradients match central finite differences") {
  MlpConfig mc;
  mc.hidden_sizes = {8, 6};
  mc.seed = 21;
  MlpModel m = mlp_init(mc, 6);

  Rng rng(22);
  Matrix X(7, 6);
  for (double& v : X.a) v = rng.normal();
  std::vector<double> y;
  for (size_t r = 0; r < 7; ++r) y.push_back(static_cast<double>(rng.bounded(2)));
  const MlpGradients g = mlp_backward(m, X, y);

  struct Slot {
    size_t layer, r, c;
    bool bias;
  };
  std::vector<Slot> params;
  for (size_t l = 0; l < m.layer_count(); ++l) {
    for (size_t r = 0; r < m.weights[l].rows; ++r)
      for (size_t c = 0; c < m.weights[l].cols; ++c) params.push_back({l, r, c, false});
    for (size_t c = 0; c < m.biases[l].size(); ++c) params.push_back({l, 0, c, true});
  }
  rng.shuffle(params);
  REQUIRE(params.size() >= 100);

  const double h = 1e-5;
  double worst = 0.0;
  for (size_t i = 0; i < 100; ++i) {
    const Slot& p = params[i];
    double& slot = p.bias ? m.biases[p.layer][p.c] : m.weights[p.layer].at(p.r, p.c);
    const double saved = slot;
    slot = saved + h;
    const double lp = mlp_backward(m, X, y).loss;
    slot = saved - h;
    const double lm = mlp_backward(m, X, y).loss;
    slot = saved;

    const double numeric = (lp - lm) / (2.0 * h);
    const double analytic = p.bias ? g.db[p.layer][p.c] : g.dW[p.layer].at(p.r, p.c);
    const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
    worst = std::max(worst, std::abs(numeric - analytic) / denom);
  }

  char msg[160];
  std::snprintf(msg, sizeof(msg),
                "max relative gradient error %.2e over 100 random parameters (limit 1e-4)", worst);
  CHECK_MESSAGE(verdict(3, msg, worst < 1e-4), msg);
}

TEST_CASE("criterion 4: transform matches the naive definition for every length") {
  double worst_fwd = 0.0, worst_rt = 0.0;
  for (size_t n = 1; n <= 512; ++n) {
    Rng rng(4000 + n);
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);

    const auto fast = dft_forward(x);
    const auto slow = naive_dft(x);
    REQUIRE(fast.size() == n);
    for (size_t k = 0; k < n; ++k) worst_fwd = std::max(worst_fwd, std::abs(fast[k] - slow[k]));

    const auto back = dft_inverse_real(fast);
    REQUIRE(back.size() == n);
    for (size_t k = 0; k < n; ++k) worst_rt = std::max(worst_rt, std::abs(back[k] - x[k]));
  }

  char msg[160];
  std::snprintf(msg, sizeof(msg),
                "lengths 1..512: max forward error %.2e, max round-trip error %.2e (limit 1e-9)",
                worst_fwd, worst_rt);
  CHECK_MESSAGE(verdict(4, msg, worst_fwd < 1e-9 && worst_rt < 1e-9), msg);
}

TEST_CASE("criterion 5: fixation grouping matches brute force, floor and recovery hold") {
  const IvtConfig icfg;
  size_t mismatches = 0, grouped = 0, floor_violations = 0;

  for (uint64_t seed = 0; seed < 500; ++seed) {
    oracle::StreamBuilder b = oracle::random_stream(seed);
    const auto labels = classify_points(angular_velocity(b.session), icfg);
    const auto got = group_fixations(b.session, labels, b.pupil, icfg);
    const auto want = oracle::ref_group(b.session, labels, b.pupil, icfg);
    if (!oracle::events_equal(got, want)) ++mismatches;
    for (const auto& e : got)
      if (e.duration_ms < icfg.min_fixation_ms) ++floor_violations;
    grouped += got.size();
  }
  for (uint64_t seed = 0; seed < 500; ++seed) {
    GazeSession session;
    PupilChannels pupil;
    std::vector<PointLabel> labels;
    oracle::random_label_case(seed + 90000, session, pupil, labels);
    const auto got = group_fixations(session, labels, pupil, icfg);
    const auto want = oracle::ref_group(session, labels, pupil, icfg);
    if (!oracle::events_equal(got, want)) ++mismatches;
    for (const auto& e : got)
      if (e.duration_ms < icfg.min_fixation_ms) ++floor_violations;
    grouped += got.size();
  }

  // Ground-truth recovery: detect on generated sessions and match each truth
  // episode to a detection within two samples on both boundaries.
  size_t recovered = 0, total = 0;
  for (uint64_t seed : {10ull, 20ull, 30ull}) {
    SynthConfig sc;
    sc.duration_s = 40;
    sc.seed = seed;
    const SynthSession s = generate_session(sc);
    PupilChannels raw;
    for (const auto& g : s.session.samples) {
      raw.left.push_back(g.left_pupil_mm);
      raw.right.push_back(g.right_pupil_mm);
    }
    const auto detected = detect_fixations(s.session, raw, icfg);
    for (const auto& e : detected)
      if (e.duration_ms < icfg.min_fixation_ms) ++floor_violations;
    auto diff = [](size_t a, size_t b) { return a > b ? a - b : b - a; };
    for (const auto& t : s.truth) {
      ++total;
      for (const auto& d : detected) {
        if (diff(d.sample_range.first, t.sample_range.first) <= 2 &&
            diff(d.sample_range.second, t.sample_range.second) <= 2) {
          ++recovered;
          break;
        }
      }
    }
  }
  const double recovery =
      total > 0 ? static_cast<double>(recovered) / static_cast<double>(total) : 0.0;

  char msg[256];
  std::snprintf(msg, sizeof(msg),
                "1000 random streams: %zu grouping mismatches over %zu events; %zu fixations "
                "under 60 ms; truth recovery %.1f%% of %zu (floor 95%%)",
                mismatches, grouped, floor_violations, 100.0 * recovery, total);
  const bool pass =
      mismatches == 0 && grouped > 1000 && floor_violations == 0 && recovery >= 0.95 && total > 300;
  CHECK_MESSAGE(verdict(5, msg, pass), msg);
}

TEST_CASE("criterion 6: root split equals exhaustive best-gini search") {
  size_t checked = 0, mismatches = 0;
  std::string first_bad;
  auto tally = [&](const std::string& err) {
    ++checked;
    if (!err.empty()) {
      ++mismatches;
      if (first_bad.empty()) first_bad = err;
    }
  };

  // Every dataset with 2..4 rows, 1..2 features, values in {0,1,2}, and
  // every binary labeling of it.
  for (size_t n = 2; n <= 4; ++n) {
    for (size_t f = 1; f <= 2; ++f) {
      size_t value_combos = 1;
      for (size_t i = 0; i < n * f; ++i) value_combos *= 3;
      const size_t label_combos = size_t{1} << n;
      for (size_t v = 0; v < value_combos; ++v) {
        Matrix X(n, f);
        size_t acc = v;
        for (size_t i = 0; i < n * f; ++i) {
          X.a[i] = static_cast<double>(acc % 3);
          acc /= 3;
        }
        for (size_t l = 0; l < label_combos; ++l) {
          std::vector<int> labels(n);
          for (size_t i = 0; i < n; ++i) labels[i] = (l >> i) & 1 ? 1 : 0;
          tally(oracle::compare_root(X, labels));
        }
      }
    }
  }

  // Randomized fill of the full envelope: up to 8 rows and 3 features, with
  // both heavily tied discrete values and continuous ones.
  Rng rng(616);
  for (int t = 0; t < 10000; ++t) {
    const size_t n = 2 + rng.bounded(7);
    const size_t f = 1 + rng.bounded(3);
    Matrix X(n, f);
    const bool discrete = rng.uniform() < 0.5;
    for (double& v : X.a)
      v = discrete ? 0.25 * static_cast<double>(rng.bounded(5)) : rng.uniform(0.0, 1.0);
    std::vector<int> labels(n);
    for (int& lb : labels) lb = static_cast<int>(rng.bounded(2));
    tally(oracle::compare_root(X, labels));
  }

  char msg[256];
  std::snprintf(msg, sizeof(msg),
                "%zu datasets up to 8 rows x 3 features: %zu root-split mismatches%s%s", checked,
                mismatches, first_bad.empty() ? "" : "; first: ", first_bad.c_str());
  CHECK_MESSAGE(verdict(6, msg, mismatches == 0 && checked > 100000), msg);
}

TEST_CASE("criterion 7: metric arithmetic reproduces the definitional values") {
  const EvalReport r = report_from_counts(84, 16, 6, 94);
  const bool pass = std::abs(r.accuracy - 0.89) < 1e-4 && std::abs(r.precision - 0.84) < 1e-4 &&
                    std::abs(r.recall - 0.9333) < 1e-4 && std::abs(r.f1 - 0.8842) < 1e-4;
  char msg[200];
  std::snprintf(msg, sizeof(msg),
                "tp=84 fp=16 fn=6 tn=94 -> %.4f/%.4f/%.4f/%.4f vs 0.89/0.84/0.9333/0.8842 "
                "(tolerance 1e-4)",
                r.accuracy, r.precision, r.recall, r.f1);
  CHECK_MESSAGE(verdict(7, msg, pass), msg);
}

TEST_CASE("criterion 8: window count equals floor((N-W)/S)+1 across a random sweep") {
  Rng rng(808);
  const size_t trials = 500;
  size_t mismatches = 0;
  for (size_t t = 0; t < trials; ++t) {
    const size_t W = 1 + rng.bounded(64);
    const size_t S = 1 + rng.bounded(W);  // stride within [1, W]
    const size_t N = W + rng.bounded(1000);
    AlignedChannels ch;
    ch.ch1.resize(N);
    ch.ch2.resize(N);
    for (size_t i = 0; i < N; ++i) {
      ch.ch1[i] = rng.uniform();
      ch.ch2[i] = rng.uniform();
    }
    WindowConfig wc;
    wc.window_len = W;
    wc.stride = S;
    const WindowedDataset ds = make_windows(ch, 0, "g", wc);
    if (ds.rows() != (N - W) / S + 1) ++mismatches;
  }
  char msg[160];
  std::snprintf(msg, sizeof(msg), "%zu random (N, W, S) shapes: %zu count mismatches", trials,
                mismatches);
  CHECK_MESSAGE(verdict(8, msg, mismatches == 0), msg);
}

TEST_CASE("criterion 9: streaming service matches batch counts, latency and isolation") {
  // Replay one generated session through the service loop and compare the
  // number of emitted predictions with the batch windowing of that session.
  SynthConfig sc;
  sc.duration_s = 30;
  sc.seed = 33;
  const SynthSession synth = generate_session(sc);
  const size_t n_samples = synth.session.samples.size();

  const PupilChannels channels = preprocess_pupil(synth.session, PreprocessConfig{});
  const auto events = detect_fixations(synth.session, channels, IvtConfig{});
  const AlignedChannels aligned = sample_aligned_channels(synth.session, events);
  const size_t batch_rows = make_windows(aligned, 0, "p", WindowConfig{}).rows();

  StreamConfig scfg;  // defaults match WindowConfig: 2000-sample window, 500 stride
  MlpConfig mc;
  mc.seed = 5;
  auto model = std::make_shared<const Predictor>(
      Predictor::from_mlp(mlp_init(mc, 2 * scfg.window_len)));

  std::ostringstream replay_in;
  for (const auto& s : synth.session.samples) replay_in << record_line(s) << "\n";
  std::istringstream in(replay_in.str());
  std::ostringstream out;
  const auto t0 = std::chrono::steady_clock::now();
  run_connection(in, out, model, scfg);
  const double us_per_sample =
      std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count() /
      static_cast<double>(n_samples);
  const size_t streamed = split_lines(out.str()).size();

  // Two interleaved connections against the TCP front end must produce the
  // same records as replaying each client alone. A shorter window keeps the
  // per-connection traffic interesting.
  StreamConfig tcp_cfg;
  tcp_cfg.window_len = 400;
  tcp_cfg.stride = 100;
  MlpConfig tcp_mc;
  tcp_mc.hidden_sizes = {16};
  tcp_mc.seed = 6;
  auto tcp_model = std::make_shared<const Predictor>(
      Predictor::from_mlp(mlp_init(tcp_mc, 2 * tcp_cfg.window_len)));

  SynthConfig sa;
  sa.duration_s = 8;
  sa.seed = 31;
  SynthConfig sb;
  sb.duration_s = 6;
  sb.seed = 32;
  std::vector<std::string> lines_a, lines_b;
  for (const auto& s : generate_session(sa).session.samples) lines_a.push_back(record_line(s));
  for (const auto& s : generate_session(sb).session.samples) lines_b.push_back(record_line(s));
  lines_b.insert(lines_b.begin() + 200, R"({"t": 123})");  // missing-fields error record

  auto join = [](const std::vector<std::string>& v, size_t from, size_t to) {
    std::string out_s;
    for (size_t i = from; i < to && i < v.size(); ++i) {
      out_s += v[i];
      out_s += '\n';
    }
    return out_s;
  };

  auto isolated = [&](const std::vector<std::string>& lines) {
    std::istringstream iso_in(join(lines, 0, lines.size()));
    std::ostringstream iso_out;
    run_connection(iso_in, iso_out, tcp_model, tcp_cfg);
    return iso_out.str();
  };
  const std::string want_a = isolated(lines_a);
  const std::string want_b = isolated(lines_b);

  ServeHandle server("127.0.0.1", 0, tcp_model, tcp_cfg);
  TcpClient ca(server.port());
  TcpClient cb(server.port());
  const size_t third_a = lines_a.size() / 3, third_b = lines_b.size() / 3;
  for (size_t k = 0; k < 3; ++k) {
    const bool last = k == 2;
    ca.send_all(join(lines_a, k * third_a, last ? lines_a.size() : (k + 1) * third_a));
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    cb.send_all(join(lines_b, k * third_b, last ? lines_b.size() : (k + 1) * third_b));
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  ca.finish_writing();
  cb.finish_writing();
  const std::string got_a = ca.read_all();
  const std::string got_b = cb.read_all();
  server.stop();

  const bool isolation_ok = same_responses(got_a, want_a) && same_responses(got_b, want_b);
  char msg[256];
  std::snprintf(msg, sizeof(msg),
                "%zu streamed predictions == %zu batch windows; %.0f us per sample (limit 1000); "
                "interleaved connections %s isolated replays",
                streamed, batch_rows, us_per_sample, isolation_ok ? "==" : "!=");
  const bool pass =
      streamed == batch_rows && batch_rows > 0 && us_per_sample < 1000.0 && isolation_ok;
  CHECK_MESSAGE(verdict(9, msg, pass), msg);
}

TEST_CASE("criterion 10: a fixed seed gives byte-identical artifacts across runs") {
  namespace fs = std::filesystem;
  const std::string dir_a = "/tmp/gazeload_accept_c10a";
  const std::string dir_b = "/tmp/gazeload_accept_c10b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  const std::string args =
      " pipeline --synthetic --n-low 3 --n-high 3 --duration-s 40"
      " --epochs 20 --grid small --seed 42 --out-dir ";
  const int rc_a =
      std::system(("'" GAZELOAD_BIN "'" + args + "'" + dir_a + "' > /dev/null 2>&1").c_str());
  const int rc_b =
      std::system(("'" GAZELOAD_BIN "'" + args + "'" + dir_b + "' > /dev/null 2>&1").c_str());

  const std::vector<std::string> artifacts = {"dataset.glds",     "mlp.glmn",   "rf.glrf",
                                              "grid_scores.csv",  "report.csv", "report.txt"};
  size_t identical = 0;
  std::string first_diff;
  for (const auto& f : artifacts) {
    const std::string a = slurp(dir_a + "/" + f);
    const std::string b = slurp(dir_b + "/" + f);
    if (!a.empty() && a == b)
      ++identical;
    else if (first_diff.empty())
      first_diff = f;
  }

  char msg[200];
  std::snprintf(msg, sizeof(msg),
                "two seed-42 runs: %zu/%zu artifacts byte-identical%s%s (exit codes %d, %d)",
                identical, artifacts.size(), first_diff.empty() ? "" : "; first difference: ",
                first_diff.c_str(), rc_a, rc_b);
  const bool pass = rc_a == 0 && rc_b == 0 && identical == artifacts.size();
  CHECK_MESSAGE(verdict(10, msg, pass), msg);
}
