#include "gazeload/forest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "gazeload/binio.hpp"
#include "gazeload/error.hpp"

namespace gazeload {
namespace {

constexpr char kForestMagic[5] = "GLRF";
constexpr uint32_t kForestVersion = 1;

double gini_from_counts(size_t n0, size_t n1) {
  const double n = static_cast<double>(n0 + n1);
  const double p0 = static_cast<double>(n0) / n;
  const double p1 = static_cast<double>(n1) / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

size_t features_per_node(MaxFeatures mf, size_t d) {
  switch (mf) {
    case MaxFeatures::Sqrt:
      return std::max<size_t>(1, static_cast<size_t>(std::sqrt(static_cast<double>(d))));
    case MaxFeatures::Log2:
      return std::max<size_t>(1, static_cast<size_t>(std::log2(static_cast<double>(d))));
    case MaxFeatures::All:
      return d;
  }
  return d;
}

struct BestSplit {
  bool found = false;
  size_t feature = 0;
  double threshold = 0.0;
  double gain = -1.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, const std::vector<int>& labels, const ForestConfig& cfg, Rng& rng)
      : X_(X), labels_(labels), cfg_(cfg), rng_(rng) {}

  Tree build(const std::vector<size_t>& rows) {
    nodes_.clear();
    grow(rows, 0);
    return std::move(nodes_);
  }

 private:
  int32_t grow(const std::vector<size_t>& rows, int depth) {
    size_t n1 = 0;
    for (size_t r : rows) n1 += static_cast<size_t>(labels_[r]);
    const size_t n0 = rows.size() - n1;

    const int32_t id = static_cast<int32_t>(nodes_.size());
    nodes_.emplace_back();

    const bool pure = n0 == 0 || n1 == 0;
    const bool depth_capped = cfg_.max_depth >= 0 && depth >= cfg_.max_depth;
    BestSplit best;
    if (!pure && !depth_capped && rows.size() >= cfg_.min_samples_split)
      best = find_best_split(rows, gini_from_counts(n0, n1));

    if (!best.found) {
      nodes_[id].p0 = static_cast<double>(n0) / static_cast<double>(rows.size());
      nodes_[id].p1 = static_cast<double>(n1) / static_cast<double>(rows.size());
      return id;
    }

    std::vector<size_t> left, right;
    for (size_t r : rows)
      (X_.at(r, best.feature) <= best.threshold ? left : right).push_back(r);
    nodes_[id].feature = static_cast<int32_t>(best.feature);
    nodes_[id].threshold = best.threshold;
    const int32_t li = grow(left, depth + 1);
    const int32_t ri = grow(right, depth + 1);
    nodes_[id].left = li;
    nodes_[id].right = ri;
    return id;
  }

  BestSplit find_best_split(const std::vector<size_t>& rows, double parent_gini) {
    const size_t d = X_.cols;
    const size_t m = features_per_node(cfg_.max_features, d);
    std::vector<size_t> features(d);
    for (size_t i = 0; i < d; ++i) features[i] = i;
    if (m < d) {
      // partial Fisher-Yates: the first m entries become the subset
      for (size_t i = 0; i < m; ++i) {
        const size_t j = i + static_cast<size_t>(rng_.bounded(d - i));
        std::swap(features[i], features[j]);
      }
      features.resize(m);
      std::sort(features.begin(), features.end());
    }

    BestSplit best;
    const double total = static_cast<double>(rows.size());
    size_t total1 = 0;
    for (size_t r : rows) total1 += static_cast<size_t>(labels_[r]);
    std::vector<std::pair<double, int>> vals;
    vals.reserve(rows.size());
    for (size_t f : features) {
      vals.clear();
      for (size_t r : rows) vals.emplace_back(X_.at(r, f), labels_[r]);
      std::sort(vals.begin(), vals.end());
      size_t left1 = 0;
      for (size_t i = 0; i + 1 < vals.size(); ++i) {
        left1 += static_cast<size_t>(vals[i].second);
        if (vals[i].first == vals[i + 1].first) continue;  // not a value boundary
        const size_t nl = i + 1, nr = vals.size() - nl;
        if (nl < cfg_.min_samples_leaf || nr < cfg_.min_samples_leaf) continue;
        const double wl = static_cast<double>(nl) / total;
        const double wr = static_cast<double>(nr) / total;
        const double g = parent_gini - wl * gini_from_counts(nl - left1, left1) -
                         wr * gini_from_counts(nr - (total1 - left1), total1 - left1);
        if (g > best.gain) {
          double t = (vals[i].first + vals[i + 1].first) / 2.0;
          if (t >= vals[i + 1].first) t = vals[i].first;  // rounding guard: keep upper value right
          best.found = true;
          best.feature = f;
          best.threshold = t;
          best.gain = g;
        }
      }
    }
    return best;
  }

  const Matrix& X_;
  const std::vector<int>& labels_;
  const ForestConfig& cfg_;
  Rng& rng_;
  Tree nodes_;
};

void require_two_classes(const std::vector<int>& labels) {
  bool c0 = false, c1 = false;
  for (int l : labels) (l == 0 ? c0 : c1) = true;
  if (!c0 || !c1) throw GazeError(ErrorCode::SingleClassData, "both classes required");
}

void write_config(BinWriter& w, const ForestConfig& c) {
  w.u32(static_cast<uint32_t>(c.n_trees));
  w.u32(std::bit_cast<uint32_t>(static_cast<int32_t>(c.max_depth)));
  w.u32(static_cast<uint32_t>(c.min_samples_split));
  w.u32(static_cast<uint32_t>(c.min_samples_leaf));
  w.u8(static_cast<uint8_t>(c.max_features));
  w.u8(c.bootstrap ? 1 : 0);
  w.u64(c.seed);
}

ForestConfig read_config(BinReader& r) {
  ForestConfig c;
  c.n_trees = r.u32();
  c.max_depth = std::bit_cast<int32_t>(r.u32());
  c.min_samples_split = r.u32();
  c.min_samples_leaf = r.u32();
  c.max_features = static_cast<MaxFeatures>(r.u8());
  c.bootstrap = r.u8() != 0;
  c.seed = r.u64();
  return c;
}

std::string max_features_name(MaxFeatures mf) {
  switch (mf) {
    case MaxFeatures::Sqrt: return "sqrt";
    case MaxFeatures::Log2: return "log2";
    case MaxFeatures::All: return "all";
  }
  return "?";
}

}  // namespace

double gini(const std::vector<int>& labels) {
  if (labels.empty()) throw GazeError(ErrorCode::EmptySet, "gini of empty label set");
  size_t n1 = 0;
  for (int l : labels) n1 += static_cast<size_t>(l);
  return gini_from_counts(labels.size() - n1, n1);
}

Tree fit_tree(const Matrix& X, const std::vector<int>& labels,
              const std::vector<size_t>& rows, const ForestConfig& cfg, Rng& rng) {
  if (rows.empty()) throw GazeError(ErrorCode::EmptySet, "fit_tree with no rows");
  return TreeBuilder(X, labels, cfg, rng).build(rows);
}

int tree_predict(const Tree& tree, const double* row) {
  int32_t i = 0;
  while (tree[static_cast<size_t>(i)].feature >= 0) {
    const TreeNode& n = tree[static_cast<size_t>(i)];
    i = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  const TreeNode& leaf = tree[static_cast<size_t>(i)];
  return leaf.p1 > leaf.p0 ? 1 : 0;
}

ForestModel fit_forest(const WindowedDataset& train, const ForestConfig& cfg) {
  require_two_classes(train.labels);
  const size_t n = train.rows();
  ForestModel model;
  model.config = cfg;
  model.n_features = train.inputs.cols;
  model.trees.reserve(cfg.n_trees);
  for (size_t t = 0; t < cfg.n_trees; ++t) {
    Rng rng(mix_seed(cfg.seed, t));
    std::vector<size_t> rows(n);
    if (cfg.bootstrap) {
      for (size_t i = 0; i < n; ++i) rows[i] = static_cast<size_t>(rng.bounded(n));
    } else {
      for (size_t i = 0; i < n; ++i) rows[i] = i;
    }
    model.trees.push_back(fit_tree(train.inputs, train.labels, rows, cfg, rng));
  }
  return model;
}

double forest_vote_fraction(const ForestModel& model, const double* row) {
  size_t votes1 = 0;
  for (const Tree& t : model.trees) votes1 += static_cast<size_t>(tree_predict(t, row));
  return static_cast<double>(votes1) / static_cast<double>(model.trees.size());
}

int forest_predict(const ForestModel& model, const double* row) {
  size_t votes1 = 0;
  for (const Tree& t : model.trees) votes1 += static_cast<size_t>(tree_predict(t, row));
  return 2 * votes1 > model.trees.size() ? 1 : 0;  // exact tie -> 0
}

std::vector<ForestConfig> ForestGrid::enumerate() const {
  std::vector<ForestConfig> out;
  out.reserve(combination_count());
  for (size_t nt : n_trees)
    for (int md : max_depth)
      for (size_t mss : min_samples_split)
        for (size_t msl : min_samples_leaf)
          for (MaxFeatures mf : max_features)
            for (bool bs : bootstrap) {
              ForestConfig c;
              c.n_trees = nt;
              c.max_depth = md;
              c.min_samples_split = mss;
              c.min_samples_leaf = msl;
              c.max_features = mf;
              c.bootstrap = bs;
              out.push_back(c);
            }
  return out;
}

ForestGrid default_grid() {
  ForestGrid g;
  g.n_trees = {100, 200, 400};
  g.max_depth = {-1, 10, 20};
  g.min_samples_split = {2, 5, 10};
  g.min_samples_leaf = {1, 2, 4};
  g.max_features = {MaxFeatures::Sqrt, MaxFeatures::Log2, MaxFeatures::All};
  g.bootstrap = {true, false};
  return g;
}

ForestGrid reduced_grid() {
  ForestGrid g;
  g.n_trees = {100, 200};
  g.max_depth = {-1, 20};
  g.min_samples_split = {2};
  g.min_samples_leaf = {1};
  g.max_features = {MaxFeatures::Sqrt};
  g.bootstrap = {true, false};
  return g;
}

ForestGrid parse_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GazeError(ErrorCode::IoError, "cannot open grid file: " + path);
  ForestGrid g = default_grid();
  std::string line;
  auto split_list = [](const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
      const size_t pos = s.find(',', start);
      out.push_back(s.substr(start, pos == std::string::npos ? pos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return out;
  };
  auto parse_size = [&](const std::string& tok) {
    size_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      throw GazeError(ErrorCode::InvalidConfig, "bad grid number '" + tok + "' in " + path);
    return v;
  };
  while (std::getline(in, line)) {
    // trim + skip comments
    const size_t b = line.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) continue;
    const size_t e = line.find_last_not_of(" \t\r\n");
    line = line.substr(b, e - b + 1);
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw GazeError(ErrorCode::InvalidConfig, "expected key=value in grid file: " + line);
    const std::string key = line.substr(0, eq);
    const std::vector<std::string> toks = split_list(line.substr(eq + 1));
    if (key == "n_trees") {
      g.n_trees.clear();
      for (const auto& t : toks) g.n_trees.push_back(parse_size(t));
    } else if (key == "max_depth") {
      g.max_depth.clear();
      for (const auto& t : toks)
        g.max_depth.push_back(t == "none" || t == "unbounded" ? -1
                                                              : static_cast<int>(parse_size(t)));
    } else if (key == "min_samples_split") {
      g.min_samples_split.clear();
      for (const auto& t : toks) g.min_samples_split.push_back(parse_size(t));
    } else if (key == "min_samples_leaf") {
      g.min_samples_leaf.clear();
      for (const auto& t : toks) g.min_samples_leaf.push_back(parse_size(t));
    } else if (key == "max_features") {
      g.max_features.clear();
      for (const auto& t : toks) {
        if (t == "sqrt")
          g.max_features.push_back(MaxFeatures::Sqrt);
        else if (t == "log2")
          g.max_features.push_back(MaxFeatures::Log2);
        else if (t == "all")
          g.max_features.push_back(MaxFeatures::All);
        else
          throw GazeError(ErrorCode::InvalidConfig, "bad max_features '" + t + "'");
      }
    } else if (key == "bootstrap") {
      g.bootstrap.clear();
      for (const auto& t : toks) {
        if (t == "true")
          g.bootstrap.push_back(true);
        else if (t == "false")
          g.bootstrap.push_back(false);
        else
          throw GazeError(ErrorCode::InvalidConfig, "bad bootstrap '" + t + "'");
      }
    } else {
      throw GazeError(ErrorCode::InvalidConfig, "unknown grid key '" + key + "'");
    }
  }
  if (g.combination_count() == 0)
    throw GazeError(ErrorCode::InvalidConfig, "grid file yields zero combinations");
  return g;
}

GridSearchResult grid_search(const WindowedDataset& train, const ForestGrid& grid, size_t folds,
                             uint64_t seed) {
  if (folds < 2) throw GazeError(ErrorCode::InvalidConfig, "folds must be >= 2");
  if (grid.combination_count() == 0)
    throw GazeError(ErrorCode::InvalidConfig, "empty hyperparameter grid");
  require_two_classes(train.labels);

  // Stratified folds: shuffle each class's rows, deal round-robin.
  std::vector<size_t> fold_of(train.rows());
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<size_t> rows;
    for (size_t i = 0; i < train.rows(); ++i)
      if (train.labels[i] == cls) rows.push_back(i);
    if (rows.size() < folds)
      throw GazeError(ErrorCode::FoldTooSmall, "class " + std::to_string(cls) + " has " +
                                                   std::to_string(rows.size()) + " rows for " +
                                                   std::to_string(folds) + " folds");
    Rng rng(mix_seed(seed, 0xF01D + static_cast<uint64_t>(cls)));
    rng.shuffle(rows);
    for (size_t i = 0; i < rows.size(); ++i) fold_of[rows[i]] = i % folds;
  }

  std::vector<WindowedDataset> fold_train(folds), fold_test(folds);
  for (size_t f = 0; f < folds; ++f) {
    std::vector<size_t> tr, te;
    for (size_t i = 0; i < train.rows(); ++i) (fold_of[i] == f ? te : tr).push_back(i);
    // materialize once; every grid combination reuses the same folds
    WindowedDataset dtr, dte;
    dtr.mode = dte.mode = train.mode;
    dtr.inputs = Matrix(tr.size(), train.inputs.cols);
    dte.inputs = Matrix(te.size(), train.inputs.cols);
    for (size_t i = 0; i < tr.size(); ++i) {
      std::copy(train.inputs.row_ptr(tr[i]), train.inputs.row_ptr(tr[i]) + train.inputs.cols,
                dtr.inputs.row_ptr(i));
      dtr.labels.push_back(train.labels[tr[i]]);
      dtr.groups.push_back(train.groups[tr[i]]);
    }
    for (size_t i = 0; i < te.size(); ++i) {
      std::copy(train.inputs.row_ptr(te[i]), train.inputs.row_ptr(te[i]) + train.inputs.cols,
                dte.inputs.row_ptr(i));
      dte.labels.push_back(train.labels[te[i]]);
      dte.groups.push_back(train.groups[te[i]]);
    }
    fold_train[f] = std::move(dtr);
    fold_test[f] = std::move(dte);
  }

  GridSearchResult result;
  const std::vector<ForestConfig> combos = grid.enumerate();
  double best_mean = -1.0;
  for (size_t ci = 0; ci < combos.size(); ++ci) {
    GridScore score;
    score.config = combos[ci];
    double sum = 0.0;
    for (size_t f = 0; f < folds; ++f) {
      ForestConfig cfg = combos[ci];
      cfg.seed = mix_seed(seed, ci, f);
      ForestModel m = fit_forest(fold_train[f], cfg);
      size_t correct = 0;
      for (size_t i = 0; i < fold_test[f].rows(); ++i)
        if (forest_predict(m, fold_test[f].inputs.row_ptr(i)) == fold_test[f].labels[i])
          ++correct;
      const double acc = static_cast<double>(correct) / static_cast<double>(fold_test[f].rows());
      score.fold_accuracy.push_back(acc);
      sum += acc;
    }
    score.mean_accuracy = sum / static_cast<double>(folds);
    if (score.mean_accuracy > best_mean) {
      best_mean = score.mean_accuracy;
      result.best_index = ci;
    }
    result.scores.push_back(std::move(score));
  }

  ForestConfig best = combos[result.best_index];
  best.seed = mix_seed(seed, result.best_index, folds);  // refit stream, distinct from CV folds
  result.model = fit_forest(train, best);
  result.model.cv_scores = result.scores;
  return result;
}

void save_forest(const ForestModel& model, const std::string& path) {
  BinWriter w(path);
  w.magic(kForestMagic);
  w.u32(kForestVersion);
  w.u64(model.n_features);
  write_config(w, model.config);
  w.u64(model.trees.size());
  for (const Tree& t : model.trees) {
    w.u64(t.size());
    for (const TreeNode& n : t) {
      w.u32(std::bit_cast<uint32_t>(n.feature));
      w.f64(n.threshold);
      w.u32(std::bit_cast<uint32_t>(n.left));
      w.u32(std::bit_cast<uint32_t>(n.right));
      w.f64(n.p0);
      w.f64(n.p1);
    }
  }
  w.u64(model.cv_scores.size());
  for (const GridScore& s : model.cv_scores) {
    write_config(w, s.config);
    w.u64(s.fold_accuracy.size());
    w.f64_array(s.fold_accuracy.data(), s.fold_accuracy.size());
    w.f64(s.mean_accuracy);
  }
  w.close();
}

ForestModel load_forest(const std::string& path) {
  BinReader r(path);
  r.expect_magic(kForestMagic);
  const uint32_t version = r.u32();
  if (version != kForestVersion)
    throw GazeError(ErrorCode::IoError, "unsupported model version " + std::to_string(version));
  ForestModel model;
  model.n_features = r.u64();
  model.config = read_config(r);
  const uint64_t n_trees = r.u64();
  model.trees.resize(n_trees);
  for (Tree& t : model.trees) {
    t.resize(r.u64());
    for (TreeNode& n : t) {
      n.feature = std::bit_cast<int32_t>(r.u32());
      n.threshold = r.f64();
      n.left = std::bit_cast<int32_t>(r.u32());
      n.right = std::bit_cast<int32_t>(r.u32());
      n.p0 = r.f64();
      n.p1 = r.f64();
    }
  }
  model.cv_scores.resize(r.u64());
  for (GridScore& s : model.cv_scores) {
    s.config = read_config(r);
    s.fold_accuracy.resize(r.u64());
    r.f64_array(s.fold_accuracy.data(), s.fold_accuracy.size());
    s.mean_accuracy = r.f64();
  }
  return model;
}

void export_grid_csv(const std::vector<GridScore>& scores, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GazeError(ErrorCode::IoError, "cannot open for write: " + path);
  const size_t folds = scores.empty() ? 0 : scores.front().fold_accuracy.size();
  out << "n_trees,max_depth,min_samples_split,min_samples_leaf,max_features,bootstrap";
  for (size_t f = 0; f < folds; ++f) out << ",fold_" << f;
  out << ",mean_accuracy\n";
  std::array<char, 32> buf;
  auto num = [&](double v) {
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out << ',';
    out.write(buf.data(), p - buf.data());
  };
  for (const GridScore& s : scores) {
    out << s.config.n_trees << ','
        << (s.config.max_depth < 0 ? std::string("none") : std::to_string(s.config.max_depth))
        << ',' << s.config.min_samples_split << ',' << s.config.min_samples_leaf << ','
        << max_features_name(s.config.max_features) << ','
        << (s.config.bootstrap ? "true" : "false");
    for (double a : s.fold_accuracy) num(a);
    num(s.mean_accuracy);
    out << '\n';
  }
  if (!out) throw GazeError(ErrorCode::IoError, "write failed: " + path);
}

}  // namespace gazeload
