#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gazeload/dataset.hpp"
#include "gazeload/matrix.hpp"
#include "gazeload/rng.hpp"

namespace gazeload {

enum class MaxFeatures : uint8_t { Sqrt = 0, Log2 = 1, All = 2 };

struct ForestConfig {
  size_t n_trees = 100;
  int max_depth = -1;  // -1 = unbounded
  size_t min_samples_split = 2;
  size_t min_samples_leaf = 1;
  MaxFeatures max_features = MaxFeatures::Sqrt;
  bool bootstrap = true;
  uint64_t seed = 0;
};

struct TreeNode {
  int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int32_t left = -1;
  int32_t right = -1;
  double p0 = 0.0;  // leaf class probabilities (sum to 1)
  double p1 = 0.0;
};

using Tree = std::vector<TreeNode>;

struct GridScore {
  ForestConfig config;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
};

struct ForestModel {
  std::vector<Tree> trees;
  ForestConfig config;
  size_t n_features = 0;
  std::vector<GridScore> cv_scores;  // present when trained via grid search
};

// 1 - p0^2 - p1^2 over binary labels. Throws EmptySet.
double gini(const std::vector<int>& labels);

// Recursive best-Gini-gain splitting over a per-node random feature subset.
// Candidate thresholds are midpoints between consecutive sorted unique
// values; rows with x <= threshold go left. Gain ties break toward the
// lowest feature index, then the lowest threshold. Splitting stops at
// max_depth, min_samples_split, min_samples_leaf, purity, or when no
// candidate survives the leaf-size floor.
Tree fit_tree(const Matrix& X, const std::vector<int>& labels,
              const std::vector<size_t>& rows, const ForestConfig& cfg, Rng& rng);

int tree_predict(const Tree& tree, const double* row);

// Per-tree RNG streams derive from (cfg.seed, tree index), so results do not
// depend on training order. bootstrap=true draws N rows with replacement per
// tree. Throws SingleClassData.
ForestModel fit_forest(const WindowedDataset& train, const ForestConfig& cfg);

// Majority vote; exact ties predict class 0.
int forest_predict(const ForestModel& model, const double* row);
// Fraction of trees voting class 1.
double forest_vote_fraction(const ForestModel& model, const double* row);

struct ForestGrid {
  std::vector<size_t> n_trees;
  std::vector<int> max_depth;  // -1 = unbounded
  std::vector<size_t> min_samples_split;
  std::vector<size_t> min_samples_leaf;
  std::vector<MaxFeatures> max_features;
  std::vector<bool> bootstrap;

  size_t combination_count() const {
    return n_trees.size() * max_depth.size() * min_samples_split.size() *
           min_samples_leaf.size() * max_features.size() * bootstrap.size();
  }

  // Deterministic enumeration: n_trees outermost, then max_depth,
  // min_samples_split, min_samples_leaf, max_features, bootstrap innermost.
  std::vector<ForestConfig> enumerate() const;
};

// 3 x 3 x 3 x 3 x 3 x 2 = 486 combinations.
ForestGrid default_grid();
// 8-combination grid used as the full-pipeline default to keep end-to-end
// runs fast; pass a grid file (or default_grid) for the exhaustive sweep.
ForestGrid reduced_grid();
// key=value file, comma-separated value lists; keys missing from the file
// keep their default_grid lists. max_depth accepts "none" for unbounded.
ForestGrid parse_grid_file(const std::string& path);

struct GridSearchResult {
  ForestModel model;  // best config refit on the full training data
  std::vector<GridScore> scores;
  size_t best_index = 0;
};

// Exhaustive evaluation of every combination under stratified k-fold CV,
// scored by mean accuracy; ties go to the earliest combination in
// enumeration order. Per-(combination, fold) forest seeds derive from the
// grid seed, so the score table is reproducible. Throws FoldTooSmall.
GridSearchResult grid_search(const WindowedDataset& train, const ForestGrid& grid, size_t folds,
                             uint64_t seed);

// Binary container, magic "GLRF". Round-trips bit-exactly.
void save_forest(const ForestModel& model, const std::string& path);
ForestModel load_forest(const std::string& path);

// CSV of the full score table:
// n_trees,max_depth,...,bootstrap,fold_0..fold_{k-1},mean_accuracy
void export_grid_csv(const std::vector<GridScore>& scores, const std::string& path);

}  // namespace gazeload
