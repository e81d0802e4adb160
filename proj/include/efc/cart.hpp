#pragma once

#include <span>
#include <string>
#include <vector>

#include "efc/features.hpp"

namespace efc {

struct TreeHyperparams {
    int max_depth = 1;  // 1 or 2
    bool use_sample_weights = true;
    int cv_folds = 5;
};

/// One node of a fitted tree, stored in a flat vector. Internal nodes carry
/// (feature, threshold) with the rule "value >= threshold goes right";
/// every node keeps its weighted class counts so leaves expose the weighted
/// up-fraction as the forecast probability.
struct TreeNode {
    int feature = -1;         // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;      // total sample weight reaching the node
    double up_weight = 0.0;   // weight of up-labeled samples
    double p_up = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct TreeModel {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    std::vector<std::string> feature_names;
    TreeHyperparams hyperparams;
    MonthKey trained_through = 0;
};

struct Forecast {
    MonthKey month = 0;
    double p_up = 0.0;
    int direction = 0;  // 1 iff p_up >= 0.5
};

/// Greedy recursive partitioning minimizing weighted Gini impurity. The split
/// search is exhaustive over all (feature, midpoint-threshold) pairs;
/// recursion stops at max_depth, at pure nodes, or when no split strictly
/// reduces impurity. Equal-quality splits resolve to the lower feature index,
/// then the lower threshold.
TreeModel fit_tree(const FeatureMatrix& X, const LabelSeries& y, const TreeHyperparams& params);

Forecast predict(const TreeModel& model, std::span<const double> row);

struct SplitRange {
    int begin = 0;
    int end = 0;  // half-open
};

struct TimeSeriesSplit {
    SplitRange train;
    SplitRange validation;
};

/// Partitions [0, n) into k+1 contiguous near-equal blocks (the first block
/// absorbs any remainder); split i trains on blocks 1..i and validates on
/// block i+1, so validation indices always follow training indices.
std::vector<TimeSeriesSplit> time_series_split(int n, int k);

/// Picks max_depth from the candidates by mean unweighted validation accuracy
/// over the time-series splits; ties prefer the shallower tree.
TreeHyperparams select_depth(const FeatureMatrix& X, const LabelSeries& y,
                             const std::vector<int>& candidate_depths,
                             const TreeHyperparams& base);

/// Deterministic indented rendering, one line per node.
std::string export_tree_text(const TreeModel& model);

/// Month-by-month retrain/forecast loop. Each step trains from scratch on all
/// rows before the cursor (depth reselected by cross-validation), forecasts
/// the cursor row, and advances.
class OnlineCart {
  public:
    OnlineCart(FeatureMatrix X, LabelSeries y, TreeHyperparams base, int first_forecast_row,
               std::vector<int> candidate_depths = {1, 2});

    bool done() const { return cursor_ >= features_.row_count(); }
    int cursor() const { return cursor_; }
    MonthKey cursor_month() const { return features_.months[cursor_]; }

    /// Observes everything before the cursor and forecasts the cursor row.
    Forecast step();

    const TreeModel& model() const { return model_; }
    int selected_depth() const { return model_.hyperparams.max_depth; }

  private:
    FeatureMatrix features_;
    LabelSeries labels_;
    TreeHyperparams base_;
    std::vector<int> candidate_depths_;
    int cursor_ = 0;
    TreeModel model_;
};

}  // namespace efc
