#include "efc/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "efc/errors.hpp"

namespace efc {

namespace {

// Weighted Gini impurity mass of a node: w * (1 - p_up^2 - p_down^2).
double gini_mass(double weight, double up_weight) {
    if (weight <= 0.0) return 0.0;
    const double p = up_weight / weight;
    return weight * (1.0 - p * p - (1.0 - p) * (1.0 - p));
}

struct BestSplit {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double children_mass = 0.0;
};

struct FitContext {
    const FeatureMatrix* X;
    const LabelSeries* y;
    std::vector<double> weights;  // effective (unit if weights disabled)
};

BestSplit search_split(const FitContext& ctx, const std::vector<int>& idx) {
    const int n_features = static_cast<int>(ctx.X->names.size());
    BestSplit best;

    std::vector<int> order(idx);
    for (int f = 0; f < n_features; ++f) {
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return ctx.X->values(a, f) < ctx.X->values(b, f);
        });

        double total_w = 0.0;
        double total_up = 0.0;
        for (int i : order) {
            total_w += ctx.weights[i];
            total_up += ctx.weights[i] * ctx.y->direction[i];
        }

        double left_w = 0.0;
        double left_up = 0.0;
        for (size_t k = 0; k + 1 < order.size(); ++k) {
            const int i = order[k];
            left_w += ctx.weights[i];
            left_up += ctx.weights[i] * ctx.y->direction[i];
            const double v_lo = ctx.X->values(i, f);
            const double v_hi = ctx.X->values(order[k + 1], f);
            if (!(v_lo < v_hi)) continue;
            const double threshold = v_lo + (v_hi - v_lo) / 2.0;
            // Guard against the midpoint rounding onto the lower value, which
            // would route it right and contradict the scan.
            if (!(v_lo < threshold)) continue;
            const double mass = gini_mass(left_w, left_up) +
                                gini_mass(total_w - left_w, total_up - left_up);
            if (!best.found || mass < best.children_mass) {
                best.found = true;
                best.feature = f;
                best.threshold = threshold;
                best.children_mass = mass;
            }
            // Equal-quality splits keep the earlier (feature, threshold):
            // features ascend and thresholds ascend within a feature, so
            // replacing only on strict improvement implements the tie rule.
        }
    }
    return best;
}

int build_node(const FitContext& ctx, std::vector<TreeNode>& nodes, const std::vector<int>& idx,
               int depth, int max_depth) {
    double weight = 0.0;
    double up_weight = 0.0;
    for (int i : idx) {
        weight += ctx.weights[i];
        up_weight += ctx.weights[i] * ctx.y->direction[i];
    }

    const int node_id = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{});
    TreeNode node;
    node.weight = weight;
    node.up_weight = up_weight;
    node.p_up = weight > 0.0 ? up_weight / weight : 0.5;

    const double parent_mass = gini_mass(weight, up_weight);
    if (depth < max_depth && parent_mass > 0.0 && idx.size() >= 2) {
        const BestSplit split = search_split(ctx, idx);
        if (split.found && split.children_mass < parent_mass) {
            std::vector<int> left_idx;
            std::vector<int> right_idx;
            for (int i : idx) {
                if (ctx.X->values(i, split.feature) >= split.threshold) right_idx.push_back(i);
                else left_idx.push_back(i);
            }
            node.feature = split.feature;
            node.threshold = split.threshold;
            nodes[node_id] = node;
            const int left = build_node(ctx, nodes, left_idx, depth + 1, max_depth);
            const int right = build_node(ctx, nodes, right_idx, depth + 1, max_depth);
            nodes[node_id].left = left;
            nodes[node_id].right = right;
            return node_id;
        }
    }
    nodes[node_id] = node;
    return node_id;
}

void render_node(const TreeModel& model, int node_id, int depth, std::ostringstream& out) {
    const TreeNode& node = model.nodes[node_id];
    for (int i = 0; i < depth; ++i) out << "  ";
    char buf[160];
    if (node.is_leaf()) {
        std::snprintf(buf, sizeof(buf), "leaf p_up=%.6f weight=%.6f up_weight=%.6f", node.p_up,
                      node.weight, node.up_weight);
        out << buf << '\n';
    } else {
        std::snprintf(buf, sizeof(buf), "split %s >= %.10g weight=%.6f up_weight=%.6f",
                      model.feature_names[node.feature].c_str(), node.threshold, node.weight,
                      node.up_weight);
        out << buf << '\n';
        render_node(model, node.left, depth + 1, out);
        render_node(model, node.right, depth + 1, out);
    }
}

}  // namespace

TreeModel fit_tree(const FeatureMatrix& X, const LabelSeries& y, const TreeHyperparams& params) {
    if (params.max_depth < 1 || params.max_depth > 2) {
        throw DataError("max_depth must be 1 or 2");
    }
    const int n = X.row_count();
    if (n != static_cast<int>(y.direction.size())) {
        throw DataError("feature rows and labels are misaligned");
    }
    if (n < 1) throw DataError("cannot fit a tree on zero samples");

    FitContext ctx{&X, &y, {}};
    ctx.weights.resize(n, 1.0);
    if (params.use_sample_weights) {
        for (int i = 0; i < n; ++i) ctx.weights[i] = y.magnitude[i];
    }
    const double total = std::accumulate(ctx.weights.begin(), ctx.weights.end(), 0.0);
    if (total <= 0.0) throw DataError("total sample weight is zero");

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);

    TreeModel model;
    model.feature_names = X.names;
    model.hyperparams = params;
    if (!X.months.empty()) model.trained_through = X.months.back();
    build_node(ctx, model.nodes, idx, 0, params.max_depth);
    return model;
}

Forecast predict(const TreeModel& model, std::span<const double> row) {
    if (row.size() != model.feature_names.size()) {
        throw DataError("feature row arity " + std::to_string(row.size()) +
                        " does not match model arity " +
                        std::to_string(model.feature_names.size()));
    }
    int node_id = 0;
    while (!model.nodes[node_id].is_leaf()) {
        const TreeNode& node = model.nodes[node_id];
        node_id = row[node.feature] >= node.threshold ? node.right : node.left;
    }
    Forecast f;
    f.p_up = model.nodes[node_id].p_up;
    f.direction = f.p_up >= 0.5 ? 1 : 0;
    return f;
}

std::vector<TimeSeriesSplit> time_series_split(int n, int k) {
    if (k < 1) throw DataError("need at least 1 split");
    if (n < 2 * (k + 1)) {
        throw DataError("too few samples for a " + std::to_string(k) + "-fold time-series split: " +
                        std::to_string(n));
    }
    const int blocks = k + 1;
    const int base = n / blocks;
    const int remainder = n - base * blocks;

    std::vector<int> boundaries;  // block end offsets
    boundaries.push_back(base + remainder);
    for (int i = 1; i < blocks; ++i) boundaries.push_back(boundaries.back() + base);

    std::vector<TimeSeriesSplit> splits;
    for (int i = 0; i < k; ++i) {
        TimeSeriesSplit s;
        s.train = SplitRange{0, boundaries[i]};
        s.validation = SplitRange{boundaries[i], boundaries[i + 1]};
        splits.push_back(s);
    }
    return splits;
}

namespace {

FeatureMatrix slice_features(const FeatureMatrix& X, int begin, int end) {
    FeatureMatrix out;
    out.names = X.names;
    out.months.assign(X.months.begin() + begin, X.months.begin() + end);
    out.values = X.values.middleRows(begin, end - begin);
    return out;
}

LabelSeries slice_labels(const LabelSeries& y, int begin, int end) {
    LabelSeries out;
    out.months.assign(y.months.begin() + begin, y.months.begin() + end);
    out.direction.assign(y.direction.begin() + begin, y.direction.begin() + end);
    out.magnitude.assign(y.magnitude.begin() + begin, y.magnitude.begin() + end);
    return out;
}

}  // namespace

TreeHyperparams select_depth(const FeatureMatrix& X, const LabelSeries& y,
                             const std::vector<int>& candidate_depths,
                             const TreeHyperparams& base) {
    if (candidate_depths.empty()) throw DataError("no candidate depths");
    const auto splits = time_series_split(X.row_count(), base.cv_folds);

    TreeHyperparams best = base;
    double best_accuracy = -1.0;
    for (int depth : candidate_depths) {
        TreeHyperparams params = base;
        params.max_depth = depth;
        double accuracy_sum = 0.0;
        for (const TimeSeriesSplit& split : splits) {
            const FeatureMatrix train_x = slice_features(X, split.train.begin, split.train.end);
            const LabelSeries train_y = slice_labels(y, split.train.begin, split.train.end);
            const TreeModel model = fit_tree(train_x, train_y, params);
            int correct = 0;
            const int val_n = split.validation.end - split.validation.begin;
            for (int i = split.validation.begin; i < split.validation.end; ++i) {
                const Eigen::RowVectorXd row = X.values.row(i);
                const Forecast f = predict(model, std::span<const double>(row.data(), row.size()));
                if (f.direction == y.direction[i]) ++correct;
            }
            accuracy_sum += static_cast<double>(correct) / val_n;
        }
        const double mean_accuracy = accuracy_sum / static_cast<double>(splits.size());
        // Candidates ascend, so a strict comparison prefers the shallower
        // tree on ties.
        if (mean_accuracy > best_accuracy) {
            best_accuracy = mean_accuracy;
            best = params;
        }
    }
    return best;
}

std::string export_tree_text(const TreeModel& model) {
    std::ostringstream out;
    render_node(model, 0, 0, out);
    return out.str();
}

OnlineCart::OnlineCart(FeatureMatrix X, LabelSeries y, TreeHyperparams base,
                       int first_forecast_row, std::vector<int> candidate_depths)
    : features_(std::move(X)),
      labels_(std::move(y)),
      base_(base),
      candidate_depths_(std::move(candidate_depths)),
      cursor_(first_forecast_row) {
    if (features_.row_count() != static_cast<int>(labels_.direction.size())) {
        throw DataError("feature rows and labels are misaligned");
    }
    if (cursor_ < 1 || cursor_ > features_.row_count()) {
        throw DataError("first forecast row out of range");
    }
}

Forecast OnlineCart::step() {
    if (done()) throw DataError("online loop has no rows left to forecast");

    const FeatureMatrix train_x = slice_features(features_, 0, cursor_);
    const LabelSeries train_y = slice_labels(labels_, 0, cursor_);
    const TreeHyperparams params = select_depth(train_x, train_y, candidate_depths_, base_);
    model_ = fit_tree(train_x, train_y, params);

    const Eigen::RowVectorXd row = features_.values.row(cursor_);
    Forecast f = predict(model_, std::span<const double>(row.data(), row.size()));
    f.month = features_.months[cursor_];
    ++cursor_;
    return f;
}

}  // namespace efc
