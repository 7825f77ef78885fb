#include "hessems/predict.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hessems/rng.hpp"

namespace hessems::predict {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace

// ---------------------------------------------------------------------------
// Calendar

Date parse_date(const std::string& iso) {
    Date d;
    char dash1 = 0, dash2 = 0;
    std::istringstream in(iso);
    if (!(in >> d.year >> dash1 >> d.month >> dash2 >> d.day) || dash1 != '-' || dash2 != '-')
        throw std::invalid_argument("bad date '" + iso + "', expected YYYY-MM-DD");
    require(d.month >= 1 && d.month <= 12, "bad month in date '" + iso + "'");
    require(d.day >= 1 && d.day <= 31, "bad day in date '" + iso + "'");
    return d;
}

std::string to_string(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

long days_from_epoch(const Date& date) {
    // Howard Hinnant's days-from-civil algorithm.
    int y = date.year;
    const unsigned m = static_cast<unsigned>(date.month);
    const unsigned d = static_cast<unsigned>(date.day);
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

Date date_from_epoch(long days) {
    long z = days + 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long y = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

int day_of_week(const Date& d) {
    // 1970-01-01 was a Thursday; index 0 = Monday.
    const long days = days_from_epoch(d);
    return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

// ---------------------------------------------------------------------------
// Dataset

void validate_features(const FeatureVector& x) {
    require(x.day_of_week >= 0 && x.day_of_week <= 6, "day_of_week out of range [0, 6]");
    require(x.hour >= 0 && x.hour <= 23, "hour out of range [0, 23]");
    require(x.weather_code >= 0 && x.weather_code <= 31, "weather_code out of range");
    require(x.wind_level >= 0 && x.wind_level <= 12, "wind_level out of range");
    require(x.temp_high_c >= x.temp_low_c, "temp_high_c below temp_low_c");
}

namespace {

LoadDataset normalize_impl(const std::vector<LoadRecord>& records,
                           const std::vector<WeatherRecord>* weather) {
    require(!records.empty(), "cannot normalize an empty record set");
    long max_count = 0;
    for (const auto& r : records) {
        require(r.hour >= 0 && r.hour <= 23, "record hour out of range");
        require(r.passenger_count >= 0, "record passenger_count negative");
        max_count = std::max(max_count, r.passenger_count);
    }
    require(max_count > 0, "all passenger counts are zero; nothing to normalize");

    std::map<long, const WeatherRecord*> by_date;
    if (weather)
        for (const auto& w : *weather) by_date[days_from_epoch(w.date)] = &w;

    LoadDataset out;
    out.normalization_max = static_cast<double>(max_count);
    out.rows.reserve(records.size());
    for (const auto& r : records) {
        FeatureVector x;
        x.day_of_week = day_of_week(r.date);
        x.hour = r.hour;
        if (weather) {
            const auto it = by_date.find(days_from_epoch(r.date));
            require(it != by_date.end(),
                    "no weather row for date " + to_string(r.date));
            const WeatherRecord& w = *it->second;
            x.weather_code = w.weather_code;
            x.temp_high_c = w.temp_high_c;
            x.temp_low_c = w.temp_low_c;
            x.wind_level = w.wind_level;
            x.is_holiday = w.is_holiday;
        } else {
            x.temp_high_c = 25.0;
            x.temp_low_c = 20.0;
        }
        validate_features(x);
        out.rows.push_back({x, static_cast<double>(r.passenger_count) / out.normalization_max});
    }
    return out;
}

}  // namespace

LoadDataset normalize(const std::vector<LoadRecord>& records) {
    return normalize_impl(records, nullptr);
}

LoadDataset normalize(const std::vector<LoadRecord>& records,
                      const std::vector<WeatherRecord>& weather) {
    return normalize_impl(records, &weather);
}

// ---------------------------------------------------------------------------
// Average model

Predictor train_average(const LoadDataset& data) {
    require(!data.rows.empty(), "cannot train on an empty dataset");
    AverageModel m;
    std::array<std::array<double, 24>, 7> sum{};
    double total = 0.0;
    for (const auto& row : data.rows) {
        sum[row.x.day_of_week][row.x.hour] += row.y;
        m.count[row.x.day_of_week][row.x.hour] += 1;
        total += row.y;
    }
    m.global_mean = total / static_cast<double>(data.rows.size());
    for (int d = 0; d < 7; ++d)
        for (int h = 0; h < 24; ++h)
            m.mean[d][h] = m.count[d][h] > 0 ? sum[d][h] / m.count[d][h] : 0.0;
    return Predictor{m};
}

// ---------------------------------------------------------------------------
// Regression tree

std::array<double, 7> tree_features(const FeatureVector& x) {
    return {static_cast<double>(x.day_of_week), static_cast<double>(x.hour),
            static_cast<double>(x.weather_code), x.temp_high_c, x.temp_low_c,
            static_cast<double>(x.wind_level), x.is_holiday ? 1.0 : 0.0};
}

namespace {

struct TreeBuilder {
    const std::vector<std::array<double, 7>>& xs;
    const std::vector<double>& ys;
    int max_depth;
    int min_leaf;
    double min_impurity_decrease;
    TreeModel tree;

    int build(std::vector<int>& idx, int depth) {
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        double sum = 0.0, sum_sq = 0.0;
        for (int i : idx) {
            sum += ys[i];
            sum_sq += ys[i] * ys[i];
        }
        const double n = static_cast<double>(idx.size());
        const double mean = sum / n;
        const double sse_parent = std::max(0.0, sum_sq - sum * sum / n);
        tree.nodes[node_id].value = mean;

        if (depth >= max_depth || static_cast<int>(idx.size()) < 2 * min_leaf ||
            sse_parent <= 0.0)
            return node_id;

        // Exhaustive split search: features in index order, candidate
        // thresholds at midpoints of consecutive distinct values. Strict
        // improvement keeps the first (lowest feature, lowest threshold)
        // among ties.
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_children_sse = std::numeric_limits<double>::infinity();
        std::vector<int> sorted(idx);
        for (int k = 0; k < 7; ++k) {
            std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
                if (xs[a][k] != xs[b][k]) return xs[a][k] < xs[b][k];
                return a < b;
            });
            double left_sum = 0.0, left_sq = 0.0;
            for (std::size_t pos = 0; pos + 1 < sorted.size(); ++pos) {
                const int i = sorted[pos];
                left_sum += ys[i];
                left_sq += ys[i] * ys[i];
                if (xs[i][k] == xs[sorted[pos + 1]][k]) continue;  // not a boundary
                const double n_left = static_cast<double>(pos + 1);
                const double n_right = n - n_left;
                if (n_left < min_leaf || n_right < min_leaf) continue;
                const double right_sum = sum - left_sum;
                const double right_sq = sum_sq - left_sq;
                const double sse_left = std::max(0.0, left_sq - left_sum * left_sum / n_left);
                const double sse_right =
                    std::max(0.0, right_sq - right_sum * right_sum / n_right);
                const double children = sse_left + sse_right;
                if (children < best_children_sse) {
                    best_children_sse = children;
                    best_feature = k;
                    best_threshold = 0.5 * (xs[i][k] + xs[sorted[pos + 1]][k]);
                }
            }
        }

        if (best_feature < 0) return node_id;
        const double decrease = (sse_parent - best_children_sse) / sse_parent;
        if (decrease < min_impurity_decrease) return node_id;

        std::vector<int> left_idx, right_idx;
        for (int i : idx) {
            if (xs[i][best_feature] <= best_threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        tree.nodes[node_id].feature = best_feature;
        tree.nodes[node_id].threshold = best_threshold;
        const int left = build(left_idx, depth + 1);
        tree.nodes[node_id].left = left;
        const int right = build(right_idx, depth + 1);
        tree.nodes[node_id].right = right;
        return node_id;
    }
};

TreeModel fit_tree(const std::vector<std::array<double, 7>>& xs, const std::vector<double>& ys,
                   int max_depth, int min_leaf, double min_impurity_decrease) {
    TreeBuilder builder{xs, ys, max_depth, std::max(1, min_leaf), min_impurity_decrease, {}};
    std::vector<int> idx(xs.size());
    std::iota(idx.begin(), idx.end(), 0);
    builder.build(idx, 0);
    return std::move(builder.tree);
}

double tree_eval(const TreeModel& tree, const std::array<double, 7>& x) {
    int node = 0;
    while (tree.nodes[node].feature >= 0) {
        const TreeNode& n = tree.nodes[node];
        node = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return tree.nodes[node].value;
}

}  // namespace

Predictor train_regression_tree(const LoadDataset& data, int max_depth, int min_leaf,
                                double min_impurity_decrease) {
    require(!data.rows.empty(), "cannot train on an empty dataset");
    std::vector<std::array<double, 7>> xs;
    std::vector<double> ys;
    xs.reserve(data.rows.size());
    ys.reserve(data.rows.size());
    for (const auto& row : data.rows) {
        xs.push_back(tree_features(row.x));
        ys.push_back(row.y);
    }
    return Predictor{fit_tree(xs, ys, max_depth, min_leaf, min_impurity_decrease)};
}

// ---------------------------------------------------------------------------
// Gradient-boosted trees

Predictor train_gbdt(const LoadDataset& data, int n_trees, double learning_rate,
                     int max_depth) {
    require(!data.rows.empty(), "cannot train on an empty dataset");
    require(n_trees >= 0, "n_trees must be non-negative");
    require(learning_rate > 0.0 && learning_rate <= 1.0, "learning_rate must be in (0, 1]");

    std::vector<std::array<double, 7>> xs;
    std::vector<double> ys;
    for (const auto& row : data.rows) {
        xs.push_back(tree_features(row.x));
        ys.push_back(row.y);
    }

    GbdtModel m;
    m.learning_rate = learning_rate;
    m.baseline = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());

    std::vector<double> prediction(ys.size(), m.baseline);
    std::vector<double> residual(ys.size());
    for (int t = 0; t < n_trees; ++t) {
        for (std::size_t i = 0; i < ys.size(); ++i) residual[i] = ys[i] - prediction[i];
        TreeModel tree = fit_tree(xs, residual, max_depth, 1, 0.0);
        for (std::size_t i = 0; i < ys.size(); ++i)
            prediction[i] += learning_rate * tree_eval(tree, xs[i]);
        m.trees.push_back(std::move(tree));
    }
    return Predictor{std::move(m)};
}

// ---------------------------------------------------------------------------
// Neural network

std::vector<double> nn_encode(const FeatureVector& x, int weather_onehot) {
    require(x.weather_code < weather_onehot, "weather_code exceeds the model's one-hot width");
    std::vector<double> v;
    v.reserve(7 + 1 + weather_onehot + 4);
    for (int d = 0; d < 7; ++d) v.push_back(d == x.day_of_week ? 1.0 : 0.0);
    v.push_back(static_cast<double>(x.hour) / 23.0);
    for (int w = 0; w < weather_onehot; ++w) v.push_back(w == x.weather_code ? 1.0 : 0.0);
    v.push_back(x.temp_high_c / 40.0);
    v.push_back(x.temp_low_c / 40.0);
    v.push_back(static_cast<double>(x.wind_level) / 10.0);
    v.push_back(x.is_holiday ? 1.0 : 0.0);
    return v;
}

namespace {

struct NnScratch {
    // Activations per layer (post-nonlinearity) and pre-activation deltas.
    std::vector<std::vector<double>> a;
    std::vector<std::vector<double>> delta;
};

double nn_forward_encoded(const NnModel& m, const std::vector<double>& input,
                          NnScratch& scratch) {
    const std::size_t n_layers = m.weights.size();  // 3 weight layers for 4 layers of units
    const std::vector<double>* current = &input;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const int out_n = m.layer_sizes[l + 1];
        const int in_n = m.layer_sizes[l];
        std::vector<double>& out = scratch.a[l];
        out.assign(out_n, 0.0);
        for (int o = 0; o < out_n; ++o) {
            double z = m.biases[l][o];
            const double* w_row = &m.weights[l][static_cast<std::size_t>(o) * in_n];
            for (int i = 0; i < in_n; ++i) z += w_row[i] * (*current)[i];
            const bool hidden = l + 1 < n_layers;
            out[o] = hidden ? std::max(0.0, z) : z;  // ReLU on hidden layers
        }
        current = &out;
    }
    return (*current)[0];
}

}  // namespace

double nn_loss_and_gradients(const NnModel& m, const LoadDataset& data,
                             std::vector<std::vector<double>>* grad_w,
                             std::vector<std::vector<double>>* grad_b) {
    require(!data.rows.empty(), "cannot evaluate on an empty dataset");
    const std::size_t n_layers = m.weights.size();
    if (grad_w) {
        grad_w->assign(n_layers, {});
        grad_b->assign(n_layers, {});
        for (std::size_t l = 0; l < n_layers; ++l) {
            (*grad_w)[l].assign(m.weights[l].size(), 0.0);
            (*grad_b)[l].assign(m.biases[l].size(), 0.0);
        }
    }

    NnScratch scratch;
    scratch.a.resize(n_layers);
    scratch.delta.resize(n_layers);

    double loss = 0.0;
    const double n = static_cast<double>(data.rows.size());
    for (const auto& row : data.rows) {
        const std::vector<double> input = nn_encode(row.x, m.weather_onehot);
        const double pred = nn_forward_encoded(m, input, scratch);
        const double err = pred - row.y;
        loss += err * err;
        if (!grad_w) continue;

        // Backward pass; d(loss_i)/d(pred) = 2 * err / n.
        scratch.delta[n_layers - 1].assign(1, 2.0 * err / n);
        for (std::size_t l = n_layers - 1; l-- > 0;) {
            const int out_n = m.layer_sizes[l + 1];
            const int next_n = m.layer_sizes[l + 2];
            std::vector<double>& d = scratch.delta[l];
            d.assign(out_n, 0.0);
            for (int j = 0; j < next_n; ++j) {
                const double dj = scratch.delta[l + 1][j];
                const double* w_row = &m.weights[l + 1][static_cast<std::size_t>(j) * out_n];
                for (int i = 0; i < out_n; ++i) d[i] += dj * w_row[i];
            }
            for (int i = 0; i < out_n; ++i)
                if (scratch.a[l][i] <= 0.0) d[i] = 0.0;  // ReLU gate
        }
        for (std::size_t l = 0; l < n_layers; ++l) {
            const std::vector<double>& in = l == 0 ? input : scratch.a[l - 1];
            const int out_n = m.layer_sizes[l + 1];
            const int in_n = m.layer_sizes[l];
            for (int o = 0; o < out_n; ++o) {
                const double d = scratch.delta[l][o];
                (*grad_b)[l][o] += d;
                double* g_row = &(*grad_w)[l][static_cast<std::size_t>(o) * in_n];
                for (int i = 0; i < in_n; ++i) g_row[i] += d * in[i];
            }
        }
    }
    return loss / n;
}

Predictor train_nn(const LoadDataset& data, int epochs, double learning_rate,
                   std::uint64_t seed, int hidden1, int hidden2, int weather_onehot) {
    require(!data.rows.empty(), "cannot train on an empty dataset");
    require(epochs >= 0, "epochs must be non-negative");

    NnModel m;
    m.weather_onehot = weather_onehot;
    const int input_n = static_cast<int>(nn_encode(data.rows.front().x, weather_onehot).size());
    m.layer_sizes = {input_n, hidden1, hidden2, 1};

    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
        const int in_n = m.layer_sizes[l];
        const int out_n = m.layer_sizes[l + 1];
        const double r = std::sqrt(6.0 / static_cast<double>(in_n + out_n));
        std::vector<double> w(static_cast<std::size_t>(in_n) * out_n);
        for (double& x : w) x = rng.uniform(-r, r);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(out_n, 0.0);
    }

    std::vector<std::vector<double>> gw, gb;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        const double loss = nn_loss_and_gradients(m, data, &gw, &gb);
        if (!std::isfinite(loss))
            throw std::runtime_error("nn training diverged (non-finite loss); lower the learning rate");
        for (std::size_t l = 0; l < m.weights.size(); ++l) {
            for (std::size_t i = 0; i < m.weights[l].size(); ++i)
                m.weights[l][i] -= learning_rate * gw[l][i];
            for (std::size_t i = 0; i < m.biases[l].size(); ++i)
                m.biases[l][i] -= learning_rate * gb[l][i];
        }
    }
    return Predictor{std::move(m)};
}

// ---------------------------------------------------------------------------
// Prediction and metrics

const char* Predictor::kind() const {
    struct Visitor {
        const char* operator()(const AverageModel&) const { return "average"; }
        const char* operator()(const TreeModel&) const { return "tree"; }
        const char* operator()(const GbdtModel&) const { return "gbdt"; }
        const char* operator()(const NnModel&) const { return "nn"; }
    };
    return std::visit(Visitor{}, model);
}

double predict(const Predictor& model, const FeatureVector& x) {
    validate_features(x);
    struct Visitor {
        const FeatureVector& x;
        double operator()(const AverageModel& m) const {
            if (m.count[x.day_of_week][x.hour] > 0) return m.mean[x.day_of_week][x.hour];
            return m.global_mean;
        }
        double operator()(const TreeModel& m) const { return tree_eval(m, tree_features(x)); }
        double operator()(const GbdtModel& m) const {
            double y = m.baseline;
            const auto f = tree_features(x);
            for (const TreeModel& t : m.trees) y += m.learning_rate * tree_eval(t, f);
            return y;
        }
        double operator()(const NnModel& m) const {
            NnScratch scratch;
            scratch.a.resize(m.weights.size());
            return nn_forward_encoded(m, nn_encode(x, m.weather_onehot), scratch);
        }
    };
    return std::visit(Visitor{x}, model.model);
}

double rmse(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
    require(!y_true.empty() && y_true.size() == y_pred.size(),
            "rmse requires equal non-zero lengths");
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double e = y_true[i] - y_pred[i];
        sum_sq += e * e;
    }
    return std::sqrt(sum_sq / static_cast<double>(y_true.size()));
}

double rmse_variance(const std::vector<double>& daily_rmse) {
    require(daily_rmse.size() >= 2, "variance requires at least two values");
    const double n = static_cast<double>(daily_rmse.size());
    const double mean = std::accumulate(daily_rmse.begin(), daily_rmse.end(), 0.0) / n;
    double sum_sq = 0.0;
    for (double v : daily_rmse) sum_sq += (v - mean) * (v - mean);
    return sum_sq / (n - 1.0);
}

double clamp_load_factor(double y) { return std::clamp(y, 0.0, 1.2); }

// ---------------------------------------------------------------------------
// Serialization: line-oriented text, doubles at 17 significant digits so a
// round trip reproduces the exact values.

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_tree(const TreeModel& t, std::ostream& out) {
    out << "nodes " << t.nodes.size() << "\n";
    for (const TreeNode& n : t.nodes) {
        if (n.feature < 0)
            out << "leaf " << fmt(n.value) << "\n";
        else
            out << "split " << n.feature << " " << fmt(n.threshold) << " " << n.left << " "
                << n.right << "\n";
    }
}

TreeModel read_tree(std::istream& in) {
    std::string tag;
    std::size_t count = 0;
    in >> tag >> count;
    require(tag == "nodes", "model file: expected 'nodes'");
    TreeModel t;
    t.nodes.resize(count);
    for (TreeNode& n : t.nodes) {
        in >> tag;
        if (tag == "leaf") {
            in >> n.value;
        } else if (tag == "split") {
            in >> n.feature >> n.threshold >> n.left >> n.right;
        } else {
            throw std::invalid_argument("model file: bad node tag '" + tag + "'");
        }
    }
    return t;
}

}  // namespace

void save_model(const Predictor& model, std::ostream& out) {
    out << "hessems-model 1\n";
    out << "kind " << model.kind() << "\n";
    struct Visitor {
        std::ostream& out;
        void operator()(const AverageModel& m) const {
            out << "global_mean " << fmt(m.global_mean) << "\n";
            for (int d = 0; d < 7; ++d)
                for (int h = 0; h < 24; ++h)
                    if (m.count[d][h] > 0)
                        out << "cell " << d << " " << h << " " << fmt(m.mean[d][h]) << " "
                            << m.count[d][h] << "\n";
            out << "cells_end\n";
        }
        void operator()(const TreeModel& m) const { write_tree(m, out); }
        void operator()(const GbdtModel& m) const {
            out << "baseline " << fmt(m.baseline) << "\n";
            out << "learning_rate " << fmt(m.learning_rate) << "\n";
            out << "trees " << m.trees.size() << "\n";
            for (const TreeModel& t : m.trees) write_tree(t, out);
        }
        void operator()(const NnModel& m) const {
            out << "weather_onehot " << m.weather_onehot << "\n";
            out << "sizes";
            for (int s : m.layer_sizes) out << " " << s;
            out << "\n";
            for (std::size_t l = 0; l < m.weights.size(); ++l) {
                out << "weights " << l;
                for (double w : m.weights[l]) out << " " << fmt(w);
                out << "\nbiases " << l;
                for (double b : m.biases[l]) out << " " << fmt(b);
                out << "\n";
            }
        }
    };
    std::visit(Visitor{out}, model.model);
    out << "end\n";
}

Predictor load_model(std::istream& in) {
    std::string tag, version, kind;
    in >> tag >> version;
    require(tag == "hessems-model" && version == "1", "unsupported model file header");
    in >> tag >> kind;
    require(tag == "kind", "model file: expected 'kind'");

    Predictor p;
    if (kind == "average") {
        AverageModel m;
        in >> tag >> m.global_mean;
        require(tag == "global_mean", "model file: expected 'global_mean'");
        while (in >> tag && tag == "cell") {
            int d = 0, h = 0;
            in >> d >> h;
            require(d >= 0 && d < 7 && h >= 0 && h < 24, "model file: bad average cell");
            in >> m.mean[d][h] >> m.count[d][h];
        }
        require(tag == "cells_end", "model file: expected 'cells_end'");
        p.model = m;
    } else if (kind == "tree") {
        p.model = read_tree(in);
    } else if (kind == "gbdt") {
        GbdtModel m;
        std::size_t n = 0;
        in >> tag >> m.baseline;
        require(tag == "baseline", "model file: expected 'baseline'");
        in >> tag >> m.learning_rate;
        require(tag == "learning_rate", "model file: expected 'learning_rate'");
        in >> tag >> n;
        require(tag == "trees", "model file: expected 'trees'");
        m.trees.reserve(n);
        for (std::size_t i = 0; i < n; ++i) m.trees.push_back(read_tree(in));
        p.model = std::move(m);
    } else if (kind == "nn") {
        NnModel m;
        in >> tag >> m.weather_onehot;
        require(tag == "weather_onehot", "model file: expected 'weather_onehot'");
        in >> tag;
        require(tag == "sizes", "model file: expected 'sizes'");
        m.layer_sizes.resize(4);
        for (int& s : m.layer_sizes) in >> s;
        for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
            const std::size_t wn =
                static_cast<std::size_t>(m.layer_sizes[l]) * m.layer_sizes[l + 1];
            std::size_t li = 0;
            in >> tag >> li;
            require(tag == "weights" && li == l, "model file: expected weights block");
            std::vector<double> w(wn);
            for (double& x : w) in >> x;
            m.weights.push_back(std::move(w));
            in >> tag >> li;
            require(tag == "biases" && li == l, "model file: expected biases block");
            std::vector<double> b(static_cast<std::size_t>(m.layer_sizes[l + 1]));
            for (double& x : b) in >> x;
            m.biases.push_back(std::move(b));
        }
        p.model = std::move(m);
    } else {
        throw std::invalid_argument("model file: unknown kind '" + kind + "'");
    }
    in >> tag;
    require(tag == "end" && in.good(), "model file: missing 'end'");
    return p;
}

void save_model_file(const Predictor& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    save_model(model, out);
}

Predictor load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return load_model(in);
}

}  // namespace hessems::predict
