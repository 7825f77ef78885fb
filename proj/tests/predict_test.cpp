#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <variant>

#include "hessems/predict.hpp"
#include "hessems/rng.hpp"

using namespace hessems;
using predict::Date;
using predict::FeatureVector;
using predict::LoadDataset;
using predict::LoadRecord;
using predict::Predictor;

namespace {

FeatureVector fv(int dow, int hour, int weather = 0, double th = 25.0, double tl = 18.0,
                 int wind = 1, bool holiday = false) {
    return FeatureVector{dow, hour, weather, th, tl, wind, holiday};
}

LoadDataset::Row row(int dow, int hour, double y) { return {fv(dow, hour), y}; }

}  // namespace

TEST_CASE("calendar: parsing, arithmetic and weekday") {
    const Date d = predict::parse_date("2014-08-01");
    CHECK(d == Date{2014, 8, 1});
    CHECK(predict::to_string(d) == "2014-08-01");
    CHECK(predict::day_of_week(d) == 4);                          // Friday
    CHECK(predict::day_of_week(Date{2014, 12, 22}) == 0);         // Monday
    CHECK(predict::day_of_week(Date{1970, 1, 1}) == 3);           // Thursday
    CHECK(predict::days_from_epoch(Date{1970, 1, 1}) == 0);
    CHECK(predict::date_from_epoch(predict::days_from_epoch(Date{2014, 12, 24})) ==
          Date{2014, 12, 24});
    CHECK_THROWS_AS((void)predict::parse_date("2014/08/01"), std::invalid_argument);
    CHECK_THROWS_AS((void)predict::parse_date("2014-13-01"), std::invalid_argument);
}

TEST_CASE("normalization maps counts to load factors by the max") {
    std::vector<LoadRecord> records = {{Date{2014, 8, 4}, 8, 50}, {Date{2014, 8, 4}, 9, 100}};
    LoadDataset data = predict::normalize(records);
    CHECK(data.normalization_max == doctest::Approx(100.0));
    CHECK(data.rows[0].y == doctest::Approx(0.5));
    CHECK(data.rows[1].y == doctest::Approx(1.0));

    records = {{Date{2014, 8, 4}, 8, 70}, {Date{2014, 8, 4}, 9, 70}};
    data = predict::normalize(records);
    for (const auto& r : data.rows) CHECK(r.y == doctest::Approx(1.0));

    records = {{Date{2014, 8, 4}, 8, 30}, {Date{2014, 8, 4}, 9, 90}, {Date{2014, 8, 4}, 10, 60}};
    data = predict::normalize(records);
    CHECK(data.rows[0].y == doctest::Approx(30.0 / 90.0));
    CHECK(data.rows[1].y == doctest::Approx(1.0));
    CHECK(data.rows[2].y == doctest::Approx(60.0 / 90.0));

    CHECK_THROWS_AS((void)predict::normalize({}), std::invalid_argument);
}

TEST_CASE("normalize joins weather by date and fills the features") {
    std::vector<LoadRecord> records = {{Date{2014, 8, 4}, 8, 80}};
    std::vector<predict::WeatherRecord> weather = {{Date{2014, 8, 4}, 2, 31.0, 24.0, 3, true}};
    const LoadDataset data = predict::normalize(records, weather);
    CHECK(data.rows[0].x.day_of_week == 0);  // 2014-08-04 is a Monday
    CHECK(data.rows[0].x.weather_code == 2);
    CHECK(data.rows[0].x.temp_high_c == doctest::Approx(31.0));
    CHECK(data.rows[0].x.is_holiday);
    CHECK_THROWS_AS((void)predict::normalize(records, {}), std::invalid_argument);
}

TEST_CASE("average model: cell means with global fallback") {
    LoadDataset data;
    data.normalization_max = 100.0;
    data.rows = {row(0, 8, 0.7)};
    Predictor single = predict::train_average(data);
    CHECK(predict::predict(single, fv(0, 8)) == doctest::Approx(0.7));

    data.rows = {row(0, 8, 0.6), row(0, 8, 0.8)};
    Predictor pair = predict::train_average(data);
    CHECK(predict::predict(pair, fv(0, 8)) == doctest::Approx(0.7));
    // unseen cell falls back to the global mean
    CHECK(predict::predict(pair, fv(3, 12)) == doctest::Approx(0.7));
}

TEST_CASE("average model equals the brute-force filtered mean") {
    Rng rng(21);
    LoadDataset data;
    data.normalization_max = 1.0;
    for (int i = 0; i < 400; ++i)
        data.rows.push_back(row(rng.uniform_int(0, 6), rng.uniform_int(0, 23), rng.uniform()));
    const Predictor model = predict::train_average(data);
    for (int probe = 0; probe < 40; ++probe) {
        const int d = rng.uniform_int(0, 6);
        const int h = rng.uniform_int(0, 23);
        double sum = 0.0;
        int count = 0;
        for (const auto& r : data.rows)
            if (r.x.day_of_week == d && r.x.hour == h) {
                sum += r.y;
                ++count;
            }
        if (count == 0) continue;
        CHECK(predict::predict(model, fv(d, h)) == doctest::Approx(sum / count).epsilon(1e-12));
    }
}

namespace {

// Independent split search for the oracle check: brute force over every
// feature and every midpoint threshold, minimizing the summed child SSE.
struct BruteSplit {
    int feature = -1;
    double threshold = 0.0;
    double children_sse = 0.0;
};

double sse_of(const std::vector<double>& ys) {
    double sum = 0.0;
    for (double y : ys) sum += y;
    const double mean = ys.empty() ? 0.0 : sum / static_cast<double>(ys.size());
    double sse = 0.0;
    for (double y : ys) sse += (y - mean) * (y - mean);
    return sse;
}

BruteSplit brute_force_split(const LoadDataset& data) {
    BruteSplit best;
    double best_sse = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 7; ++k) {
        std::vector<double> values;
        for (const auto& r : data.rows) values.push_back(predict::tree_features(r.x)[k]);
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double t = 0.5 * (values[i] + values[i + 1]);
            std::vector<double> left, right;
            for (const auto& r : data.rows)
                (predict::tree_features(r.x)[k] <= t ? left : right).push_back(r.y);
            if (left.empty() || right.empty()) continue;
            const double sse = sse_of(left) + sse_of(right);
            if (sse < best_sse) {
                best_sse = sse;
                best = {k, t, sse};
            }
        }
    }
    return best;
}

}  // namespace

TEST_CASE("regression tree: constant targets collapse to one leaf") {
    LoadDataset data;
    data.normalization_max = 1.0;
    for (int h : {1, 5, 9, 20}) data.rows.push_back(row(2, h, 0.4));
    const Predictor model = predict::train_regression_tree(data, 5, 1, 0.0);
    const auto& tree = std::get<predict::TreeModel>(model.model);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].value == doctest::Approx(0.4));
}

TEST_CASE("regression tree: depth-1 split matches the exhaustive oracle") {
    LoadDataset data;
    data.normalization_max = 1.0;
    data.rows = {row(0, 1, 0.1), row(0, 2, 0.1), row(0, 9, 0.9), row(0, 10, 0.9)};
    const Predictor model = predict::train_regression_tree(data, 1, 1, 0.0);
    const auto& tree = std::get<predict::TreeModel>(model.model);
    REQUIRE(tree.nodes.size() == 3);
    CHECK(tree.nodes[0].feature == 1);  // hour
    CHECK(tree.nodes[0].threshold == doctest::Approx(5.5));

    const BruteSplit oracle = brute_force_split(data);
    CHECK(tree.nodes[0].feature == oracle.feature);
    CHECK(tree.nodes[0].threshold == doctest::Approx(oracle.threshold));

    CHECK(predict::predict(model, fv(0, 2)) == doctest::Approx(0.1));
    CHECK(predict::predict(model, fv(0, 9)) == doctest::Approx(0.9));
}

TEST_CASE("regression tree predictions stay within the target range and equal leaf means") {
    Rng rng(31);
    LoadDataset data;
    data.normalization_max = 1.0;
    for (int i = 0; i < 300; ++i)
        data.rows.push_back({fv(rng.uniform_int(0, 6), rng.uniform_int(0, 23),
                                rng.uniform_int(0, 3), rng.uniform(10, 35), rng.uniform(5, 9),
                                rng.uniform_int(0, 6), rng.uniform() < 0.1),
                             rng.uniform()});
    const Predictor model = predict::train_regression_tree(data, 6, 3, 1e-6);

    double lo = 1e9, hi = -1e9;
    for (const auto& r : data.rows) {
        lo = std::min(lo, r.y);
        hi = std::max(hi, r.y);
    }
    // a prediction is the mean of the training rows routed to its leaf
    const auto& tree = std::get<predict::TreeModel>(model.model);
    for (int probe = 0; probe < 50; ++probe) {
        const auto& x = data.rows[static_cast<std::size_t>(rng.uniform_int(
                                      0, static_cast<int>(data.rows.size()) - 1))]
                            .x;
        const double pred = predict::predict(model, x);
        CHECK(pred >= lo - 1e-12);
        CHECK(pred <= hi + 1e-12);
        // re-route the training set to this row's leaf
        int leaf = 0;
        {
            const auto f = predict::tree_features(x);
            int node = 0;
            while (tree.nodes[node].feature >= 0)
                node = f[tree.nodes[node].feature] <= tree.nodes[node].threshold
                           ? tree.nodes[node].left
                           : tree.nodes[node].right;
            leaf = node;
        }
        double sum = 0.0;
        int count = 0;
        for (const auto& r : data.rows) {
            const auto f = predict::tree_features(r.x);
            int node = 0;
            while (tree.nodes[node].feature >= 0)
                node = f[tree.nodes[node].feature] <= tree.nodes[node].threshold
                           ? tree.nodes[node].left
                           : tree.nodes[node].right;
            if (node == leaf) {
                sum += r.y;
                ++count;
            }
        }
        REQUIRE(count > 0);
        CHECK(pred == doctest::Approx(sum / count).epsilon(1e-12));
    }
}

TEST_CASE("gbdt: empty ensemble returns the baseline everywhere") {
    LoadDataset data;
    data.normalization_max = 1.0;
    data.rows = {row(0, 8, 0.2), row(1, 9, 0.6)};
    const Predictor model = predict::train_gbdt(data, 0, 0.1, 3);
    CHECK(predict::predict(model, fv(4, 15)) == doctest::Approx(0.4));
}

TEST_CASE("gbdt: one full-rate tree with enough depth cancels the residuals") {
    LoadDataset data;
    data.normalization_max = 1.0;
    data.rows = {row(0, 1, 0.1), row(0, 5, 0.3), row(0, 9, 0.8), row(0, 20, 0.5)};
    const Predictor model = predict::train_gbdt(data, 1, 1.0, 3);
    for (const auto& r : data.rows)
        CHECK(predict::predict(model, r.x) == doctest::Approx(r.y).epsilon(1e-12));
}

TEST_CASE("gbdt training MSE is non-increasing in the number of trees") {
    Rng rng(41);
    LoadDataset data;
    data.normalization_max = 1.0;
    for (int i = 0; i < 200; ++i) {
        const int dow = rng.uniform_int(0, 6);
        const int hour = rng.uniform_int(0, 23);
        const double y = 0.3 + 0.4 * std::sin(hour / 3.0) * (dow < 5 ? 1.0 : 0.5) +
                         rng.uniform(-0.05, 0.05);
        data.rows.push_back(row(dow, hour, y));
    }
    const Predictor full = predict::train_gbdt(data, 30, 0.3, 3);
    const auto& gbdt = std::get<predict::GbdtModel>(full.model);

    double prev_mse = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m <= gbdt.trees.size(); ++m) {
        predict::GbdtModel truncated;
        truncated.baseline = gbdt.baseline;
        truncated.learning_rate = gbdt.learning_rate;
        truncated.trees.assign(gbdt.trees.begin(), gbdt.trees.begin() + m);
        Predictor partial;
        partial.model = truncated;
        double mse = 0.0;
        for (const auto& r : data.rows) {
            const double e = predict::predict(partial, r.x) - r.y;
            mse += e * e;
        }
        mse /= static_cast<double>(data.rows.size());
        CHECK(mse <= prev_mse + 1e-12);
        prev_mse = mse;
    }
}

TEST_CASE("nn: deterministic initialization and single-row convergence") {
    LoadDataset data;
    data.normalization_max = 1.0;
    data.rows = {row(2, 8, 0.65)};

    const Predictor a = predict::train_nn(data, 0, 0.01, 123, 8, 4);
    const Predictor b = predict::train_nn(data, 0, 0.01, 123, 8, 4);
    CHECK(predict::predict(a, fv(2, 8)) == predict::predict(b, fv(2, 8)));

    const Predictor trained = predict::train_nn(data, 200, 0.01, 123);
    const double err = predict::predict(trained, fv(2, 8)) - 0.65;
    CHECK(err * err < 1e-4);
}

TEST_CASE("nn backprop gradients match central finite differences") {
    LoadDataset data;
    data.normalization_max = 1.0;
    data.rows = {row(0, 6, 0.3), row(2, 8, 0.9), row(4, 13, 0.5), row(5, 20, 0.2)};
    Predictor model = predict::train_nn(data, 3, 0.05, 7, 5, 3);
    auto& nn = std::get<predict::NnModel>(model.model);

    std::vector<std::vector<double>> gw, gb;
    (void)predict::nn_loss_and_gradients(nn, data, &gw, &gb);

    const double h = 1e-6;
    for (std::size_t l = 0; l < nn.weights.size(); ++l) {
        for (std::size_t i = 0; i < nn.weights[l].size(); i += 3) {
            const double saved = nn.weights[l][i];
            nn.weights[l][i] = saved + h;
            const double up = predict::nn_loss_and_gradients(nn, data, nullptr, nullptr);
            nn.weights[l][i] = saved - h;
            const double down = predict::nn_loss_and_gradients(nn, data, nullptr, nullptr);
            nn.weights[l][i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double scale = std::max({std::abs(fd), std::abs(gw[l][i]), 1e-8});
            CHECK(std::abs(fd - gw[l][i]) / scale < 1e-5);
        }
    }
}

TEST_CASE("nn training reports divergence") {
    LoadDataset data;
    data.normalization_max = 1.0;
    for (int i = 0; i < 20; ++i) data.rows.push_back(row(i % 7, i, 0.5));
    CHECK_THROWS_AS((void)predict::train_nn(data, 200, 1e9, 9), std::runtime_error);
}

TEST_CASE("prediction arithmetic for hand-built models") {
    // GBDT: baseline  0.5 plus one constant stump of +0.2 at rate 0.1
    predict::GbdtModel gbdt;
    gbdt.baseline = 0.5;
    gbdt.learning_rate = 0.1;
    predict::TreeModel stump;
    stump.nodes.push_back({-1, 0.0, -1, -1, 0.2});
    gbdt.trees.push_back(stump);
    Predictor p;
    p.model = gbdt;
    CHECK(predict::predict(p, fv(1, 10)) == doctest::Approx(0.52));
    CHECK_THROWS_AS((void)predict::predict(p, fv(7, 10)), std::invalid_argument);
    CHECK_THROWS_AS((void)predict::predict(p, fv(1, 24)), std::invalid_argument);
}

TEST_CASE("rmse matches hand arithmetic") {
    CHECK(predict::rmse({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
    CHECK(predict::rmse({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(std::sqrt(12.5)));
    CHECK(predict::rmse({1.0}, {3.0}) == doctest::Approx(2.0));
    // invariant under permuting paired elements
    CHECK(predict::rmse({1.0, 5.0}, {2.0, 7.0}) == doctest::Approx(predict::rmse({5.0, 1.0}, {7.0, 2.0})));
    CHECK_THROWS_AS((void)predict::rmse({1.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS((void)predict::rmse({}, {}), std::invalid_argument);
}

TEST_CASE("rmse variance matches hand arithmetic") {
    CHECK(predict::rmse_variance({2, 2, 2, 2, 2, 2, 2}) == 0.0);
    CHECK(predict::rmse_variance({1.0, 3.0}) == doctest::Approx(2.0));
    CHECK(predict::rmse_variance({0, 0, 0, 0, 0, 0, 7.0}) == doctest::Approx(7.0));
    CHECK_THROWS_AS((void)predict::rmse_variance({1.0}), std::invalid_argument);
}

TEST_CASE("load factor clamp for the EMS") {
    CHECK(predict::clamp_load_factor(-0.2) == 0.0);
    CHECK(predict::clamp_load_factor(0.7) == doctest::Approx(0.7));
    CHECK(predict::clamp_load_factor(1.5) == doctest::Approx(1.2));
}

TEST_CASE("model serialization round-trips losslessly") {
    Rng rng(71);
    LoadDataset data;
    data.normalization_max = 1.0;
    for (int i = 0; i < 120; ++i)
        data.rows.push_back({fv(rng.uniform_int(0, 6), rng.uniform_int(0, 23),
                                rng.uniform_int(0, 3), rng.uniform(10, 35), rng.uniform(5, 9),
                                rng.uniform_int(0, 6), rng.uniform() < 0.1),
                             rng.uniform()});

    std::vector<Predictor> models;
    models.push_back(predict::train_average(data));
    models.push_back(predict::train_regression_tree(data, 5, 2, 1e-5));
    models.push_back(predict::train_gbdt(data, 10, 0.2, 3));
    models.push_back(predict::train_nn(data, 5, 0.01, 17, 6, 4));

    for (const Predictor& model : models) {
        std::stringstream buffer;
        predict::save_model(model, buffer);
        const Predictor loaded = predict::load_model(buffer);
        CHECK(std::string(loaded.kind()) == model.kind());
        for (int probe = 0; probe < 25; ++probe) {
            const FeatureVector x = fv(rng.uniform_int(0, 6), rng.uniform_int(0, 23),
                                       rng.uniform_int(0, 3), rng.uniform(10, 35),
                                       rng.uniform(5, 9), rng.uniform_int(0, 6), false);
            CHECK(predict::predict(loaded, x) == predict::predict(model, x));
        }
        // a second save emits identical bytes
        std::stringstream again;
        predict::save_model(loaded, again);
        CHECK(again.str() == buffer.str());
    }
}

TEST_CASE("feature validation rejects out-of-range categoricals") {
    CHECK_THROWS_AS(predict::validate_features(fv(-1, 10)), std::invalid_argument);
    CHECK_THROWS_AS(predict::validate_features(fv(0, 25)), std::invalid_argument);
    CHECK_THROWS_AS(predict::validate_features(fv(0, 10, 0, 10.0, 20.0)), std::invalid_argument);
}
