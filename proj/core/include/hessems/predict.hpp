#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace hessems::predict {

struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    bool operator==(const Date&) const = default;
    auto operator<=>(const Date&) const = default;
};

Date parse_date(const std::string& iso);  // "YYYY-MM-DD"
std::string to_string(const Date& d);
long days_from_epoch(const Date& d);      // days since 1970-01-01
Date date_from_epoch(long days);
int day_of_week(const Date& d);           // 0 = Monday .. 6 = Sunday

struct LoadRecord {
    Date date;
    int hour = 0;            // 0..23
    long passenger_count = 0;
};

struct WeatherRecord {
    Date date;
    int weather_code = 0;    // small category, 0 = clear
    double temp_high_c = 0.0;
    double temp_low_c = 0.0;
    int wind_level = 0;
    bool is_holiday = false;
};

struct FeatureVector {
    int day_of_week = 0;     // 0..6
    int hour = 0;            // 0..23
    int weather_code = 0;
    double temp_high_c = 0.0;
    double temp_low_c = 0.0;
    int wind_level = 0;
    bool is_holiday = false;
};

// Throws std::invalid_argument when a categorical is out of range or
// temp_high < temp_low.
void validate_features(const FeatureVector& x);

struct LoadDataset {
    struct Row {
        FeatureVector x;
        double y = 0.0;  // load factor in [0, 1]
    };
    std::vector<Row> rows;
    double normalization_max = 0.0;  // max train passenger count
};

/// Max-normalizes passenger counts into load factors. Weather features
/// default to neutral values when no weather table is supplied.
LoadDataset normalize(const std::vector<LoadRecord>& records);
LoadDataset normalize(const std::vector<LoadRecord>& records,
                      const std::vector<WeatherRecord>& weather);

/// Day-of-week x hour table of mean load factors with a global-mean
/// fallback for cells never seen in training.
struct AverageModel {
    std::array<std::array<double, 24>, 7> mean{};
    std::array<std::array<int, 24>, 7> count{};
    double global_mean = 0.0;
};

struct TreeNode {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;  // route left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    double value = 0.0;      // leaf mean
};

struct TreeModel {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct GbdtModel {
    double baseline = 0.0;
    double learning_rate = 0.1;
    std::vector<TreeModel> trees;
};

struct NnModel {
    // Four layers: input, two ReLU hidden layers, linear output.
    std::vector<int> layer_sizes;                 // {in, h1, h2, 1}
    std::vector<std::vector<double>> weights;     // per layer, row-major out x in
    std::vector<std::vector<double>> biases;      // per layer
    int weather_onehot = 4;
};

struct Predictor {
    std::variant<AverageModel, TreeModel, GbdtModel, NnModel> model;

    const char* kind() const;
};

Predictor train_average(const LoadDataset& data);
Predictor train_regression_tree(const LoadDataset& data, int max_depth, int min_leaf,
                                double min_impurity_decrease);
Predictor train_gbdt(const LoadDataset& data, int n_trees, double learning_rate,
                     int max_depth);
Predictor train_nn(const LoadDataset& data, int epochs, double learning_rate,
                   std::uint64_t seed, int hidden1 = 32, int hidden2 = 16,
                   int weather_onehot = 4);

double predict(const Predictor& model, const FeatureVector& x);

/// Raw numeric feature layout used by the tree models.
std::array<double, 7> tree_features(const FeatureVector& x);

/// One-hot/scaled encoding used by the neural network.
std::vector<double> nn_encode(const FeatureVector& x, int weather_onehot);

/// Mean-squared-error loss over the dataset; when grad_w/grad_b are
/// non-null they receive the full-batch gradients (same shapes as the
/// model's weights/biases). Exposed so tests can check the gradients
/// against finite differences.
double nn_loss_and_gradients(const NnModel& model, const LoadDataset& data,
                             std::vector<std::vector<double>>* grad_w,
                             std::vector<std::vector<double>>* grad_b);

double rmse(const std::vector<double>& y_true, const std::vector<double>& y_pred);
double rmse_variance(const std::vector<double>& daily_rmse);

/// Clamp a raw model output to the load-factor range the EMS accepts.
double clamp_load_factor(double y);

void save_model(const Predictor& model, std::ostream& out);
Predictor load_model(std::istream& in);
void save_model_file(const Predictor& model, const std::string& path);
Predictor load_model_file(const std::string& path);

}  // namespace hessems::predict
