#ifndef RULEFUSE_TED_HPP
#define RULEFUSE_TED_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rulefuse/binarizer.hpp"
#include "rulefuse/explanation.hpp"

namespace rulefuse {

// Bijection between the (label, explanation) pairs observed at fit time and
// dense class indices 0..K-1, ordered ascending by (y, e).
class CartesianCodec {
public:
    CartesianCodec() = default;
    static CartesianCodec from_pairs(const std::vector<int>& y, const std::vector<int>& e);

    std::size_t n_classes() const { return pairs_.size(); }
    const std::vector<std::pair<int, int>>& observed_pairs() const { return pairs_; }

    // Throws DataError for a pair unseen at fit time.
    std::size_t encode(int y, int e) const;
    std::pair<int, int> decode(std::size_t cls) const;

    nlohmann::json to_json() const;
    static CartesianCodec from_json(const nlohmann::json& j);

private:
    std::vector<std::pair<int, int>> pairs_;
    std::map<std::pair<int, int>, std::size_t> index_;
};

// Dense row-major feature view of a binarized matrix.
struct FeatureMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> data;

    const double* row(std::size_t r) const { return data.data() + r * n_cols; }
};

FeatureMatrix to_feature_matrix(const BinarizedMatrix& bm);

struct TedTrainConfig {
    double learning_rate = 0.5;
    std::size_t epochs = 600;
    double l2 = 1e-4;
    std::uint64_t seed = 0;  // reserved; training is zero-initialized and deterministic
};

// One-vs-rest logistic scorer per Cartesian class, trained with full-batch
// gradient descent from zero weights.
struct TedModel {
    CartesianCodec codec;
    std::size_t n_features = 0;
    std::vector<std::vector<double>> weights;  // [class][feature]
    std::vector<double> biases;                // [class]
    TedTrainConfig config;
    std::vector<double> epoch_losses;  // summed class losses; epochs+1 entries
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
    static TedModel from_json(const nlohmann::json& j);
};

TedModel fit_ted(const BinarizedMatrix& bm, const std::vector<int>& y, const ExplanationVector& e,
                 const TedTrainConfig& config);

struct Prediction {
    int y = 0;
    int e = 0;
    std::size_t cls = 0;
    std::vector<double> scores;  // raw per-class margins
};

// Argmax over class scores; ties break to the lowest class index.
Prediction predict(const TedModel& model, const std::vector<std::uint8_t>& row_bits);
Prediction predict_row(const TedModel& model, const FeatureMatrix& x, std::size_t row);

struct PerLabelMetrics {
    int label = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

// Support-weighted averages across per-label rows.
PerLabelMetrics weighted_average(const std::vector<PerLabelMetrics>& rows);

struct EvalReport {
    double y_accuracy = 0.0;
    double e_accuracy = 0.0;
    double ye_accuracy = 0.0;
    std::vector<PerLabelMetrics> per_label;  // labels 0 and 1
    PerLabelMetrics weighted;
    std::size_t confusion[2][2] = {{0, 0}, {0, 0}};  // [actual][predicted]

    nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
    // Aligned text block: class rows then the weighted-average row.
    std::string to_table() const;
};

// Scores the joint prediction: y/e/ye accuracy plus a per-label
// classification report over Y. E_test must come label-free from the
// explain module.
EvalReport evaluate(const TedModel& model, const BinarizedMatrix& bm_test,
                    const std::vector<int>& y_test, const ExplanationVector& e_test);

namespace ted_detail {

// Mean cross-entropy of the one-vs-rest logistic for a single class plus
// (l2/2)*||w||^2; bias unpenalized. Exposed for the finite-difference check.
double logistic_loss(const std::vector<double>& w, double b, const FeatureMatrix& x,
                     const std::vector<double>& targets, double l2);
void logistic_gradient(const std::vector<double>& w, double b, const FeatureMatrix& x,
                       const std::vector<double>& targets, double l2, std::vector<double>& grad_w,
                       double& grad_b);

}  // namespace ted_detail

}  // namespace rulefuse

#endif
