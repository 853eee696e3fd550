#include "rulefuse/ted.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "rulefuse/error.hpp"

namespace rulefuse {

CartesianCodec CartesianCodec::from_pairs(const std::vector<int>& y, const std::vector<int>& e) {
    if (y.size() != e.size()) throw DataError("label and explanation vectors differ in length");
    std::set<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < y.size(); ++i) seen.insert({y[i], e[i]});
    CartesianCodec codec;
    for (const auto& p : seen) {
        codec.index_[p] = codec.pairs_.size();
        codec.pairs_.push_back(p);
    }
    return codec;
}

std::size_t CartesianCodec::encode(int y, int e) const {
    auto it = index_.find({y, e});
    if (it == index_.end()) {
        throw DataError("pair (y=" + std::to_string(y) + ", e=" + std::to_string(e) +
                        ") was not observed at fit time");
    }
    return it->second;
}

std::pair<int, int> CartesianCodec::decode(std::size_t cls) const {
    if (cls >= pairs_.size()) throw DataError("class index out of range");
    return pairs_[cls];
}

nlohmann::json CartesianCodec::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [y, e] : pairs_) arr.push_back({{"y", y}, {"e", e}});
    return arr;
}

CartesianCodec CartesianCodec::from_json(const nlohmann::json& j) {
    CartesianCodec codec;
    for (const auto& item : j) {
        std::pair<int, int> p{item.at("y").get<int>(), item.at("e").get<int>()};
        codec.index_[p] = codec.pairs_.size();
        codec.pairs_.push_back(p);
    }
    return codec;
}

FeatureMatrix to_feature_matrix(const BinarizedMatrix& bm) {
    FeatureMatrix x;
    x.n_rows = bm.n_rows;
    x.n_cols = bm.n_cols();
    x.data.resize(x.n_rows * x.n_cols);
    for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] = bm.bits[i] ? 1.0 : 0.0;
    return x;
}

namespace ted_detail {

double logistic_loss(const std::vector<double>& w, double b, const FeatureMatrix& x,
                     const std::vector<double>& targets, double l2) {
    const double n = static_cast<double>(x.n_rows);
    double loss = 0.0;
    for (std::size_t r = 0; r < x.n_rows; ++r) {
        const double* row = x.row(r);
        double z = b;
        for (std::size_t c = 0; c < x.n_cols; ++c) z += w[c] * row[c];
        // max(z,0) - z*t + log(1 + exp(-|z|))
        loss += std::max(z, 0.0) - z * targets[r] + std::log1p(std::exp(-std::abs(z)));
    }
    loss /= n;
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return loss + 0.5 * l2 * reg;
}

void logistic_gradient(const std::vector<double>& w, double b, const FeatureMatrix& x,
                       const std::vector<double>& targets, double l2, std::vector<double>& grad_w,
                       double& grad_b) {
    const double n = static_cast<double>(x.n_rows);
    grad_w.assign(x.n_cols, 0.0);
    grad_b = 0.0;
    for (std::size_t r = 0; r < x.n_rows; ++r) {
        const double* row = x.row(r);
        double z = b;
        for (std::size_t c = 0; c < x.n_cols; ++c) z += w[c] * row[c];
        const double p = 1.0 / (1.0 + std::exp(-z));
        const double err = p - targets[r];
        grad_b += err;
        for (std::size_t c = 0; c < x.n_cols; ++c) grad_w[c] += err * row[c];
    }
    grad_b /= n;
    for (std::size_t c = 0; c < x.n_cols; ++c) grad_w[c] = grad_w[c] / n + l2 * w[c];
}

}  // namespace ted_detail

TedModel fit_ted(const BinarizedMatrix& bm, const std::vector<int>& y, const ExplanationVector& e,
                 const TedTrainConfig& config) {
    if (bm.n_rows == 0) throw DataError("cannot fit on empty data");
    if (y.size() != bm.n_rows || e.codes.size() != bm.n_rows) {
        throw DataError("label/explanation length does not match matrix rows");
    }

    TedModel model;
    model.codec = CartesianCodec::from_pairs(y, e.codes);
    model.n_features = bm.n_cols();
    model.config = config;

    const std::size_t k = model.codec.n_classes();
    const FeatureMatrix x = to_feature_matrix(bm);

    std::vector<std::size_t> cls(bm.n_rows);
    std::vector<std::size_t> class_count(k, 0);
    for (std::size_t r = 0; r < bm.n_rows; ++r) {
        cls[r] = model.codec.encode(y[r], e.codes[r]);
        class_count[cls[r]]++;
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (class_count[c] < 2) {
            auto [py, pe] = model.codec.decode(c);
            std::ostringstream msg;
            msg << "class (y=" << py << ", e=" << pe << ") has " << class_count[c]
                << " training example(s)";
            model.warnings.push_back(msg.str());
        }
    }

    model.weights.assign(k, std::vector<double>(model.n_features, 0.0));
    model.biases.assign(k, 0.0);

    std::vector<std::vector<double>> targets(k, std::vector<double>(bm.n_rows, 0.0));
    for (std::size_t r = 0; r < bm.n_rows; ++r) targets[cls[r]][r] = 1.0;

    std::vector<double> grad_w;
    double grad_b = 0.0;
    model.epoch_losses.reserve(config.epochs + 1);
    for (std::size_t epoch = 0; epoch <= config.epochs; ++epoch) {
        double total_loss = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            total_loss += ted_detail::logistic_loss(model.weights[c], model.biases[c], x, targets[c],
                                                    config.l2);
            if (epoch == config.epochs) continue;  // final pass records the loss only
            ted_detail::logistic_gradient(model.weights[c], model.biases[c], x, targets[c], config.l2,
                                          grad_w, grad_b);
            for (std::size_t f = 0; f < model.n_features; ++f) {
                model.weights[c][f] -= config.learning_rate * grad_w[f];
            }
            model.biases[c] -= config.learning_rate * grad_b;
        }
        model.epoch_losses.push_back(total_loss);
    }
    return model;
}

namespace {

Prediction predict_from_scores(const TedModel& model, std::vector<double> scores) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c) {
        if (scores[c] > scores[best]) best = c;  // strict: ties keep the lowest index
    }
    auto [y, e] = model.codec.decode(best);
    return {y, e, best, std::move(scores)};
}

}  // namespace

Prediction predict(const TedModel& model, const std::vector<std::uint8_t>& row_bits) {
    if (row_bits.size() != model.n_features) {
        throw DataError("feature width mismatch: model expects " + std::to_string(model.n_features) +
                        ", row has " + std::to_string(row_bits.size()));
    }
    std::vector<double> scores(model.codec.n_classes());
    for (std::size_t c = 0; c < scores.size(); ++c) {
        double z = model.biases[c];
        const auto& w = model.weights[c];
        for (std::size_t f = 0; f < model.n_features; ++f) {
            if (row_bits[f]) z += w[f];
        }
        scores[c] = z;
    }
    return predict_from_scores(model, std::move(scores));
}

Prediction predict_row(const TedModel& model, const FeatureMatrix& x, std::size_t row) {
    if (x.n_cols != model.n_features) {
        throw DataError("feature width mismatch: model expects " + std::to_string(model.n_features) +
                        ", matrix has " + std::to_string(x.n_cols));
    }
    const double* r = x.row(row);
    std::vector<double> scores(model.codec.n_classes());
    for (std::size_t c = 0; c < scores.size(); ++c) {
        double z = model.biases[c];
        const auto& w = model.weights[c];
        for (std::size_t f = 0; f < model.n_features; ++f) z += w[f] * r[f];
        scores[c] = z;
    }
    return predict_from_scores(model, std::move(scores));
}

PerLabelMetrics weighted_average(const std::vector<PerLabelMetrics>& rows) {
    PerLabelMetrics out;
    out.label = -1;
    double total = 0.0;
    for (const auto& r : rows) total += static_cast<double>(r.support);
    if (total == 0.0) return out;
    for (const auto& r : rows) {
        const double w = static_cast<double>(r.support) / total;
        out.precision += w * r.precision;
        out.recall += w * r.recall;
        out.f1 += w * r.f1;
        out.support += r.support;
    }
    return out;
}

EvalReport evaluate(const TedModel& model, const BinarizedMatrix& bm_test,
                    const std::vector<int>& y_test, const ExplanationVector& e_test) {
    if (bm_test.n_rows == 0) throw DataError("cannot evaluate on an empty test set");
    if (y_test.size() != bm_test.n_rows || e_test.codes.size() != bm_test.n_rows) {
        throw DataError("test label/explanation length does not match matrix rows");
    }

    const FeatureMatrix x = to_feature_matrix(bm_test);
    const std::size_t n = bm_test.n_rows;
    std::size_t y_ok = 0, e_ok = 0, ye_ok = 0;
    EvalReport report;
    for (std::size_t r = 0; r < n; ++r) {
        const Prediction pred = predict_row(model, x, r);
        const bool ym = pred.y == y_test[r];
        const bool em = pred.e == e_test.codes[r];
        y_ok += ym;
        e_ok += em;
        ye_ok += ym && em;
        report.confusion[y_test[r]][pred.y]++;
    }
    report.y_accuracy = static_cast<double>(y_ok) / static_cast<double>(n);
    report.e_accuracy = static_cast<double>(e_ok) / static_cast<double>(n);
    report.ye_accuracy = static_cast<double>(ye_ok) / static_cast<double>(n);

    for (int label = 0; label <= 1; ++label) {
        const auto tp = static_cast<double>(report.confusion[label][label]);
        const auto fn = static_cast<double>(report.confusion[label][1 - label]);
        const auto fp = static_cast<double>(report.confusion[1 - label][label]);
        PerLabelMetrics m;
        m.label = label;
        m.support = report.confusion[label][0] + report.confusion[label][1];
        m.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
        m.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
        m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                            : 0.0;
        report.per_label.push_back(m);
    }
    report.weighted = weighted_average(report.per_label);
    return report;
}

nlohmann::json TedModel::to_json() const {
    return {{"codec", codec.to_json()},
            {"n_features", n_features},
            {"weights", weights},
            {"biases", biases},
            {"config",
             {{"learning_rate", config.learning_rate},
              {"epochs", config.epochs},
              {"l2", config.l2},
              {"seed", config.seed}}},
            {"warnings", warnings}};
}

TedModel TedModel::from_json(const nlohmann::json& j) {
    TedModel m;
    m.codec = CartesianCodec::from_json(j.at("codec"));
    m.n_features = j.at("n_features").get<std::size_t>();
    m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    m.biases = j.at("biases").get<std::vector<double>>();
    const auto& c = j.at("config");
    m.config.learning_rate = c.at("learning_rate").get<double>();
    m.config.epochs = c.at("epochs").get<std::size_t>();
    m.config.l2 = c.at("l2").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    if (j.contains("warnings")) m.warnings = j["warnings"].get<std::vector<std::string>>();
    return m;
}

namespace {

nlohmann::json metrics_to_json(const PerLabelMetrics& m) {
    return {{"label", m.label},
            {"precision", m.precision},
            {"recall", m.recall},
            {"f1", m.f1},
            {"support", m.support}};
}

PerLabelMetrics metrics_from_json(const nlohmann::json& j) {
    PerLabelMetrics m;
    m.label = j.at("label").get<int>();
    m.precision = j.at("precision").get<double>();
    m.recall = j.at("recall").get<double>();
    m.f1 = j.at("f1").get<double>();
    m.support = j.at("support").get<std::size_t>();
    return m;
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& m : per_label) per.push_back(metrics_to_json(m));
    return {{"y_accuracy", y_accuracy},
            {"e_accuracy", e_accuracy},
            {"ye_accuracy", ye_accuracy},
            {"per_label", per},
            {"weighted", metrics_to_json(weighted)},
            {"confusion", {{confusion[0][0], confusion[0][1]}, {confusion[1][0], confusion[1][1]}}}};
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
    EvalReport r;
    r.y_accuracy = j.at("y_accuracy").get<double>();
    r.e_accuracy = j.at("e_accuracy").get<double>();
    r.ye_accuracy = j.at("ye_accuracy").get<double>();
    for (const auto& m : j.at("per_label")) r.per_label.push_back(metrics_from_json(m));
    r.weighted = metrics_from_json(j.at("weighted"));
    for (int a = 0; a < 2; ++a) {
        for (int p = 0; p < 2; ++p) r.confusion[a][p] = j.at("confusion")[a][p].get<std::size_t>();
    }
    return r;
}

std::string EvalReport::to_table() const {
    char buf[128];
    std::string out = "class        precision    recall  f1-score   support\n";
    auto add_row = [&](const std::string& name, const PerLabelMetrics& m) {
        std::snprintf(buf, sizeof(buf), "%-12s %9.2f %9.2f %9.2f %9zu\n", name.c_str(), m.precision,
                      m.recall, m.f1, m.support);
        out += buf;
    };
    for (const auto& m : per_label) {
        add_row(m.label == 0 ? "0 (stay)" : "1 (churn)", m);
    }
    add_row("weighted avg", weighted);
    std::snprintf(buf, sizeof(buf),
                  "\ny accuracy %.4f | e accuracy %.4f | y+e accuracy %.4f\n", y_accuracy,
                  e_accuracy, ye_accuracy);
    out += buf;
    return out;
}

}  // namespace rulefuse
