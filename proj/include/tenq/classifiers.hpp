#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tenq/candidates.hpp"
#include "tenq/metrics.hpp"

namespace tenq::classifiers {

using candidates::FeatureVector;
using Features = std::array<double, candidates::kFeatureCount>;

enum class ModelKind { Logistic, NaiveBayes, LinearSVM, KNN, DecisionTree, AdaBoost };

const char* to_string(ModelKind k);
ModelKind kind_from_string(std::string_view s);
const std::vector<ModelKind>& all_kinds();

struct LabeledExample {
    FeatureVector features;
    bool label = false;
    std::string source_filing;
    std::optional<std::string> snippet_ref;
    // Relabels of the same candidate append a new line with a higher revision;
    // readers keep the latest.
    std::optional<std::string> candidate_id;
    int revision = 0;
};

nlohmann::json example_to_json(const LabeledExample& e);
LabeledExample example_from_json(const nlohmann::json& j);

// One JSON object per line. Superseded revisions are dropped, first-seen order kept.
std::vector<LabeledExample> read_examples(const std::filesystem::path& path);
void write_examples(const std::filesystem::path& path, const std::vector<LabeledExample>& examples);
// Appends one line; fills in the revision when the candidate id was labeled before.
LabeledExample append_example(const std::filesystem::path& path, LabeledExample e);

struct DatasetSplit {
    std::vector<LabeledExample> train, validation, test;
};

// Stratified, deterministic 8:1:1 split. Validation and test get floor(n/10) each.
DatasetSplit split_dataset(const std::vector<LabeledExample>& data, std::uint64_t seed);

struct Scaler {
    Features mean{};
    Features sd{};

    Features apply(const Features& x) const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    int left = -1;     // x[feature] <= threshold
    int right = -1;
    double value = 0;  // positive share at the node
};

struct Stump {
    int feature = 0;
    double threshold = 0;
    int polarity = 1;  // +1 predicts positive when x > threshold
    double alpha = 0;
};

struct Model {
    ModelKind kind = ModelKind::Logistic;
    std::map<std::string, double> hyper;
    Scaler scaler;

    // Logistic, LinearSVM
    std::vector<double> weights;
    double bias = 0;
    // NaiveBayes, index 0 = negative class
    std::array<double, 2> log_prior{};
    std::array<Features, 2> nb_mean{};
    std::array<Features, 2> nb_var{};
    // KNN (standardized)
    std::vector<Features> points;
    std::vector<int> point_labels;
    // DecisionTree
    std::vector<TreeNode> nodes;
    // AdaBoost
    std::vector<Stump> stumps;
};

struct Prediction {
    bool label = false;
    double score = 0;  // label == (score >= 0.5)
};

inline constexpr int kKnnK = 8;
inline constexpr int kTreeMaxDepth = 8;
inline constexpr int kTreeMinLeaf = 2;
inline constexpr int kAdaBoostMaxLearners = 100;

Model train(const std::vector<LabeledExample>& train_set, ModelKind kind, std::uint64_t seed);
Prediction predict(const Model& model, const FeatureVector& features);
Prediction predict_raw(const Model& model, const Features& raw);
eval::Metrics evaluate(const Model& model, const std::vector<LabeledExample>& test_set);

// Accuracy of always answering the majority label of `reference` on `test_set`.
double majority_baseline(const std::vector<LabeledExample>& reference, const std::vector<LabeledExample>& test_set);

// Training-set indices of the k nearest neighbours, closest first (ties by index).
std::vector<std::size_t> nearest_neighbors(const Model& knn, const Features& raw, int k = kKnnK);

int tree_depth(const Model& model);
std::size_t learner_count(const Model& model);

std::string save_model(const Model& model);
Model load_model(std::string_view text);
void save_model_file(const Model& model, const std::filesystem::path& path);
Model load_model_file(const std::filesystem::path& path);

}  // namespace tenq::classifiers
