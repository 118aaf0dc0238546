#include "tenq/classifiers.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "tenq/error.hpp"
#include "tenq/fileio.hpp"
#include "tenq/text_util.hpp"

namespace tenq::classifiers {

namespace fs = std::filesystem;
constexpr std::size_t kF = candidates::kFeatureCount;

const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Logistic: return "logistic";
        case ModelKind::NaiveBayes: return "naive_bayes";
        case ModelKind::LinearSVM: return "linear_svm";
        case ModelKind::KNN: return "knn";
        case ModelKind::DecisionTree: return "decision_tree";
        case ModelKind::AdaBoost: return "adaboost";
    }
    return "logistic";
}

const std::vector<ModelKind>& all_kinds() {
    static const std::vector<ModelKind> kinds = {ModelKind::Logistic, ModelKind::NaiveBayes, ModelKind::LinearSVM,
                                                 ModelKind::KNN,      ModelKind::DecisionTree, ModelKind::AdaBoost};
    return kinds;
}

ModelKind kind_from_string(std::string_view s) {
    const std::string lower = text::to_lower_ascii(s);
    for (auto k : all_kinds()) {
        if (lower == to_string(k)) return k;
    }
    if (lower == "nb" || lower == "naivebayes") return ModelKind::NaiveBayes;
    if (lower == "svm" || lower == "linearsvm") return ModelKind::LinearSVM;
    if (lower == "tree" || lower == "decisiontree") return ModelKind::DecisionTree;
    throw ConfigError("unknown model kind: " + std::string(s));
}

// ---- examples ----

nlohmann::json example_to_json(const LabeledExample& e) {
    nlohmann::json j{{"features", candidates::features_to_json(e.features)},
                     {"label", e.label},
                     {"source_filing", e.source_filing}};
    if (e.snippet_ref) j["snippet_ref"] = *e.snippet_ref;
    if (e.candidate_id) j["candidate_id"] = *e.candidate_id;
    if (e.revision != 0) j["revision"] = e.revision;
    return j;
}

LabeledExample example_from_json(const nlohmann::json& j) {
    LabeledExample e;
    e.features = candidates::features_from_json(j.at("features"));
    e.label = j.at("label").get<bool>();
    e.source_filing = j.value("source_filing", "");
    if (j.contains("snippet_ref") && !j["snippet_ref"].is_null()) e.snippet_ref = j["snippet_ref"].get<std::string>();
    if (j.contains("candidate_id") && !j["candidate_id"].is_null())
        e.candidate_id = j["candidate_id"].get<std::string>();
    e.revision = j.value("revision", 0);
    return e;
}

std::vector<LabeledExample> read_examples(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<LabeledExample> out;
    std::unordered_map<std::string, std::size_t> by_candidate;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        LabeledExample e;
        try {
            e = example_from_json(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& ex) {
            throw Error(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
        }
        if (e.candidate_id) {
            auto it = by_candidate.find(*e.candidate_id);
            if (it != by_candidate.end()) {
                if (e.revision >= out[it->second].revision) out[it->second] = std::move(e);
                continue;
            }
            by_candidate.emplace(*e.candidate_id, out.size());
        }
        out.push_back(std::move(e));
    }
    return out;
}

void write_examples(const fs::path& path, const std::vector<LabeledExample>& examples) {
    std::string data;
    for (const auto& e : examples) {
        data += example_to_json(e).dump();
        data += '\n';
    }
    write_file_atomic(path, data);
}

LabeledExample append_example(const fs::path& path, LabeledExample e) {
    if (e.candidate_id && fs::exists(path)) {
        for (const auto& prev : read_examples(path)) {
            if (prev.candidate_id == e.candidate_id) e.revision = std::max(e.revision, prev.revision + 1);
        }
    }
    append_line(path, example_to_json(e).dump());
    return e;
}

// ---- split ----

namespace {

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace

DatasetSplit split_dataset(const std::vector<LabeledExample>& data, std::uint64_t seed) {
    const std::size_t n = data.size();
    if (n < 10) throw TooFewExamples("need at least 10 examples, got " + std::to_string(n));
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) (data[i].label ? pos : neg).push_back(i);
    shuffle(pos, rng);
    shuffle(neg, rng);

    const std::size_t n_held = n / 10;
    const auto share = static_cast<std::size_t>(std::llround(static_cast<double>(n_held * pos.size()) / n));
    auto positives_for = [&](std::size_t pos_left, std::size_t neg_left) {
        std::size_t want = std::min(share, pos_left);
        if (n_held - want > neg_left) want = n_held - neg_left;
        return want;
    };
    const std::size_t val_pos = positives_for(pos.size(), neg.size());
    const std::size_t test_pos = positives_for(pos.size() - val_pos, neg.size() - (n_held - val_pos));
    const std::size_t val_neg = n_held - val_pos, test_neg = n_held - test_pos;

    DatasetSplit s;
    std::vector<std::size_t> idx_val, idx_test, idx_train;
    idx_val.insert(idx_val.end(), pos.begin(), pos.begin() + static_cast<std::ptrdiff_t>(val_pos));
    idx_val.insert(idx_val.end(), neg.begin(), neg.begin() + static_cast<std::ptrdiff_t>(val_neg));
    idx_test.insert(idx_test.end(), pos.begin() + static_cast<std::ptrdiff_t>(val_pos),
                    pos.begin() + static_cast<std::ptrdiff_t>(val_pos + test_pos));
    idx_test.insert(idx_test.end(), neg.begin() + static_cast<std::ptrdiff_t>(val_neg),
                    neg.begin() + static_cast<std::ptrdiff_t>(val_neg + test_neg));
    idx_train.insert(idx_train.end(), pos.begin() + static_cast<std::ptrdiff_t>(val_pos + test_pos), pos.end());
    idx_train.insert(idx_train.end(), neg.begin() + static_cast<std::ptrdiff_t>(val_neg + test_neg), neg.end());
    for (auto* idx : {&idx_train, &idx_val, &idx_test}) shuffle(*idx, rng);
    for (auto i : idx_train) s.train.push_back(data[i]);
    for (auto i : idx_val) s.validation.push_back(data[i]);
    for (auto i : idx_test) s.test.push_back(data[i]);
    return s;
}

// ---- training ----

Features Scaler::apply(const Features& x) const {
    Features z{};
    for (std::size_t f = 0; f < kF; ++f) z[f] = (x[f] - mean[f]) / sd[f];
    return z;
}

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double dot(const std::vector<double>& w, const Features& x) {
    double s = 0;
    for (std::size_t f = 0; f < kF; ++f) s += w[f] * x[f];
    return s;
}

Scaler fit_scaler(const std::vector<Features>& xs) {
    Scaler s;
    const double n = static_cast<double>(xs.size());
    for (const auto& x : xs)
        for (std::size_t f = 0; f < kF; ++f) s.mean[f] += x[f] / n;
    for (const auto& x : xs)
        for (std::size_t f = 0; f < kF; ++f) s.sd[f] += (x[f] - s.mean[f]) * (x[f] - s.mean[f]) / n;
    for (std::size_t f = 0; f < kF; ++f) {
        s.sd[f] = std::sqrt(s.sd[f]);
        if (!(s.sd[f] > 1e-12)) s.sd[f] = 1.0;
    }
    return s;
}

void train_logistic(Model& m, const std::vector<Features>& x, const std::vector<int>& y) {
    const int epochs = 500;
    const double lr = 0.1, l2 = 1e-4;
    m.hyper = {{"epochs", epochs}, {"lr", lr}, {"l2", l2}};
    m.weights.assign(kF, 0.0);
    m.bias = 0;
    const double n = static_cast<double>(x.size());
    for (int e = 0; e < epochs; ++e) {
        std::vector<double> g(kF, 0.0);
        double gb = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double err = sigmoid(dot(m.weights, x[i]) + m.bias) - y[i];
            for (std::size_t f = 0; f < kF; ++f) g[f] += err * x[i][f] / n;
            gb += err / n;
        }
        for (std::size_t f = 0; f < kF; ++f) m.weights[f] -= lr * (g[f] + l2 * m.weights[f]);
        m.bias -= lr * gb;
    }
}

void train_naive_bayes(Model& m, const std::vector<Features>& x, const std::vector<int>& y) {
    const double floor = 1e-9;
    m.hyper = {{"var_floor", floor}};
    std::array<double, 2> count{};
    m.nb_mean = {};
    m.nb_var = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
        count[y[i]] += 1;
        for (std::size_t f = 0; f < kF; ++f) m.nb_mean[y[i]][f] += x[i][f];
    }
    for (int c = 0; c < 2; ++c)
        for (std::size_t f = 0; f < kF; ++f) m.nb_mean[c][f] /= count[c];
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t f = 0; f < kF; ++f) {
            const double d = x[i][f] - m.nb_mean[y[i]][f];
            m.nb_var[y[i]][f] += d * d;
        }
    for (int c = 0; c < 2; ++c) {
        for (std::size_t f = 0; f < kF; ++f) m.nb_var[c][f] = std::max(m.nb_var[c][f] / count[c], floor);
        m.log_prior[c] = std::log(count[c] / static_cast<double>(x.size()));
    }
}

void train_svm(Model& m, const std::vector<Features>& x, const std::vector<int>& y, std::uint64_t seed) {
    const int epochs = 20;
    const double lambda = 1e-4, lr0 = 0.1;
    m.hyper = {{"epochs", epochs}, {"lambda", lambda}, {"lr0", lr0}};
    m.weights.assign(kF, 0.0);
    m.bias = 0;
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t t = 0;
    for (int e = 0; e < epochs; ++e) {
        shuffle(order, rng);
        for (auto i : order) {
            const double lr = lr0 / (1.0 + lambda * lr0 * static_cast<double>(t++));
            const double yi = y[i] ? 1.0 : -1.0;
            const double margin = yi * (dot(m.weights, x[i]) + m.bias);
            for (std::size_t f = 0; f < kF; ++f) m.weights[f] *= 1.0 - lr * lambda;
            if (margin < 1.0) {
                for (std::size_t f = 0; f < kF; ++f) m.weights[f] += lr * yi * x[i][f];
                m.bias += lr * yi;
            }
        }
    }
}

struct Split {
    int feature = -1;
    double threshold = 0;
};

// Best Gini split of the rows in idx; feature -1 when nothing improves impurity.
Split best_gini_split(const std::vector<Features>& x, const std::vector<int>& y, const std::vector<std::size_t>& idx,
                      int min_leaf) {
    const double n = static_cast<double>(idx.size());
    double total_pos = 0;
    for (auto i : idx) total_pos += y[i];
    auto gini = [](double pos, double cnt) {
        if (cnt <= 0) return 0.0;
        const double p = pos / cnt;
        return 1.0 - p * p - (1 - p) * (1 - p);
    };
    const double parent = gini(total_pos, n);
    Split best;
    double best_impurity = parent - 1e-12;
    std::vector<std::size_t> sorted = idx;
    for (std::size_t f = 0; f < kF; ++f) {
        std::stable_sort(sorted.begin(), sorted.end(), [&](auto a, auto b) { return x[a][f] < x[b][f]; });
        double left_pos = 0;
        for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
            left_pos += y[sorted[k]];
            const double lv = x[sorted[k]][f], rv = x[sorted[k + 1]][f];
            if (!(lv < rv)) continue;
            const double nl = static_cast<double>(k + 1), nr = n - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double impurity = (nl * gini(left_pos, nl) + nr * gini(total_pos - left_pos, nr)) / n;
            if (impurity < best_impurity) {
                best_impurity = impurity;
                best = {static_cast<int>(f), (lv + rv) / 2};
            }
        }
    }
    return best;
}

int grow_tree(Model& m, const std::vector<Features>& x, const std::vector<int>& y, const std::vector<std::size_t>& idx,
              int depth) {
    TreeNode node;
    double pos = 0;
    for (auto i : idx) pos += y[i];
    node.value = pos / static_cast<double>(idx.size());
    const int id = static_cast<int>(m.nodes.size());
    m.nodes.push_back(node);
    if (depth >= kTreeMaxDepth || pos == 0 || pos == static_cast<double>(idx.size())) return id;
    const Split s = best_gini_split(x, y, idx, kTreeMinLeaf);
    if (s.feature < 0) return id;
    std::vector<std::size_t> left, right;
    for (auto i : idx) (x[i][s.feature] <= s.threshold ? left : right).push_back(i);
    const int l = grow_tree(m, x, y, left, depth + 1);
    const int r = grow_tree(m, x, y, right, depth + 1);
    m.nodes[id].feature = s.feature;
    m.nodes[id].threshold = s.threshold;
    m.nodes[id].left = l;
    m.nodes[id].right = r;
    return id;
}

void train_tree(Model& m, const std::vector<Features>& x, const std::vector<int>& y) {
    m.hyper = {{"max_depth", kTreeMaxDepth}, {"min_leaf", kTreeMinLeaf}};
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    m.nodes.clear();
    grow_tree(m, x, y, idx, 0);
}

Stump best_stump(const std::vector<Features>& x, const std::vector<int>& y, const std::vector<double>& w,
                 double& best_err) {
    Stump best;
    best_err = std::numeric_limits<double>::infinity();
    double total_pos_w = 0, total_w = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        total_w += w[i];
        if (y[i]) total_pos_w += w[i];
    }
    std::vector<std::size_t> sorted(x.size());
    std::iota(sorted.begin(), sorted.end(), 0);
    for (std::size_t f = 0; f < kF; ++f) {
        std::stable_sort(sorted.begin(), sorted.end(), [&](auto a, auto b) { return x[a][f] < x[b][f]; });
        // Threshold below every value first, then between distinct values.
        double left_pos = 0, left_neg = 0;
        auto consider = [&](double threshold) {
            // polarity +1: x > t predicts positive; errors are left positives + right negatives
            const double right_neg = (total_w - total_pos_w) - left_neg;
            const double err_plus = left_pos + right_neg;
            const double err_minus = total_w - err_plus;
            if (err_plus < best_err) {
                best_err = err_plus;
                best = {static_cast<int>(f), threshold, 1, 0};
            }
            if (err_minus < best_err) {
                best_err = err_minus;
                best = {static_cast<int>(f), threshold, -1, 0};
            }
        };
        consider(x[sorted[0]][f] - 1.0);
        for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
            (y[sorted[k]] ? left_pos : left_neg) += w[sorted[k]];
            const double lv = x[sorted[k]][f], rv = x[sorted[k + 1]][f];
            if (lv < rv) consider((lv + rv) / 2);
        }
    }
    best_err /= total_w;
    return best;
}

int stump_vote(const Stump& s, const Features& z) {
    const bool above = z[s.feature] > s.threshold;
    return (above ? 1 : -1) * s.polarity;
}

void train_adaboost(Model& m, const std::vector<Features>& x, const std::vector<int>& y) {
    m.hyper = {{"max_learners", kAdaBoostMaxLearners}};
    m.stumps.clear();
    std::vector<double> w(x.size(), 1.0 / static_cast<double>(x.size()));
    for (int t = 0; t < kAdaBoostMaxLearners; ++t) {
        double err = 0;
        Stump s = best_stump(x, y, w, err);
        if (err >= 0.5) break;
        const double clipped = std::max(err, 1e-10);
        s.alpha = 0.5 * std::log((1 - clipped) / clipped);
        m.stumps.push_back(s);
        if (err <= 0) break;
        double total = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const int yi = y[i] ? 1 : -1;
            w[i] *= std::exp(-s.alpha * yi * stump_vote(s, x[i]));
            total += w[i];
        }
        for (auto& wi : w) wi /= total;
    }
}

}  // namespace

Model train(const std::vector<LabeledExample>& train_set, ModelKind kind, std::uint64_t seed) {
    std::vector<Features> raw;
    std::vector<int> y;
    for (const auto& e : train_set) {
        raw.push_back(e.features.values());
        y.push_back(e.label ? 1 : 0);
    }
    const auto positives = std::count(y.begin(), y.end(), 1);
    if (positives == 0 || positives == static_cast<long>(y.size()))
        throw DegenerateData("training set must contain both classes");

    Model m;
    m.kind = kind;
    m.scaler = fit_scaler(raw);
    std::vector<Features> x;
    x.reserve(raw.size());
    for (const auto& r : raw) x.push_back(m.scaler.apply(r));

    switch (kind) {
        case ModelKind::Logistic: train_logistic(m, x, y); break;
        case ModelKind::NaiveBayes: train_naive_bayes(m, x, y); break;
        case ModelKind::LinearSVM: train_svm(m, x, y, seed); break;
        case ModelKind::KNN:
            m.hyper = {{"k", kKnnK}};
            m.points = x;
            m.point_labels = y;
            break;
        case ModelKind::DecisionTree: train_tree(m, x, y); break;
        case ModelKind::AdaBoost: train_adaboost(m, x, y); break;
    }
    return m;
}

// ---- prediction ----

namespace {

std::vector<std::pair<double, std::size_t>> neighbor_distances(const Model& m, const Features& z) {
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(m.points.size());
    for (std::size_t i = 0; i < m.points.size(); ++i) {
        double s = 0;
        for (std::size_t f = 0; f < kF; ++f) s += (m.points[i][f] - z[f]) * (m.points[i][f] - z[f]);
        d.emplace_back(std::sqrt(s), i);
    }
    return d;
}

double knn_score(const Model& m, const Features& z) {
    auto d = neighbor_distances(m, z);
    const std::size_t k = std::min<std::size_t>(kKnnK, d.size());
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    double zero_pos = 0, zero_all = 0;
    for (std::size_t j = 0; j < k; ++j) {
        if (d[j].first == 0.0) {
            zero_all += 1;
            zero_pos += m.point_labels[d[j].second];
        }
    }
    if (zero_all > 0) return zero_pos / zero_all;
    double wp = 0, wa = 0;
    for (std::size_t j = 0; j < k; ++j) {
        const double w = 1.0 / d[j].first;
        wa += w;
        wp += w * m.point_labels[d[j].second];
    }
    return wp / wa;
}

double nb_score(const Model& m, const Features& z) {
    std::array<double, 2> ll = m.log_prior;
    for (int c = 0; c < 2; ++c) {
        for (std::size_t f = 0; f < kF; ++f) {
            const double v = m.nb_var[c][f];
            const double d = z[f] - m.nb_mean[c][f];
            ll[c] += -0.5 * std::log(2 * M_PI * v) - d * d / (2 * v);
        }
    }
    return sigmoid(ll[1] - ll[0]);
}

double tree_score(const Model& m, const Features& z) {
    if (m.nodes.empty()) return 0.5;
    int id = 0;
    while (m.nodes[id].feature >= 0) {
        const auto& n = m.nodes[id];
        id = z[n.feature] <= n.threshold ? n.left : n.right;
    }
    return m.nodes[id].value;
}

double adaboost_score(const Model& m, const Features& z) {
    double s = 0;
    for (const auto& st : m.stumps) s += st.alpha * stump_vote(st, z);
    return sigmoid(2 * s);
}

}  // namespace

Prediction predict_raw(const Model& model, const Features& raw) {
    const Features z = model.scaler.apply(raw);
    double score = 0.5;
    switch (model.kind) {
        case ModelKind::Logistic:
        case ModelKind::LinearSVM: score = sigmoid(dot(model.weights, z) + model.bias); break;
        case ModelKind::NaiveBayes: score = nb_score(model, z); break;
        case ModelKind::KNN: score = knn_score(model, z); break;
        case ModelKind::DecisionTree: score = tree_score(model, z); break;
        case ModelKind::AdaBoost: score = adaboost_score(model, z); break;
    }
    return {score >= 0.5, score};
}

Prediction predict(const Model& model, const FeatureVector& features) { return predict_raw(model, features.values()); }

eval::Metrics evaluate(const Model& model, const std::vector<LabeledExample>& test_set) {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (const auto& e : test_set) {
        const bool p = predict(model, e.features).label;
        if (p && e.label) ++tp;
        else if (p && !e.label) ++fp;
        else if (!p && e.label) ++fn;
        else ++tn;
    }
    return eval::confusion_metrics(tp, fp, fn, tn);
}

double majority_baseline(const std::vector<LabeledExample>& reference, const std::vector<LabeledExample>& test_set) {
    if (test_set.empty()) return 0;
    const auto pos = std::count_if(reference.begin(), reference.end(), [](const auto& e) { return e.label; });
    const bool majority = 2 * static_cast<std::size_t>(pos) >= reference.size();
    const auto hits = std::count_if(test_set.begin(), test_set.end(), [&](const auto& e) { return e.label == majority; });
    return static_cast<double>(hits) / static_cast<double>(test_set.size());
}

std::vector<std::size_t> nearest_neighbors(const Model& knn, const Features& raw, int k) {
    auto d = neighbor_distances(knn, knn.scaler.apply(raw));
    const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), d.size());
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk), d.end());
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < kk; ++j) out.push_back(d[j].second);
    return out;
}

int tree_depth(const Model& model) {
    if (model.nodes.empty()) return 0;
    int best = 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [id, depth] = stack.back();
        stack.pop_back();
        const auto& n = model.nodes.at(static_cast<std::size_t>(id));
        if (n.feature < 0) {
            best = std::max(best, depth);
        } else {
            stack.push_back({n.left, depth + 1});
            stack.push_back({n.right, depth + 1});
        }
    }
    return best;
}

std::size_t learner_count(const Model& model) { return model.stumps.size(); }

// ---- persistence ----

namespace {

constexpr std::string_view kMagic = "tenq-model 1";

std::string fmt(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double parse_double(std::string_view s) {
    double v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) throw ModelFormatError("bad number: " + std::string(s));
    return v;
}

std::string join(const Features& f) {
    std::string out;
    for (std::size_t i = 0; i < kF; ++i) {
        if (i) out += ' ';
        out += fmt(f[i]);
    }
    return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

Features parse_features(const std::vector<std::string_view>& tok, std::size_t from) {
    if (tok.size() < from + kF) throw ModelFormatError("expected 5 values");
    Features f{};
    for (std::size_t i = 0; i < kF; ++i) f[i] = parse_double(tok[from + i]);
    return f;
}

}  // namespace

std::string save_model(const Model& m) {
    std::ostringstream out;
    out << kMagic << '\n' << "kind " << to_string(m.kind) << '\n';
    for (const auto& [k, v] : m.hyper) out << "hyper " << k << ' ' << fmt(v) << '\n';
    out << "scaler_mean " << join(m.scaler.mean) << '\n';
    out << "scaler_sd " << join(m.scaler.sd) << '\n';
    switch (m.kind) {
        case ModelKind::Logistic:
        case ModelKind::LinearSVM: {
            Features w{};
            std::copy(m.weights.begin(), m.weights.end(), w.begin());
            out << "weights " << join(w) << '\n' << "bias " << fmt(m.bias) << '\n';
            break;
        }
        case ModelKind::NaiveBayes:
            for (int c = 0; c < 2; ++c) {
                out << "class " << c << ' ' << fmt(m.log_prior[c]) << '\n';
                out << "mean " << c << ' ' << join(m.nb_mean[c]) << '\n';
                out << "var " << c << ' ' << join(m.nb_var[c]) << '\n';
            }
            break;
        case ModelKind::KNN:
            out << "points " << m.points.size() << '\n';
            for (std::size_t i = 0; i < m.points.size(); ++i)
                out << "point " << m.point_labels[i] << ' ' << join(m.points[i]) << '\n';
            break;
        case ModelKind::DecisionTree:
            out << "nodes " << m.nodes.size() << '\n';
            for (const auto& n : m.nodes)
                out << "node " << n.feature << ' ' << fmt(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
                    << fmt(n.value) << '\n';
            break;
        case ModelKind::AdaBoost:
            out << "stumps " << m.stumps.size() << '\n';
            for (const auto& s : m.stumps)
                out << "stump " << s.feature << ' ' << fmt(s.threshold) << ' ' << s.polarity << ' ' << fmt(s.alpha)
                    << '\n';
            break;
    }
    out << "end\n";
    return out.str();
}

Model load_model(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kMagic) throw ModelFormatError("not a model file (bad header)");
    Model m;
    bool have_kind = false, ended = false;
    auto to_int = [](std::string_view s) { return static_cast<int>(parse_double(s)); };
    auto check_feature = [](int f) {
        if (f < -1 || f >= static_cast<int>(kF)) throw ModelFormatError("feature index out of range");
        return f;
    };
    while (std::getline(in, line)) {
        const auto tok = split_ws(line);
        if (tok.empty()) continue;
        const auto key = tok[0];
        try {
            if (key == "end") {
                ended = true;
                break;
            } else if (key == "kind" && tok.size() == 2) {
                m.kind = kind_from_string(tok[1]);
                have_kind = true;
            } else if (key == "hyper" && tok.size() == 3) {
                m.hyper[std::string(tok[1])] = parse_double(tok[2]);
            } else if (key == "scaler_mean") {
                m.scaler.mean = parse_features(tok, 1);
            } else if (key == "scaler_sd") {
                m.scaler.sd = parse_features(tok, 1);
            } else if (key == "weights") {
                auto w = parse_features(tok, 1);
                m.weights.assign(w.begin(), w.end());
            } else if (key == "bias" && tok.size() == 2) {
                m.bias = parse_double(tok[1]);
            } else if ((key == "class" || key == "mean" || key == "var") && tok.size() >= 3) {
                const int c = to_int(tok[1]);
                if (c != 0 && c != 1) throw ModelFormatError("class index must be 0 or 1");
                if (key == "class") m.log_prior[c] = parse_double(tok[2]);
                else if (key == "mean") m.nb_mean[c] = parse_features(tok, 2);
                else m.nb_var[c] = parse_features(tok, 2);
            } else if (key == "point" && tok.size() == 2 + kF) {
                m.point_labels.push_back(to_int(tok[1]) ? 1 : 0);
                m.points.push_back(parse_features(tok, 2));
            } else if (key == "node" && tok.size() == 6) {
                m.nodes.push_back({check_feature(to_int(tok[1])), parse_double(tok[2]), to_int(tok[3]),
                                   to_int(tok[4]), parse_double(tok[5])});
            } else if (key == "stump" && tok.size() == 5) {
                m.stumps.push_back(
                    {check_feature(to_int(tok[1])), parse_double(tok[2]), to_int(tok[3]), parse_double(tok[4])});
            } else if (key == "points" || key == "nodes" || key == "stumps") {
                continue;
            } else {
                throw ModelFormatError("unexpected line: " + line);
            }
        } catch (const ConfigError& e) {
            throw ModelFormatError(e.what());
        }
    }
    if (!have_kind || !ended) throw ModelFormatError("truncated model file");
    const int n_nodes = static_cast<int>(m.nodes.size());
    for (const auto& n : m.nodes) {
        if (n.feature >= 0 && (n.left < 0 || n.left >= n_nodes || n.right < 0 || n.right >= n_nodes))
            throw ModelFormatError("tree child index out of range");
    }
    if ((m.kind == ModelKind::Logistic || m.kind == ModelKind::LinearSVM) && m.weights.size() != kF)
        throw ModelFormatError("missing weights");
    return m;
}

void save_model_file(const Model& model, const fs::path& path) { write_file_atomic(path, save_model(model)); }

Model load_model_file(const fs::path& path) { return load_model(read_file(path)); }

}  // namespace tenq::classifiers
