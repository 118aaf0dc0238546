#include "tenq/metrics.hpp"

#include <cmath>

#include "tenq/error.hpp"

namespace tenq::eval {

Metrics confusion_metrics(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn) {
    Metrics m{tp, fp, fn, tn, {}, {}, {}, {}};
    m.recall = {tp, tp + fn};
    m.precision = {tp, tp + fp};
    m.accuracy = {tp + tn, tp + fp + fn + tn};
    // 2PR/(P+R) reduces to 2tp/(2tp+fp+fn); tp = 0 gives 0 either way.
    m.f1 = {2 * tp, tp == 0 ? 0 : 2 * tp + fp + fn};
    return m;
}

double round_to(double x, int places) {
    const double scale = std::pow(10.0, places);
    return std::round(x * scale) / scale;
}

nlohmann::json metrics_to_json(const Metrics& m) {
    return {{"tp", m.tp},
            {"fp", m.fp},
            {"fn", m.fn},
            {"tn", m.tn},
            {"recall", round_to(m.recall.value(), 4)},
            {"precision", round_to(m.precision.value(), 4)},
            {"accuracy", round_to(m.accuracy.value(), 4)},
            {"f1", round_to(m.f1.value(), 4)}};
}

double coverage_compose(double rule_rate, double rule_precision, double fallback_rate, double fallback_precision) {
    for (double v : {rule_rate, rule_precision, fallback_rate, fallback_precision}) {
        if (!(v >= 0.0 && v <= 1.0)) throw Error("coverage_compose arguments must lie in [0, 1]");
    }
    return rule_rate * rule_precision + fallback_rate * fallback_precision;
}

}  // namespace tenq::eval
