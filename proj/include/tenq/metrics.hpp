#pragma once

#include <cstdint>

#include "json.hpp"

namespace tenq::eval {

// Exact num/den; a zero denominator reads as 0.
struct Ratio {
    std::uint64_t num = 0;
    std::uint64_t den = 0;

    double value() const { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }
};

struct Metrics {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    Ratio recall, precision, accuracy, f1;
};

Metrics confusion_metrics(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn);

double round_to(double x, int places);

// Values rounded to 4 places plus the raw counts.
nlohmann::json metrics_to_json(const Metrics& m);

double coverage_compose(double rule_rate, double rule_precision, double fallback_rate, double fallback_precision);

}  // namespace tenq::eval
