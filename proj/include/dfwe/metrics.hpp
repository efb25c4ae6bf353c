#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfwe/error.hpp"

namespace dfwe {

/// Fraction of exact matches.
inline double metric_accuracy(const std::vector<std::int32_t>& predictions,
                              const std::vector<std::int32_t>& labels) {
    if (predictions.size() != labels.size()) {
        throw ValidationError("accuracy: " + std::to_string(predictions.size()) + " predictions vs " +
                              std::to_string(labels.size()) + " labels");
    }
    if (predictions.empty()) throw ValidationError("accuracy: empty input");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

/// Unweighted mean of per-class F1 = 2TP / (2TP + FP + FN). A class absent
/// from both labels and predictions is excluded from the average; a class
/// that appears (in either) but has no true positives scores 0.
inline double metric_macro_f1(const std::vector<std::int32_t>& predictions,
                              const std::vector<std::int32_t>& labels, std::int32_t num_classes) {
    if (predictions.size() != labels.size()) {
        throw ValidationError("macro-F1: " + std::to_string(predictions.size()) + " predictions vs " +
                              std::to_string(labels.size()) + " labels");
    }
    if (predictions.empty()) throw ValidationError("macro-F1: empty input");
    if (num_classes < 1) throw ValidationError("macro-F1: num_classes must be positive");
    std::vector<std::int64_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const std::int32_t p = predictions[i], y = labels[i];
        if (p < 0 || p >= num_classes) throw ValidationError("macro-F1: prediction out of class range");
        if (y < 0 || y >= num_classes) throw ValidationError("macro-F1: label out of class range");
        if (p == y) {
            ++tp[p];
        } else {
            ++fp[p];
            ++fn[y];
        }
    }
    double sum = 0.0;
    std::int32_t counted = 0;
    for (std::int32_t c = 0; c < num_classes; ++c) {
        const std::int64_t denom = 2 * tp[c] + fp[c] + fn[c];
        if (denom == 0) continue;  // class absent from labels and predictions
        sum += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
        ++counted;
    }
    if (counted == 0) throw ValidationError("macro-F1: no class present");
    return sum / static_cast<double>(counted);
}

/// A scalar task metric: accuracy, macro-F1, or the mean of several of them.
/// Scores are maximized everywhere in this library; negation for the
/// minimizing optimizer happens in the search layer.
class MetricKind {
public:
    enum class Kind { accuracy, macro_f1, mean };

    static MetricKind accuracy() { return MetricKind(Kind::accuracy, {}); }
    static MetricKind macro_f1() { return MetricKind(Kind::macro_f1, {}); }

    static MetricKind mean_of(std::vector<MetricKind> children) {
        if (children.empty()) throw ValidationError("mean_of needs at least one metric");
        for (const auto& c : children) {
            if (c.kind_ == Kind::mean) throw ValidationError("mean_of cannot nest another mean");
        }
        return MetricKind(Kind::mean, std::move(children));
    }

    Kind kind() const { return kind_; }
    const std::vector<MetricKind>& children() const { return children_; }

    double score(const std::vector<std::int32_t>& predictions, const std::vector<std::int32_t>& labels,
                 std::int32_t num_classes) const {
        switch (kind_) {
            case Kind::accuracy: return metric_accuracy(predictions, labels);
            case Kind::macro_f1: return metric_macro_f1(predictions, labels, num_classes);
            case Kind::mean: {
                double sum = 0.0;
                for (const auto& c : children_) sum += c.score(predictions, labels, num_classes);
                return sum / static_cast<double>(children_.size());
            }
        }
        throw ValidationError("unknown metric kind");
    }

    std::string to_string() const {
        switch (kind_) {
            case Kind::accuracy: return "accuracy";
            case Kind::macro_f1: return "macro_f1";
            case Kind::mean: {
                std::string s = "mean(";
                for (std::size_t i = 0; i < children_.size(); ++i) {
                    if (i) s += ",";
                    s += children_[i].to_string();
                }
                return s + ")";
            }
        }
        return "?";
    }

    /// Parses "accuracy", "macro_f1" or "mean(a,b,...)".
    static MetricKind parse(const std::string& text) {
        if (text == "accuracy") return accuracy();
        if (text == "macro_f1") return macro_f1();
        if (text.rfind("mean(", 0) == 0 && text.back() == ')') {
            const std::string inner = text.substr(5, text.size() - 6);
            std::vector<MetricKind> children;
            std::size_t start = 0;
            while (start <= inner.size()) {
                const std::size_t comma = inner.find(',', start);
                const std::string part =
                    inner.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
                if (part.empty()) throw ConfigError("empty metric name in \"" + text + "\"");
                if (part != "accuracy" && part != "macro_f1") {
                    throw ConfigError("unknown metric \"" + part + "\" inside mean(...)");
                }
                children.push_back(part == "accuracy" ? accuracy() : macro_f1());
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
            return mean_of(std::move(children));
        }
        throw ConfigError("unknown metric \"" + text + "\" (expected accuracy, macro_f1 or mean(...))");
    }

private:
    MetricKind(Kind kind, std::vector<MetricKind> children) : kind_(kind), children_(std::move(children)) {}

    Kind kind_;
    std::vector<MetricKind> children_;
};

}  // namespace dfwe
