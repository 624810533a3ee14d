#pragma once

#include <algorithm>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "thermoface/error.hpp"
#include "thermoface/mlp.hpp"

namespace thermoface {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const noexcept { return tp + fp + fn + tn; }

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Ratios in [0, 1]; a ratio whose denominator is zero is left empty.
struct Metrics {
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> far;
    std::optional<double> frr;
    std::optional<double> accuracy;
};

inline Metrics metrics(const ConfusionCounts& c)
{
    if (c.total() == 0)
        throw Error(ErrorCode::NoTrials);
    Metrics m;
    if (c.tp + c.fn > 0) {
        m.sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
        m.frr = 1.0 - *m.sensitivity;
    }
    if (c.fp + c.tn > 0) {
        m.specificity = static_cast<double>(c.tn) / static_cast<double>(c.fp + c.tn);
        m.far = 1.0 - *m.specificity;
    }
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    return m;
}

/// One-vs-rest tally of `predicted` against `actual` for one class.
inline ConfusionCounts one_vs_rest(std::span<const std::size_t> actual, std::span<const std::size_t> predicted,
                                   std::size_t positive_class)
{
    if (actual.size() != predicted.size())
        throw Error(ErrorCode::ShapeMismatch, "label and prediction counts differ");
    ConfusionCounts c;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const bool is_pos = actual[i] == positive_class;
        const bool said_pos = predicted[i] == positive_class;
        if (is_pos && said_pos)
            ++c.tp;
        else if (is_pos)
            ++c.fn;
        else if (said_pos)
            ++c.fp;
        else
            ++c.tn;
    }
    return c;
}

inline std::vector<std::size_t> predict_all(const MlpModel& model, std::span<const Example> samples)
{
    std::vector<std::size_t> out;
    out.reserve(samples.size());
    for (const auto& s : samples)
        out.push_back(predict(model, s.input));
    return out;
}

inline ConfusionCounts evaluate_classifier(const MlpModel& model, std::span<const Example> test,
                                           std::size_t positive_class)
{
    if (test.empty())
        throw Error(ErrorCode::EmptyDataset, "no test samples");
    if (positive_class >= model.num_classes())
        throw Error(ErrorCode::InvalidClass, "class " + std::to_string(positive_class) + " out of range");
    std::vector<std::size_t> actual;
    for (const auto& s : test)
        actual.push_back(s.target);
    const auto predicted = predict_all(model, test);
    return one_vs_rest(actual, predicted, positive_class);
}

/// Aggregate figures for one experiment configuration, all in percent.
struct Summary {
    double performance_rate = 0.0; // multi-class top-1 recognition rate
    std::optional<double> far;      // one-vs-rest, macro-averaged over classes
    std::optional<double> frr;
    std::optional<double> accuracy;
};

inline Summary summarize(std::span<const std::size_t> actual, std::span<const std::size_t> predicted,
                         std::size_t num_classes)
{
    if (actual.empty())
        throw Error(ErrorCode::NoTrials);
    if (actual.size() != predicted.size())
        throw Error(ErrorCode::ShapeMismatch, "label and prediction counts differ");
    Summary s;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < actual.size(); ++i)
        hits += actual[i] == predicted[i];
    s.performance_rate = 100.0 * static_cast<double>(hits) / static_cast<double>(actual.size());

    struct Mean {
        double sum = 0.0;
        int n = 0;
        void add(const std::optional<double>& v)
        {
            if (v) {
                sum += *v;
                ++n;
            }
        }
        std::optional<double> percent() const
        {
            return n ? std::optional<double>(100.0 * sum / n) : std::nullopt;
        }
    } far, frr, acc;
    for (std::size_t k = 0; k < num_classes; ++k) {
        const auto m = metrics(one_vs_rest(actual, predicted, k));
        far.add(m.far);
        frr.add(m.frr);
        acc.add(m.accuracy);
    }
    s.far = far.percent();
    s.frr = frr.percent();
    s.accuracy = acc.percent();
    return s;
}

struct EvalRow {
    std::string method;
    std::optional<int> bit_plane;
    int block_size = 0;
    std::string extractor;
    Summary summary;
    double wall_time = 0.0;          // seconds of inference per test sample
    std::optional<std::string> error; // set when the configuration failed
};

struct EvalReport {
    std::vector<EvalRow> rows;
};

namespace detail {

inline std::string fixed(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

inline std::string percent_or_na(const std::optional<double>& v)
{
    return v ? fixed(*v, 2) : "n/a";
}

inline std::vector<EvalRow> sorted_rows(const EvalReport& report)
{
    auto rows = report.rows;
    std::stable_sort(rows.begin(), rows.end(), [](const EvalRow& a, const EvalRow& b) {
        return std::tie(a.method, a.bit_plane, a.block_size) < std::tie(b.method, b.bit_plane, b.block_size);
    });
    return rows;
}

inline std::string pad(const std::string& s, std::size_t width, bool right_align)
{
    if (s.size() >= width)
        return s;
    const std::string fill(width - s.size(), ' ');
    return right_align ? fill + s : s + fill;
}

} // namespace detail

inline constexpr const char* report_footnote =
    "Performance rate: multi-class top-1 recognition rate over the test split.\n"
    "FAR, FRR, accuracy: one-vs-rest per class, macro-averaged over classes; n/a = undefined ratio.\n";

/// Fixed-column text table, rows ordered by (method, bit plane, block size).
inline std::string render_report(const EvalReport& report)
{
    const std::vector<std::string> header = {"Method", "Bit-plane", "Block", "Extractor", "Perf (%)",
                                             "FAR (%)", "FRR (%)", "Accuracy (%)", "Time (s)"};
    const std::vector<std::size_t> width = {10, 9, 7, 16, 9, 8, 8, 12, 10};
    auto line = [&](const std::vector<std::string>& cells) {
        std::string out;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                out += "  ";
            out += detail::pad(cells[i], width[i], i >= 4);
        }
        while (!out.empty() && out.back() == ' ')
            out.pop_back();
        return out + '\n';
    };

    std::string text = line(header);
    std::size_t rule = 0;
    for (auto w : width)
        rule += w + 2;
    text += std::string(rule - 2, '-') + '\n';
    for (const auto& r : detail::sorted_rows(report)) {
        const std::string plane = r.bit_plane ? std::to_string(*r.bit_plane) : "-";
        const std::string block = std::to_string(r.block_size) + "x" + std::to_string(r.block_size);
        if (r.error) {
            text += line({r.method, plane, block, r.extractor, "error: " + *r.error});
            continue;
        }
        text += line({r.method, plane, block, r.extractor, detail::fixed(r.summary.performance_rate, 2),
                      detail::percent_or_na(r.summary.far), detail::percent_or_na(r.summary.frr),
                      detail::percent_or_na(r.summary.accuracy), detail::fixed(r.wall_time, 6)});
    }
    text += '\n';
    text += report_footnote;
    return text;
}

/// CSV twin of render_report with the same row order.
inline std::string render_report_csv(const EvalReport& report)
{
    std::string csv = "method,bit_plane,block_size,extractor,performance_rate,far,frr,accuracy,wall_time,error\n";
    for (const auto& r : detail::sorted_rows(report)) {
        csv += r.method + ',' + (r.bit_plane ? std::to_string(*r.bit_plane) : "") + ',' +
               std::to_string(r.block_size) + ',' + r.extractor + ',';
        if (r.error) {
            std::string msg = *r.error;
            std::replace_if(msg.begin(), msg.end(), [](char c) { return c == ',' || c == '\n'; }, ';');
            csv += ",,,,," + msg + '\n';
            continue;
        }
        csv += detail::fixed(r.summary.performance_rate, 2) + ',' + detail::percent_or_na(r.summary.far) + ',' +
               detail::percent_or_na(r.summary.frr) + ',' + detail::percent_or_na(r.summary.accuracy) + ',' +
               detail::fixed(r.wall_time, 6) + ",\n";
    }
    return csv;
}

} // namespace thermoface
