#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <tuple>

#include "thermoface/evaluation.hpp"

#ifndef THERMOFACE_GOLDEN_DIR
#error "THERMOFACE_GOLDEN_DIR must point at tests/golden"
#endif

namespace thermoface {
namespace {

TEST(Metrics, BestReportedRow)
{
    const auto m = metrics({20, 0, 1, 21});
    EXPECT_NEAR(100.0 * *m.far, 0.00, 0.01);
    EXPECT_NEAR(100.0 * *m.frr, 4.76, 0.01);
    EXPECT_NEAR(100.0 * *m.accuracy, 97.62, 0.01);
}

// Enumerate every confusion table with at most 60 trials and keep those
// that print as FAR 0.00 %, FRR 4.76 %, accuracy 97.62 % (to 0.01 points).
TEST(Metrics, EnumerationOracleFindsUniqueCounts)
{
    std::vector<std::tuple<int, int, int, int>> hits;
    for (int total = 1; total <= 60; ++total)
        for (int tp = 0; tp <= total; ++tp)
            for (int fp = 0; tp + fp <= total; ++fp)
                for (int fn = 0; tp + fp + fn <= total; ++fn) {
                    const int tn = total - tp - fp - fn;
                    if (tp + fn == 0 || fp + tn == 0)
                        continue;
                    const double far = 100.0 * fp / (fp + tn);
                    const double frr = 100.0 * fn / (tp + fn);
                    const double acc = 100.0 * (tp + tn) / total;
                    if (std::abs(far - 0.0) <= 0.01 && std::abs(frr - 4.76) <= 0.01 && std::abs(acc - 97.62) <= 0.01)
                        hits.emplace_back(tp, fp, fn, tn);
                }
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits.front(), std::make_tuple(20, 0, 1, 21));
}

TEST(Metrics, PerfectAndBalancedCases)
{
    const auto perfect = metrics({9, 0, 0, 33});
    EXPECT_EQ(*perfect.accuracy, 1.0);
    EXPECT_EQ(*perfect.far, 0.0);
    EXPECT_EQ(*perfect.frr, 0.0);

    const auto half = metrics({1, 1, 1, 1});
    EXPECT_EQ(*half.sensitivity, 0.5);
    EXPECT_EQ(*half.specificity, 0.5);
    EXPECT_EQ(*half.far, 0.5);
    EXPECT_EQ(*half.frr, 0.5);
    EXPECT_EQ(*half.accuracy, 0.5);
}

TEST(Metrics, UndefinedRatiosStayEmpty)
{
    const auto m = metrics({0, 2, 0, 3}); // no positives at all
    EXPECT_FALSE(m.sensitivity.has_value());
    EXPECT_FALSE(m.frr.has_value());
    EXPECT_TRUE(m.far.has_value());
    try {
        metrics({});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoTrials);
    }
}

TEST(Metrics, Identities)
{
    std::mt19937 rng(6);
    std::uniform_int_distribution<std::size_t> u(0, 40);
    for (int trial = 0; trial < 500; ++trial) {
        const ConfusionCounts c{u(rng), u(rng), u(rng), u(rng)};
        if (c.total() == 0)
            continue;
        const auto m = metrics(c);
        if (m.far) {
            EXPECT_EQ(*m.far, 1.0 - *m.specificity);
            EXPECT_NEAR(*m.far, static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn), 1e-15);
        }
        if (m.frr) {
            EXPECT_EQ(*m.frr, 1.0 - *m.sensitivity);
            EXPECT_NEAR(*m.frr, static_cast<double>(c.fn) / static_cast<double>(c.tp + c.fn), 1e-15);
        }
        EXPECT_EQ(*metrics({c.tn, c.fn, c.fp, c.tp}).accuracy, *m.accuracy);
        const auto k = 1 + u(rng);
        const auto scaled = metrics({c.tp * k, c.fp * k, c.fn * k, c.tn * k});
        EXPECT_NEAR(*scaled.accuracy, *m.accuracy, 1e-15);
        if (m.far)
            EXPECT_NEAR(*scaled.far, *m.far, 1e-15);
        if (m.frr)
            EXPECT_NEAR(*scaled.frr, *m.frr, 1e-15);
    }
}

TEST(OneVsRest, HandTally)
{
    const std::vector<std::size_t> actual = {0, 0, 1, 1, 2, 2};
    const std::vector<std::size_t> predicted = {0, 1, 1, 0, 0, 2};
    // class 0: positives at 0,1 -> predicted 0,1: tp 1, fn 1; negatives 2..5 predicted 0 at 3,4: fp 2, tn 2
    EXPECT_EQ(one_vs_rest(actual, predicted, 0), (ConfusionCounts{1, 2, 1, 2}));
    EXPECT_EQ(one_vs_rest(actual, predicted, 1), (ConfusionCounts{1, 1, 1, 3}));
    EXPECT_EQ(one_vs_rest(actual, predicted, 2), (ConfusionCounts{1, 0, 1, 4}));
}

// Output biases alone decide the class when every weight is zero.
MlpModel constant_classifier(std::size_t d, std::size_t c, std::size_t always)
{
    auto m = init_model(d, c, 0);
    for (auto& layer : m.layers)
        std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    for (std::size_t k = 0; k < c; ++k)
        m.layers.back().bias[k] = k == always ? 1.0 : -1.0;
    return m;
}

TEST(EvaluateClassifier, AlwaysPositive)
{
    const auto m = constant_classifier(3, 3, 1);
    const std::vector<Example> test = {{{0, 0, 1}, 0}, {{1, 0, 0}, 1}, {{0, 1, 0}, 2}, {{1, 1, 1}, 1}};
    const auto c = evaluate_classifier(m, test, 1);
    EXPECT_EQ(c.fn, 0u);
    EXPECT_EQ(c.tn, 0u);
    EXPECT_EQ(c.tp, 2u);
    EXPECT_EQ(c.fp, 2u);
}

TEST(EvaluateClassifier, PerfectLabelsHaveNoErrors)
{
    const auto m = init_model(3, 3, 21);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-3, 3);
    std::vector<Example> test;
    for (int i = 0; i < 12; ++i) {
        std::vector<double> x = {u(rng), u(rng), u(rng)};
        test.push_back({x, predict(m, x)});
    }
    for (std::size_t k = 0; k < 3; ++k) {
        const auto c = evaluate_classifier(m, test, k);
        EXPECT_EQ(c.fp, 0u);
        EXPECT_EQ(c.fn, 0u);
    }
}

TEST(EvaluateClassifier, Errors)
{
    const auto m = constant_classifier(2, 2, 0);
    try {
        evaluate_classifier(m, std::vector<Example>{{{0, 0}, 0}}, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidClass);
    }
    EXPECT_THROW(evaluate_classifier(m, std::vector<Example>{}, 0), Error);
}

TEST(Summarize, MacroAverages)
{
    const std::vector<std::size_t> actual = {0, 0, 1, 1, 2, 2};
    const std::vector<std::size_t> predicted = {0, 1, 1, 0, 0, 2};
    const auto s = summarize(actual, predicted, 3);
    EXPECT_NEAR(s.performance_rate, 50.0, 1e-12);
    // FAR per class: 2/4, 1/4, 0/4; FRR: 1/2 each; accuracy: 3/6, 4/6, 5/6
    EXPECT_NEAR(*s.far, 100.0 * (0.5 + 0.25 + 0.0) / 3, 1e-12);
    EXPECT_NEAR(*s.frr, 50.0, 1e-12);
    EXPECT_NEAR(*s.accuracy, 100.0 * (3.0 + 4.0 + 5.0) / 18.0, 1e-12);
}

EvalRow row(std::string method, std::optional<int> plane, int block, std::string extractor, double perf)
{
    EvalRow r;
    r.method = std::move(method);
    r.bit_plane = plane;
    r.block_size = block;
    r.extractor = std::move(extractor);
    r.summary = {perf, 4.7619047619, 9.5238095238, 97.619047619};
    r.wall_time = 0.0123456789;
    return r;
}

TEST(RenderReport, SingleRow)
{
    EvalReport rep{{row("bitplane", 4, 16, "neighbor_count", 95.238095)}};
    const auto text = render_report(rep);
    std::istringstream in(text);
    std::string header, rule, data, blank;
    std::getline(in, header);
    std::getline(in, rule);
    std::getline(in, data);
    std::getline(in, blank);
    EXPECT_NE(header.find("Perf (%)"), std::string::npos);
    EXPECT_NE(data.find("95.24"), std::string::npos);
    EXPECT_NE(data.find("0.012346"), std::string::npos);
    EXPECT_TRUE(blank.empty());
}

TEST(RenderReport, SortsRows)
{
    EvalReport rep{{row("sobel", std::nullopt, 8, "crossing_number", 80),
                    row("bitplane", 4, 32, "neighbor_count", 90),
                    row("bitplane", 4, 8, "neighbor_count", 85)}};
    const auto csv = render_report_csv(rep);
    const auto a = csv.find("bitplane,4,8,");
    const auto b = csv.find("bitplane,4,32,");
    const auto c = csv.find("sobel,,8,");
    ASSERT_NE(a, std::string::npos);
    EXPECT_LT(a, b);
    EXPECT_LT(b, c);
}

TEST(RenderReport, UndefinedAndErrorRows)
{
    auto undefined = row("erosion", std::nullopt, 16, "neighbor_count", 50);
    undefined.summary.far.reset();
    auto failed = row("sobel", std::nullopt, 16, "crossing_number", 0);
    failed.error = "ImageTooSmall";
    const auto text = render_report(EvalReport{{undefined, failed}});
    EXPECT_NE(text.find("n/a"), std::string::npos);
    EXPECT_NE(text.find("error: ImageTooSmall"), std::string::npos);
    EXPECT_NE(text.find("macro-averaged"), std::string::npos);
}

TEST(RenderReport, CsvErrorFieldStaysOneColumn)
{
    auto failed = row("sobel", std::nullopt, 16, "crossing_number", 0);
    failed.error = "NoComponents: empty, again";
    const auto csv = render_report_csv(EvalReport{{failed}});
    const auto data = csv.substr(csv.find('\n') + 1);
    EXPECT_EQ(std::count(data.begin(), data.end(), ','), 9);
    EXPECT_NE(data.find("NoComponents: empty; again"), std::string::npos);
}

TEST(RenderReport, GoldenThreeRows)
{
    EvalReport rep{{row("sobel", std::nullopt, 8, "crossing_number", 85.714285714),
                    row("bitplane", 4, 16, "neighbor_count", 95.238095238),
                    row("erosion", std::nullopt, 32, "neighbor_count", 78.571428571)}};
    const auto text = render_report(rep);
    std::ifstream golden(std::string(THERMOFACE_GOLDEN_DIR) + "/report_three_rows.txt", std::ios::binary);
    ASSERT_TRUE(golden) << "missing golden file; current output:\n" << text;
    std::stringstream want;
    want << golden.rdbuf();
    EXPECT_EQ(text, want.str());
}

} // namespace
} // namespace thermoface
