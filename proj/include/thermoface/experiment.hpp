#pragma once

// The experiment grid: methods x bit-planes x block sizes x extractors, each
// point trained on the train split and scored on the test split.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "thermoface/dataset.hpp"
#include "thermoface/evaluation.hpp"
#include "thermoface/features.hpp"
#include "thermoface/image_io.hpp"
#include "thermoface/minutiae.hpp"
#include "thermoface/mlp.hpp"
#include "thermoface/perfusion.hpp"
#include "thermoface/segmentation.hpp"

namespace thermoface {

struct ExperimentConfig {
    std::vector<PerfusionTag> methods = {PerfusionTag::bitplane};
    std::vector<int> bit_planes = {4};
    std::vector<int> block_sizes = {8, 16, 32};
    std::vector<Extractor> extractors = {Extractor::neighbor_count, Extractor::crossing_number};
    MagnitudeRule magnitude_rule = MagnitudeRule::euclidean;
    CountPolicy count_policy;
    SpuriousFilter filter;
    // Gradients are summed over the whole train split, so the step is
    // smaller than the single-model default.
    TrainConfig train = {.learning_rate = 0.02};
    double split_ratio = 0.8;
    std::uint64_t seed = 1; // split seed
};

inline Extractor parse_extractor(std::string_view name)
{
    if (name == "neighbor_count")
        return Extractor::neighbor_count;
    if (name == "crossing_number")
        return Extractor::crossing_number;
    throw Error(ErrorCode::InvalidConfig, "unknown extractor '" + std::string(name) + "'");
}

inline MagnitudeRule parse_magnitude_rule(std::string_view name)
{
    if (name == "euclidean")
        return MagnitudeRule::euclidean;
    if (name == "l1")
        return MagnitudeRule::l1;
    throw Error(ErrorCode::InvalidConfig, "unknown magnitude rule '" + std::string(name) + "'");
}

inline void validate(const ExperimentConfig& cfg)
{
    if (cfg.methods.empty() || cfg.bit_planes.empty() || cfg.block_sizes.empty() || cfg.extractors.empty())
        throw Error(ErrorCode::InvalidConfig, "every grid needs at least one value");
    for (int p : cfg.bit_planes)
        if (p < 0 || p > 7)
            throw Error(ErrorCode::InvalidConfig, "bit plane " + std::to_string(p) + " outside 0..7");
    for (int b : cfg.block_sizes)
        if (!is_supported_block_size(b))
            throw Error(ErrorCode::InvalidConfig, "block size " + std::to_string(b) + " not in {8, 16, 32}");
    if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0))
        throw Error(ErrorCode::InvalidConfig, "split ratio must lie in (0, 1)");
    if (cfg.filter.border_margin < 0 || !(cfg.filter.min_distance >= 0.0))
        throw Error(ErrorCode::InvalidConfig, "filter parameters must be non-negative");
    validate(cfg.train);
}

namespace detail {

inline std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos)
            out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& key, const std::string& text, Parse parse)
{
    std::vector<T> out;
    for (const auto& item : split_list(text)) {
        try {
            out.push_back(parse(item));
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidConfig, key + ": cannot parse '" + item + "'");
        }
    }
    return out;
}

inline bool parse_bool(const std::string& s)
{
    if (s == "true" || s == "1" || s == "yes")
        return true;
    if (s == "false" || s == "0" || s == "no")
        return false;
    throw Error(ErrorCode::InvalidConfig, "not a boolean: '" + s + "'");
}

} // namespace detail

/// Reads `key = value` lines grouped under [grid], [features], [train] and
/// [split]. Lists are comma separated; unknown keys are rejected.
inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig cfg = {})
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorCode::InvalidConfig, e.message() + " at line " + std::to_string(e.line()));
    }
    auto as_int = [](const std::string& s) { return std::stoi(s); };
    auto as_u64 = [](const std::string& s) { return static_cast<std::uint64_t>(std::stoull(s)); };
    auto as_double = [](const std::string& s) { return std::stod(s); };
    auto method = [](const std::string& s) { return parse_perfusion(s); };
    auto extractor = [](const std::string& s) { return parse_extractor(s); };

    using Setter = std::function<void(const std::string&)>;
    auto scalar = [](auto parse, auto& field) {
        return Setter([parse, &field](const std::string& v) { field = parse(v); });
    };
    const std::map<std::string, Setter> setters = {
        {"grid.methods", [&](const std::string& v) { cfg.methods = detail::parse_list<PerfusionTag>("methods", v, method); }},
        {"grid.bit_planes", [&](const std::string& v) { cfg.bit_planes = detail::parse_list<int>("bit_planes", v, as_int); }},
        {"grid.block_sizes", [&](const std::string& v) { cfg.block_sizes = detail::parse_list<int>("block_sizes", v, as_int); }},
        {"grid.extractors", [&](const std::string& v) { cfg.extractors = detail::parse_list<Extractor>("extractors", v, extractor); }},
        {"grid.magnitude_rule", [&](const std::string& v) { cfg.magnitude_rule = parse_magnitude_rule(v); }},
        {"features.include_normal", [&](const std::string& v) { cfg.count_policy.include_normal = detail::parse_bool(v); }},
        {"features.border_margin", scalar(as_int, cfg.filter.border_margin)},
        {"features.min_distance", scalar(as_double, cfg.filter.min_distance)},
        {"train.learning_rate", scalar(as_double, cfg.train.learning_rate)},
        {"train.momentum", scalar(as_double, cfg.train.momentum)},
        {"train.max_epochs", scalar(as_int, cfg.train.max_epochs)},
        {"train.target_loss", scalar(as_double, cfg.train.target_loss)},
        {"train.seed", scalar(as_u64, cfg.train.seed)},
        {"split.ratio", scalar(as_double, cfg.split_ratio)},
        {"split.seed", scalar(as_u64, cfg.seed)},
    };

    for (const auto& [section, body] : tree) {
        if (body.empty())
            throw Error(ErrorCode::InvalidConfig, "key '" + section + "' must sit inside a section");
        for (const auto& [key, value] : body) {
            const auto full = section + "." + key;
            const auto it = setters.find(full);
            if (it == setters.end())
                throw Error(ErrorCode::InvalidConfig, "unknown key '" + full + "'");
            try {
                it->second(value.data());
            } catch (const Error&) {
                throw;
            } catch (const std::exception&) {
                throw Error(ErrorCode::InvalidConfig, full + ": cannot parse '" + value.data() + "'");
            }
        }
    }
    validate(cfg);
    return cfg;
}

inline ExperimentConfig load_config(const fs::path& path, ExperimentConfig cfg = {})
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    return parse_config(in, std::move(cfg));
}

/// Config text that parse_config reads back to the same values.
inline std::string format_config(const ExperimentConfig& cfg)
{
    auto join = [](const auto& items, auto name) {
        std::string s;
        for (const auto& v : items)
            s += (s.empty() ? "" : ", ") + name(v);
        return s;
    };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::string s;
    s += "[grid]\n";
    s += "methods = " + join(cfg.methods, [](auto t) { return std::string(perfusion_name(t)); }) + "\n";
    s += "bit_planes = " + join(cfg.bit_planes, [](int p) { return std::to_string(p); }) + "\n";
    s += "block_sizes = " + join(cfg.block_sizes, [](int b) { return std::to_string(b); }) + "\n";
    s += "extractors = " + join(cfg.extractors, [](auto e) { return std::string(extractor_name(e)); }) + "\n";
    s += std::string("magnitude_rule = ") + (cfg.magnitude_rule == MagnitudeRule::l1 ? "l1" : "euclidean") + "\n";
    s += "\n[features]\n";
    s += std::string("include_normal = ") + (cfg.count_policy.include_normal ? "true" : "false") + "\n";
    s += "border_margin = " + std::to_string(cfg.filter.border_margin) + "\n";
    s += "min_distance = " + num(cfg.filter.min_distance) + "\n";
    s += "\n[train]\n";
    s += "learning_rate = " + num(cfg.train.learning_rate) + "\n";
    s += "momentum = " + num(cfg.train.momentum) + "\n";
    s += "max_epochs = " + std::to_string(cfg.train.max_epochs) + "\n";
    s += "target_loss = " + num(cfg.train.target_loss) + "\n";
    s += "seed = " + std::to_string(cfg.train.seed) + "\n";
    s += "\n[split]\n";
    s += "ratio = " + num(cfg.split_ratio) + "\n";
    s += "seed = " + std::to_string(cfg.seed) + "\n";
    return s;
}

// ---------------------------------------------------------------------------
// Pipeline stages shared by the experiment driver and the CLI.

/// Load, convert to gray and crop the face.
inline GrayImage preprocess(const fs::path& path)
{
    return segment_face(load_gray(path));
}

/// Perfusion network resampled to the standard 320x224 frame.
inline SkeletonImage perfusion_skeleton(const GrayImage& face, const PerfusionMethod& method)
{
    return normalize_size(extract_perfusion(face, method));
}

inline MinutiaeSet find_minutiae(const SkeletonImage& skeleton, Extractor extractor, const SpuriousFilter& filter)
{
    return filter_spurious(extract_minutiae(skeleton, extractor), filter);
}

/// Labels become class indices by their position in `persons`.
inline std::vector<Example> to_examples(const std::vector<FeatureVector>& rows, const std::vector<std::string>& persons)
{
    std::vector<Example> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        if (!r.label)
            throw Error(ErrorCode::InvalidClass, "feature row without a label");
        const auto it = std::find(persons.begin(), persons.end(), *r.label);
        if (it == persons.end())
            throw Error(ErrorCode::InvalidClass, "unknown person '" + *r.label + "'");
        out.push_back({std::vector<double>(r.counts.begin(), r.counts.end()),
                       static_cast<std::size_t>(it - persons.begin())});
    }
    return out;
}

struct RunOptions {
    std::optional<fs::path> debug_dump; // per-sample intermediates go here
    std::function<void(const EvalRow&, const MlpModel&)> on_model;
    std::function<void(const std::string&)> log;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Throws unless the two splits are disjoint, cover the dataset and both
/// contain every person.
inline void check_split(const Dataset& ds)
{
    if (ds.split.size() != ds.samples.size())
        throw Error(ErrorCode::InvalidConfig, "split does not cover every sample");
    std::vector<int> seen(ds.persons.size(), 0);
    for (std::size_t i = 0; i < ds.samples.size(); ++i)
        seen[ds.samples[i].person] |= ds.split[i] == Split::train ? 1 : 2;
    for (std::size_t p = 0; p < seen.size(); ++p)
        if (seen[p] != 3)
            throw Error(ErrorCode::InvalidConfig, "person " + ds.persons[p] + " is missing from a split");
}

inline std::string method_label(const PerfusionMethod& m)
{
    std::string s(perfusion_name(m.tag));
    if (m.plane())
        s += std::to_string(*m.plane());
    return s;
}

} // namespace detail

/// Runs every grid point and returns one row per point. A grid point that
/// throws becomes an error row.
inline EvalReport run_experiment(const ExperimentConfig& cfg, const Dataset& data, const RunOptions& opt = {})
{
    using detail::Clock;
    validate(cfg);
    if (data.samples.empty())
        throw Error(ErrorCode::EmptyDataset, "dataset has no samples");
    if (data.persons.size() < 2)
        throw Error(ErrorCode::NeedTwoClasses, "dataset has a single person");
    Dataset ds = data;
    assign_split(ds, cfg.split_ratio, cfg.seed);
    detail::check_split(ds);
    const auto test_idx = ds.indices(Split::test);
    auto log = [&](const std::string& msg) {
        if (opt.log)
            opt.log(msg);
    };

    const std::size_t n = ds.samples.size();
    std::vector<GrayImage> faces(n);
    std::vector<double> face_time(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto t0 = Clock::now();
        faces[i] = preprocess(ds.samples[i].path);
        face_time[i] = detail::seconds_since(t0);
    }
    log("preprocessed " + std::to_string(n) + " images");

    std::vector<PerfusionMethod> methods;
    for (auto tag : cfg.methods) {
        if (tag == PerfusionTag::bitplane) {
            for (int p : cfg.bit_planes)
                methods.push_back(PerfusionMethod::bitplane(p));
        } else {
            PerfusionMethod m{tag, 4, cfg.magnitude_rule};
            methods.push_back(m);
        }
    }

    EvalReport report;
    auto base_row = [](const PerfusionMethod& m, int block, Extractor ex) {
        EvalRow r;
        r.method = std::string(perfusion_name(m.tag));
        r.bit_plane = m.plane();
        r.block_size = block;
        r.extractor = std::string(extractor_name(ex));
        return r;
    };
    auto fail_rows = [&](const PerfusionMethod& m, const std::vector<Extractor>& exs, const std::string& what) {
        for (auto ex : exs)
            for (int b : cfg.block_sizes) {
                auto r = base_row(m, b, ex);
                r.error = what;
                report.rows.push_back(std::move(r));
            }
    };

    for (const auto& method : methods) {
        std::vector<SkeletonImage> skeletons(n);
        std::vector<double> skel_time(n);
        try {
            for (std::size_t i = 0; i < n; ++i) {
                const auto t0 = Clock::now();
                skeletons[i] = perfusion_skeleton(faces[i], method);
                skel_time[i] = detail::seconds_since(t0);
            }
        } catch (const std::exception& e) {
            fail_rows(method, cfg.extractors, e.what());
            continue;
        }
        if (opt.debug_dump) {
            const auto dir = *opt.debug_dump / detail::method_label(method);
            for (std::size_t i = 0; i < n; ++i) {
                const auto stem = ds.persons[ds.samples[i].person] + "_" + ds.samples[i].path.stem().string();
                fs::create_directories(dir);
                save_pgm(dir / (stem + "_face.pgm"), faces[i]);
                save_pgm(dir / (stem + "_skeleton.pgm"), skeletons[i]);
            }
        }

        for (auto ex : cfg.extractors) {
            std::vector<MinutiaeSet> points(n);
            std::vector<double> point_time(n);
            try {
                for (std::size_t i = 0; i < n; ++i) {
                    const auto t0 = Clock::now();
                    points[i] = find_minutiae(skeletons[i], ex, cfg.filter);
                    point_time[i] = detail::seconds_since(t0);
                }
            } catch (const std::exception& e) {
                fail_rows(method, {ex}, e.what());
                continue;
            }
            if (opt.debug_dump) {
                const auto dir = *opt.debug_dump / detail::method_label(method);
                for (std::size_t i = 0; i < n; ++i) {
                    const auto stem = ds.persons[ds.samples[i].person] + "_" + ds.samples[i].path.stem().string();
                    std::ofstream out(dir / (stem + "_" + std::string(extractor_name(ex)) + ".min"));
                    write_minutiae(out, points[i]);
                }
            }

            for (int block : cfg.block_sizes) {
                auto row = base_row(method, block, ex);
                try {
                    std::vector<FeatureVector> train_rows, test_rows;
                    std::vector<double> feature_time(n);
                    for (std::size_t i = 0; i < n; ++i) {
                        const auto t0 = Clock::now();
                        auto fv = block_features(points[i], block, cfg.count_policy);
                        feature_time[i] = detail::seconds_since(t0);
                        fv.label = ds.persons[ds.samples[i].person];
                        (ds.split[i] == Split::train ? train_rows : test_rows).push_back(std::move(fv));
                    }
                    const auto train = to_examples(train_rows, ds.persons);
                    const auto test = to_examples(test_rows, ds.persons);
                    const auto model =
                        train_batch(init_model(train.front().input.size(), ds.persons.size(), cfg.train.seed), train,
                                    cfg.train)
                            .model;

                    std::vector<std::size_t> actual, predicted;
                    double spent = 0.0;
                    for (std::size_t k = 0; k < test.size(); ++k) {
                        const auto i = test_idx[k];
                        const auto t0 = Clock::now();
                        predicted.push_back(predict(model, test[k].input));
                        spent += detail::seconds_since(t0) + face_time[i] + skel_time[i] + point_time[i] +
                                 feature_time[i];
                        actual.push_back(test[k].target);
                    }
                    row.summary = summarize(actual, predicted, ds.persons.size());
                    row.wall_time = spent / static_cast<double>(test.size());
                    if (opt.on_model)
                        opt.on_model(row, model);
                    log(detail::method_label(method) + " " + row.extractor + " " + std::to_string(block) +
                        "x" + std::to_string(block) + ": " + detail::fixed(row.summary.performance_rate, 2) + "%");
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

} // namespace thermoface
