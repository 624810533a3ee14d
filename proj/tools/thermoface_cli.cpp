// thermoface: batch driver for the thermal face recognition pipeline.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "thermoface/experiment.hpp"
#include "thermoface/synth.hpp"

namespace fs = std::filesystem;
using namespace thermoface;

namespace {

struct Options {
    std::optional<fs::path> config;
    std::optional<std::uint64_t> seed;
    fs::path data;
    fs::path out;
    fs::path model;
    std::optional<std::string> method;
    std::optional<std::string> bit_plane;
    std::optional<std::string> block_size;
    std::optional<std::string> extractor;
    bool debug_dump = false;
    std::size_t persons = 7;
    std::size_t samples = 34;
    bool quiet = false;
};

template <typename T, typename Parse>
std::vector<T> list_flag(const std::string& text, Parse parse)
{
    std::vector<T> out;
    for (const auto& item : detail::split_list(text))
        out.push_back(parse(item));
    if (out.empty())
        throw Error(ErrorCode::InvalidConfig, "empty list '" + text + "'");
    return out;
}

int to_int(const std::string& s)
{
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used == s.size())
            return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::InvalidConfig, "not an integer: '" + s + "'");
}

/// Config file first, then command-line flags on top.
ExperimentConfig effective_config(const Options& o, ExperimentConfig base = {})
{
    ExperimentConfig cfg = o.config ? load_config(*o.config, std::move(base)) : std::move(base);
    if (o.seed) {
        cfg.seed = *o.seed;
        cfg.train.seed = *o.seed;
    }
    if (o.method)
        cfg.methods = list_flag<PerfusionTag>(*o.method, [](const std::string& s) { return parse_perfusion(s); });
    if (o.bit_plane)
        cfg.bit_planes = list_flag<int>(*o.bit_plane, to_int);
    if (o.block_size)
        cfg.block_sizes = list_flag<int>(*o.block_size, to_int);
    if (o.extractor)
        cfg.extractors = list_flag<Extractor>(*o.extractor, [](const std::string& s) { return parse_extractor(s); });
    validate(cfg);
    return cfg;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!(out << text) || !out.flush())
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> read_labels(const fs::path& path)
{
    std::istringstream in(read_text(path));
    std::vector<std::string> labels;
    for (std::string line; std::getline(in, line);)
        if (!line.empty())
            labels.push_back(line);
    if (labels.size() < 2)
        throw Error(ErrorCode::NeedTwoClasses, path.string() + " lists fewer than two persons");
    return labels;
}

void write_labels(const fs::path& path, const std::vector<std::string>& labels)
{
    std::string text;
    for (const auto& l : labels)
        text += l + '\n';
    write_text(path, text);
}

std::vector<FeatureVector> read_features(const fs::path& path)
{
    std::istringstream in(read_text(path));
    try {
        return read_features_csv(in);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

PerfusionMethod single_method(const ExperimentConfig& cfg)
{
    if (cfg.methods.size() != 1 || cfg.bit_planes.size() != 1 || cfg.extractors.size() != 1)
        throw Error(ErrorCode::InvalidConfig, "this stage needs exactly one method, bit plane and extractor");
    return PerfusionMethod{cfg.methods[0], cfg.bit_planes[0], cfg.magnitude_rule};
}

void log(const Options& o, const std::string& msg)
{
    if (!o.quiet)
        std::cerr << msg << '\n';
}

void run_synth(const Options& o)
{
    const auto ds = synth_generate(o.persons, o.samples, o.seed.value_or(1), o.out);
    log(o, "wrote " + std::to_string(ds.samples.size()) + " images to " + o.out.string());
}

// <out>/index.csv lists minutiae files with person and split; config.ini
// carries the stage settings forward.
void run_preprocess(const Options& o)
{
    ExperimentConfig base;
    base.extractors = {Extractor::neighbor_count};
    auto cfg = effective_config(o, base);
    cfg.block_sizes = {16};
    const auto method = single_method(cfg);
    const auto ex = cfg.extractors[0];
    const auto ds = ingest(o.data, cfg.split_ratio, cfg.seed);
    fs::create_directories(o.out);
    std::string index = "minutiae,person,split\n";
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& s = ds.samples[i];
        const auto& person = ds.persons[s.person];
        const auto face = preprocess(s.path);
        const auto skeleton = perfusion_skeleton(face, method);
        const auto points = find_minutiae(skeleton, ex, cfg.filter);
        const fs::path rel = fs::path(person) / (s.path.stem().string() + ".min");
        fs::create_directories(o.out / person);
        std::ostringstream text;
        write_minutiae(text, points);
        write_text(o.out / rel, text.str());
        if (o.debug_dump) {
            save_pgm(o.out / person / (s.path.stem().string() + "_face.pgm"), face);
            save_pgm(o.out / person / (s.path.stem().string() + "_skeleton.pgm"), skeleton);
        }
        index += rel.generic_string() + ',' + person + ',' + (ds.split[i] == Split::train ? "train" : "test") + '\n';
    }
    write_text(o.out / "index.csv", index);
    write_text(o.out / "config.ini", format_config(cfg));
    write_labels(o.out / "labels.txt", ds.persons);
    log(o, "preprocessed " + std::to_string(ds.samples.size()) + " images into " + o.out.string());
}

void run_features(const Options& o)
{
    auto cfg = effective_config(o, load_config(o.data / "config.ini"));
    if (cfg.block_sizes.size() != 1)
        throw Error(ErrorCode::InvalidConfig, "features needs exactly one block size");
    const int block = cfg.block_sizes[0];
    std::istringstream index(read_text(o.data / "index.csv"));
    std::string line;
    std::getline(index, line); // header
    std::vector<FeatureVector> train, test;
    while (std::getline(index, line)) {
        if (line.empty())
            continue;
        const auto fields = detail::split_list(line);
        if (fields.size() != 3 || (fields[2] != "train" && fields[2] != "test"))
            throw Error(ErrorCode::FormatError, "bad index line '" + line + "'");
        std::istringstream text(read_text(o.data / fields[0]));
        auto fv = block_features(read_minutiae(text), block, cfg.count_policy);
        fv.label = fields[1];
        (fields[2] == "train" ? train : test).push_back(std::move(fv));
    }
    fs::create_directories(o.out);
    for (const auto& [name, rows] : {std::pair{"train.csv", &train}, std::pair{"test.csv", &test}}) {
        std::ostringstream csv;
        write_features_csv(csv, *rows);
        write_text(o.out / name, csv.str());
    }
    write_text(o.out / "config.ini", format_config(cfg));
    write_labels(o.out / "labels.txt", read_labels(o.data / "labels.txt"));
    log(o, "wrote " + std::to_string(train.size()) + " train and " + std::to_string(test.size()) +
               " test vectors of length " + std::to_string(feature_length(normalized_width, normalized_height, block)));
}

void run_train(const Options& o)
{
    const auto cfg = effective_config(o, load_config(o.data / "config.ini"));
    const auto labels = read_labels(o.data / "labels.txt");
    const auto train = to_examples(read_features(o.data / "train.csv"), labels);
    if (train.empty())
        throw Error(ErrorCode::EmptyDataset, "no training vectors");
    const auto result = train_batch(init_model(train.front().input.size(), labels.size(), cfg.train.seed), train, cfg.train);
    fs::create_directories(o.out);
    std::ostringstream model;
    write_model(model, result.model);
    write_text(o.out / "model.txt", model.str());
    write_labels(o.out / "labels.txt", labels);
    log(o, "trained " + std::to_string(result.loss_history.size()) + " epochs, final loss " +
               std::to_string(result.loss_history.back()));
}

void run_evaluate(const Options& o)
{
    const auto cfg = effective_config(o, load_config(o.data / "config.ini"));
    const auto method = single_method(cfg);
    const auto labels = read_labels(o.model / "labels.txt");
    std::istringstream model_text(read_text(o.model / "model.txt"));
    const auto model = read_model(model_text);
    const auto test = to_examples(read_features(o.data / "test.csv"), labels);
    if (test.empty())
        throw Error(ErrorCode::EmptyDataset, "no test vectors");

    std::vector<std::size_t> actual, predicted;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& ex : test) {
        predicted.push_back(predict(model, ex.input));
        actual.push_back(ex.target);
    }
    EvalRow row;
    row.method = std::string(perfusion_name(method.tag));
    row.bit_plane = method.plane();
    row.block_size = cfg.block_sizes.front();
    row.extractor = std::string(extractor_name(cfg.extractors.front()));
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() /
                    static_cast<double>(test.size());
    row.summary = summarize(actual, predicted, labels.size());
    const EvalReport report{{row}};
    fs::create_directories(o.out);
    write_text(o.out / "report.txt", render_report(report));
    write_text(o.out / "report.csv", render_report_csv(report));
    if (!o.quiet)
        std::cout << render_report(report);
}

void run_experiment_cmd(const Options& o)
{
    const auto cfg = effective_config(o);
    const auto ds = ingest(o.data, cfg.split_ratio, cfg.seed);
    fs::create_directories(o.out / "models");
    RunOptions run;
    if (o.debug_dump)
        run.debug_dump = o.out / "debug";
    run.log = [&](const std::string& msg) { log(o, msg); };
    run.on_model = [&](const EvalRow& r, const MlpModel& m) {
        const auto name = r.method + (r.bit_plane ? std::to_string(*r.bit_plane) : "") + "_" + r.extractor + "_" +
                          std::to_string(r.block_size) + ".txt";
        std::ostringstream text;
        write_model(text, m);
        write_text(o.out / "models" / name, text.str());
    };
    const auto report = run_experiment(cfg, ds, run);
    write_labels(o.out / "models" / "labels.txt", ds.persons);
    write_text(o.out / "config.ini", format_config(cfg));
    write_text(o.out / "report.txt", render_report(report));
    write_text(o.out / "report.csv", render_report_csv(report));
    if (!o.quiet)
        std::cout << render_report(report);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Thermal face recognition from blood perfusion minutiae"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub, bool needs_data) {
        sub->add_option("--config", o.config, "key = value config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "seed for the split and training");
        if (needs_data)
            sub->add_option("--data", o.data, "input directory")->required();
        sub->add_option("--out", o.out, "output directory")->required();
        sub->add_flag("--quiet", o.quiet, "no progress output");
    };
    auto grid = [&](CLI::App* sub) {
        sub->add_option("--method", o.method, "bitplane, erosion or sobel (comma list)");
        sub->add_option("--bit-plane", o.bit_plane, "bit plane 0..7 (comma list)");
        sub->add_option("--block-size", o.block_size, "8, 16 or 32 (comma list)");
        sub->add_option("--extractor", o.extractor, "neighbor_count or crossing_number (comma list)");
    };

    auto* synth = app.add_subcommand("synth", "generate a synthetic thermogram dataset");
    common(synth, false);
    synth->add_option("--persons", o.persons, "number of persons")->capture_default_str();
    synth->add_option("--samples", o.samples, "images per person")->capture_default_str();

    auto* prep = app.add_subcommand("preprocess", "images to minutiae files");
    common(prep, true);
    grid(prep);
    prep->add_flag("--debug-dump", o.debug_dump, "also write face crops and skeletons");

    auto* feats = app.add_subcommand("features", "minutiae files to block feature CSVs");
    common(feats, true);
    grid(feats);

    auto* train = app.add_subcommand("train", "train the classifier on train.csv");
    common(train, true);

    auto* eval = app.add_subcommand("evaluate", "score a trained model on test.csv");
    common(eval, true);
    eval->add_option("--model", o.model, "directory written by train")->required();

    auto* exp = app.add_subcommand("experiment", "run the full method x block x extractor grid");
    common(exp, true);
    grid(exp);
    exp->add_flag("--debug-dump", o.debug_dump, "write per-sample intermediates");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth)
            run_synth(o);
        else if (*prep)
            run_preprocess(o);
        else if (*feats)
            run_features(o);
        else if (*train)
            run_train(o);
        else if (*eval)
            run_evaluate(o);
        else if (*exp)
            run_experiment_cmd(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
