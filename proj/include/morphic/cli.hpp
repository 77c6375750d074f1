/*
 * morphic - Cross-modal facial action unit supervision for event cameras.
 *
 * File: include/morphic/cli.hpp
 *
 * Copyright 2026 The morphic authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#ifndef MORPHIC_CLI_HPP_
#define MORPHIC_CLI_HPP_

#include "morphic/common.hpp"
#include "morphic/crossmodal.hpp"
#include "morphic/events.hpp"
#include "morphic/fitting.hpp"
#include "morphic/learn.hpp"
#include "morphic/model3dmm.hpp"
#include "morphic/synth.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace morphic {
namespace cli {

namespace fs = std::filesystem;

/// Problems with the command line or a config file (exit code 1).
class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig
{
    std::string subcommand;
    std::optional<fs::path> config;
    fs::path out;
    std::uint64_t seed = 1;
    int verbosity = 0;
};

namespace detail {

/**
 * Turns a flat JSON config object into command-line tokens for `sub`. Keys
 * are long flag names without the leading dashes. Unknown keys are rejected.
 */
inline std::vector<std::string> config_tokens(const fs::path& path, CLI::App& sub)
{
    std::ifstream in(path);
    if (!in)
    {
        throw UsageError("cannot open config file '" + path.string() + "'");
    }
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw UsageError("config file '" + path.string() + "': " + e.what());
    }
    if (!j.is_object())
    {
        throw UsageError("config file '" + path.string() + "' must hold a JSON object");
    }
    std::vector<std::string> tokens;
    for (auto it = j.begin(); it != j.end(); ++it)
    {
        const std::string flag = "--" + it.key();
        const CLI::Option* opt = sub.get_option_no_throw(flag);
        if (opt == nullptr || it.key() == "config" || it.key() == "help")
        {
            throw UsageError("unknown key '" + it.key() + "' in config file '" + path.string() + "'");
        }
        const auto& v = it.value();
        if (v.is_boolean())
        {
            if (opt->get_type_size() != 0)
            {
                throw UsageError("config key '" + it.key() + "' expects a value, not a boolean");
            }
            if (v.get<bool>())
            {
                tokens.push_back(flag);
            }
            continue;
        }
        if (!(v.is_string() || v.is_number()))
        {
            throw UsageError("config key '" + it.key() + "' must be a string, number or boolean");
        }
        tokens.push_back(flag);
        tokens.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
    return tokens;
}

/// Every option of the subcommand with the value it resolved to.
inline nlohmann::ordered_json resolved_config(const CLI::App& sub)
{
    nlohmann::ordered_json j;
    j["subcommand"] = sub.get_name();
    for (const CLI::Option* opt : sub.get_options())
    {
        const std::string name = opt->get_single_name();
        if (name == "help" || name == "config")
        {
            continue;
        }
        std::string value;
        if (opt->count() > 0)
        {
            value = opt->get_type_size() == 0 ? "true" : opt->results().back();
        }
        else
        {
            value = opt->get_type_size() == 0 ? "false" : opt->get_default_str();
        }
        const auto parsed = nlohmann::json::parse(value, nullptr, false);
        if (!parsed.is_discarded() && (parsed.is_number() || parsed.is_boolean()))
        {
            j[name] = parsed;
        }
        else
        {
            j[name] = value;
        }
    }
    return j;
}

inline void write_resolved(const CLI::App& sub, const fs::path& out)
{
    fs::create_directories(out);
    write_text_file(out / "resolved-config.json", resolved_config(sub).dump(2) + "\n");
}

struct Log
{
    int verbosity = 0;
    std::ostream* err = &std::cerr;

    void operator()(const std::string& msg) const
    {
        if (verbosity > 0)
        {
            *err << msg << "\n";
        }
    }
};

inline std::vector<crossmodal::LabeledSequence> split_of(const std::vector<crossmodal::LabeledSequence>& data,
                                                         const std::string& which)
{
    std::vector<crossmodal::LabeledSequence> out;
    for (const auto& s : data)
    {
        if (which == "all" || crossmodal::to_string(s.split) == which)
        {
            out.push_back(s);
        }
    }
    return out;
}

inline int max_label(const std::vector<crossmodal::LabeledSequence>& data)
{
    int m = 0;
    for (const auto& s : data)
    {
        m = std::max(m, s.au_class);
    }
    return m;
}

inline crossmodal::Alignment alignment_from(const std::string& s)
{
    return s == "interp" ? crossmodal::Alignment::interpolated : crossmodal::Alignment::nearest;
}

} // namespace detail

/// Shared learner flags of train and ablate.
struct LearnOptions
{
    int epochs = 30;
    double learning_rate = 1e-3;
    int batch_size = 8;
    double lambda = 1.0;
    int hidden = 32;
    int head_hidden = 32;
    std::string aggregator = "gated";
    std::string wiring = "per-step";
    int grid = 8;
    std::string normalization = "log1p";
    int classes = 0;

    void add_to(CLI::App& sub, bool with_lambda)
    {
        sub.add_option("--epochs", epochs, "Training epochs")->check(CLI::NonNegativeNumber);
        sub.add_option("--lr", learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
        sub.add_option("--batch", batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
        if (with_lambda)
        {
            sub.add_option("--lambda", lambda, "Weight of the per-frame coefficient loss")
                ->check(CLI::NonNegativeNumber);
        }
        sub.add_option("--hidden", hidden, "Encoder/aggregator width")->check(CLI::PositiveNumber);
        sub.add_option("--head-hidden", head_hidden, "Hidden width of both heads")->check(CLI::PositiveNumber);
        sub.add_option("--aggregator", aggregator, "Sequence aggregator")->check(CLI::IsMember({"gated", "mean-pool"}));
        sub.add_option("--wiring", wiring, "Regression head input")
            ->check(CLI::IsMember({"per-step", "final-state-broadcast"}));
        sub.add_option("--grid", grid, "Feature pooling grid G (d = 2 G^2)")->check(CLI::PositiveNumber);
        sub.add_option("--norm", normalization, "Feature normalisation")
            ->check(CLI::IsMember({"log1p", "per-frame-max"}));
        sub.add_option("--classes", classes, "Classifier width C (0: largest label + 1)")
            ->check(CLI::NonNegativeNumber);
    }

    learn::FeatureConfig features() const
    {
        return {.grid = grid, .normalization = learn::normalization_from_string(normalization)};
    }

    learn::NetConfig net(int input_dim, int outputs, int default_classes) const
    {
        learn::NetConfig c;
        c.input_dim = input_dim;
        c.hidden = hidden;
        c.head_hidden = head_hidden;
        c.outputs = outputs;
        c.classes = classes > 0 ? classes : default_classes;
        c.aggregator = learn::aggregator_from_string(aggregator);
        c.wiring = learn::wiring_from_string(wiring);
        return c;
    }

    learn::TrainConfig train(std::uint64_t seed) const
    {
        learn::TrainConfig t;
        t.lambda = lambda;
        t.learning_rate = learning_rate;
        t.epochs = epochs;
        t.batch_size = batch_size;
        t.seed = seed;
        return t;
    }
};

/**
 * Entry point shared by the executable and the tests. `args` excludes the
 * program name. Returns 0 on success, 1 on usage errors, 2 on data errors.
 */
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Cross-modal AU supervision pipeline for event cameras", "morphic"};
    app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1, 1);
    app.fallthrough(false);

    RunConfig rc;
    std::string config_path;
    int verbosity = 0;
    auto common = [&](CLI::App* sub, bool out_required) {
        sub->add_option("--config", config_path, "JSON file of flag values (keys are flag names)");
        auto* o = sub->add_option("--out", rc.out, "Output directory");
        if (out_required)
        {
            o->required();
        }
        sub->add_flag("-v,--verbose", verbosity, "Print progress to stderr");
    };

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
    common(synth_cmd, true);
    std::string corpus_json;
    synth::CorpusConfig corpus_defaults;
    std::uint64_t synth_seed = 1;
    std::uint32_t subjects = corpus_defaults.subjects, classes = corpus_defaults.classes,
                  videos_per_class = corpus_defaults.videos_per_class;
    double landmark_noise = 0.0;
    std::string split_mode = "by-video";
    synth_cmd->add_option("--seed", synth_seed, "Corpus seed");
    synth_cmd->add_option("--corpus", corpus_json, "Full corpus configuration (JSON, strict keys)")
        ->check(CLI::ExistingFile);
    synth_cmd->add_option("--subjects", subjects, "Number of subjects")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--classes", classes, "Number of AU classes")->check(CLI::Range(1, 24));
    synth_cmd->add_option("--videos-per-class", videos_per_class, "Repeats per subject and class")
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--landmark-noise", landmark_noise, "Landmark jitter in pixels")
        ->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--split-mode", split_mode, "Train/test split unit")
        ->check(CLI::IsMember({"by-video", "by-subject"}));

    // build-model
    auto* build_cmd = app.add_subcommand("build-model", "Build identity and AU models from a mesh table");
    common(build_cmd, true);
    fs::path meshes;
    std::uint32_t identity_k = 3, au_k = 8;
    std::string au_method = "pca";
    int sparsity = 5;
    build_cmd->add_option("--meshes", meshes, "MTAB file or directory of .mtab files")->required();
    build_cmd->add_option("--identity-k", identity_k, "Identity components")->check(CLI::PositiveNumber);
    build_cmd->add_option("--au-k", au_k, "AU components")->check(CLI::PositiveNumber);
    build_cmd->add_option("--au-method", au_method, "AU basis method")->check(CLI::IsMember({"pca", "sparse"}));
    build_cmd->add_option("--sparsity", sparsity, "Nonzero codes per offset (sparse method)")
        ->check(CLI::PositiveNumber);

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit landmark sequences to coefficient tracks");
    common(fit_cmd, true);
    fs::path manifest_path, identity_path, au_path;
    double lambda_id = 0.01, lambda_au = 0.05;
    bool use_depth = false, skip_failed = false;
    fit_cmd->add_option("--manifest", manifest_path, "JSON-lines manifest")->required();
    fit_cmd->add_option("--identity", identity_path, "Identity model (M3DM)")->required();
    fit_cmd->add_option("--au", au_path, "AU model (M3DM)")->required();
    fit_cmd->add_option("--lambda-id", lambda_id, "Ridge weight of the identity fit")->check(CLI::NonNegativeNumber);
    fit_cmd->add_option("--lambda-au", lambda_au, "Ridge weight of the AU fit")->check(CLI::NonNegativeNumber);
    fit_cmd->add_flag("--use-depth", use_depth, "Use landmark depth when present");
    fit_cmd->add_flag("--skip-failed", skip_failed, "Mark unfittable frames invalid instead of failing");

    // transfer
    auto* transfer_cmd = app.add_subcommand("transfer", "Align coefficient tracks with event streams into a dataset");
    common(transfer_cmd, true);
    std::uint64_t dt_us = 33'000;
    std::size_t clip_len = 75;
    std::string alignment = "nearest";
    int num_classes = crossmodal::kAuClassCount;
    transfer_cmd->add_option("--manifest", manifest_path, "JSON-lines manifest")->required();
    transfer_cmd->add_option("--dt-us", dt_us, "Frame window in microseconds")->check(CLI::PositiveNumber);
    transfer_cmd->add_option("--clip-len", clip_len, "Frames per clip")->check(CLI::PositiveNumber);
    transfer_cmd->add_option("--alignment", alignment, "Track alignment")->check(CLI::IsMember({"nearest", "interp"}));
    transfer_cmd->add_option("--classes", num_classes, "Number of AU classes")->check(CLI::PositiveNumber);
    transfer_cmd->add_option("--identity", identity_path, "Identity model for landmark-only records");
    transfer_cmd->add_option("--au", au_path, "AU model for landmark-only records");

    // train
    auto* train_cmd = app.add_subcommand("train", "Train the multi-task network");
    common(train_cmd, true);
    fs::path dataset_path;
    std::uint64_t seed = 1;
    LearnOptions train_opts;
    train_cmd->add_option("--dataset", dataset_path, "LSEQ dataset from transfer")->required();
    train_cmd->add_option("--seed", seed, "Initialisation and shuffling seed");
    train_opts.add_to(*train_cmd, true);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained network");
    common(eval_cmd, false);
    fs::path model_path;
    std::string split = "test";
    double eval_lambda = 1.0;
    eval_cmd->add_option("--dataset", dataset_path, "LSEQ dataset")->required();
    eval_cmd->add_option("--model", model_path, "MTNW checkpoint")->required();
    eval_cmd->add_option("--split", split, "Records to evaluate")->check(CLI::IsMember({"test", "train", "all"}));
    eval_cmd->add_option("--lambda", eval_lambda, "Loss weight used in the reported total")
        ->check(CLI::NonNegativeNumber);

    // ablate
    auto* ablate_cmd = app.add_subcommand("ablate", "Train with and without the coefficient loss and compare");
    common(ablate_cmd, false);
    fs::path corpus_dir;
    int seeds = 5;
    LearnOptions ablate_opts;
    ablate_cmd->add_option("--corpus", corpus_dir, "Corpus directory with manifest.jsonl");
    ablate_cmd->add_option("--dataset", dataset_path, "LSEQ dataset (instead of --corpus)");
    ablate_cmd->add_option("--seeds", seeds, "Seeds per setting (1..n)")->check(CLI::PositiveNumber);
    ablate_cmd->add_option("--dt-us", dt_us, "Frame window when building from a corpus")->check(CLI::PositiveNumber);
    ablate_cmd->add_option("--clip-len", clip_len, "Frames per clip when building from a corpus")
        ->check(CLI::PositiveNumber);
    ablate_opts.add_to(*ablate_cmd, false);

    // frames
    auto* frames_cmd = app.add_subcommand("frames", "Accumulate an event file into frames");
    common(frames_cmd, false);
    fs::path events_path;
    std::string policy = "drop-tail";
    bool dump_counts = false;
    std::uint16_t csv_width = 0, csv_height = 0;
    frames_cmd->add_option("--events", events_path, "EVT-B1 file or CSV (t_us,x,y,p)")->required();
    frames_cmd->add_option("--dt-us", dt_us, "Frame window in microseconds")->check(CLI::PositiveNumber);
    frames_cmd->add_option("--policy", policy, "Incomplete final window")
        ->check(CLI::IsMember({"drop-tail", "flush-partial"}));
    frames_cmd->add_option("--width", csv_width, "Sensor width for CSV input")->check(CLI::PositiveNumber);
    frames_cmd->add_option("--height", csv_height, "Sensor height for CSV input")
        ->check(CLI::PositiveNumber);
    frames_cmd->add_flag("--counts", dump_counts, "Include full count tensors in the dump");

    if (args.empty())
    {
        err << app.help();
        return 1;
    }

    // Config-file values go first so explicit flags override them.
    std::vector<std::string> tokens = args;
    try
    {
        for (std::size_t i = 1; i < args.size(); ++i)
        {
            std::optional<std::string> file;
            if (args[i] == "--config" && i + 1 < args.size())
            {
                file = args[i + 1];
            }
            else if (args[i].rfind("--config=", 0) == 0)
            {
                file = args[i].substr(9);
            }
            if (file)
            {
                CLI::App* sub = app.get_subcommand_no_throw(args[0]);
                if (sub == nullptr)
                {
                    throw UsageError("--config must follow a subcommand");
                }
                const auto extra = detail::config_tokens(*file, *sub);
                tokens.insert(tokens.begin() + 1, extra.begin(), extra.end());
                break;
            }
        }
        std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
        app.parse(reversed);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }
    catch (const UsageError& e)
    {
        err << "usage error: " << e.what() << "\n";
        return 1;
    }

    CLI::App* sub = app.get_subcommands().front();
    rc.subcommand = sub->get_name();
    rc.verbosity = verbosity;
    if (!config_path.empty())
    {
        rc.config = config_path;
    }
    const detail::Log log{verbosity, &err};

    try
    {
        if (!rc.out.empty())
        {
            detail::write_resolved(*sub, rc.out);
        }

        if (sub == synth_cmd)
        {
            synth::CorpusConfig cfg;
            if (!corpus_json.empty())
            {
                std::ifstream in(corpus_json);
                nlohmann::json j;
                try
                {
                    j = nlohmann::json::parse(in);
                }
                catch (const nlohmann::json::exception& e)
                {
                    throw UsageError("corpus config: " + std::string(e.what()));
                }
                try
                {
                    cfg = synth::corpus_config_from_json(j);
                }
                catch (const Error& e)
                {
                    throw UsageError(e.what());
                }
            }
            if (synth_cmd->count("--seed") || corpus_json.empty())
                cfg.seed = synth_seed;
            if (synth_cmd->count("--subjects"))
                cfg.subjects = subjects;
            if (synth_cmd->count("--classes"))
                cfg.classes = classes;
            if (synth_cmd->count("--videos-per-class"))
                cfg.videos_per_class = videos_per_class;
            if (synth_cmd->count("--landmark-noise"))
                cfg.landmark_noise_px = landmark_noise;
            if (synth_cmd->count("--split-mode"))
                cfg.split_mode =
                    split_mode == "by-subject" ? crossmodal::SplitMode::by_subject : crossmodal::SplitMode::by_video;
            log("generating corpus in " + rc.out.string());
            const auto corpus = synth::generate_corpus(cfg, rc.out);
            out << corpus.stats.videos << " videos, " << corpus.stats.events << " events\n";
            return 0;
        }

        if (sub == build_cmd)
        {
            const auto table = model3dmm::load_mesh_table(meshes);
            const auto landmarks = model3dmm::default_landmark_indices(table.vertex_count);
            log("building identity model from " + std::to_string(table.neutrals().meshes.size()) + " neutral meshes");
            const auto id_model = model3dmm::build_identity_model(table.neutrals(), identity_k, landmarks);
            model3dmm::SparseDictConfig sparse;
            sparse.sparsity = sparsity;
            const auto au_model = model3dmm::build_au_model(
                table, au_k, au_method == "sparse" ? model3dmm::AuMethod::sparse_dict : model3dmm::AuMethod::pca_offsets,
                landmarks, sparse);
            model3dmm::save_model(id_model, rc.out / "identity.m3dm");
            model3dmm::save_model(au_model, rc.out / "au.m3dm");
            out << "identity K=" << id_model.component_count() << ", AU K=" << au_model.component_count() << "\n";
            return 0;
        }

        if (sub == fit_cmd)
        {
            auto manifest = crossmodal::load_manifest(manifest_path);
            crossmodal::LandmarkFitting models{model3dmm::load_model(identity_path), model3dmm::load_model(au_path)};
            models.identity_cfg.lambda_reg = lambda_id;
            models.identity_cfg.use_depth = use_depth;
            models.au_cfg.lambda_reg = lambda_au;
            models.au_cfg.use_depth = use_depth;
            models.au_cfg.skip_failed = skip_failed;
            fs::create_directories(rc.out);
            std::size_t fitted = 0;
            for (std::size_t i = 0; i < manifest.records.size(); ++i)
            {
                auto& rec = manifest.records[i];
                if (!rec.landmarks)
                {
                    continue;
                }
                try
                {
                    log("fitting " + rec.video);
                    const auto frames = fitting::load_landmarks(*rec.landmarks);
                    const auto track = crossmodal::fit_landmark_track(frames, models);
                    const fs::path dest = rc.out / (rec.video + ".atrk");
                    crossmodal::save_track(track, dest);
                    rec.coeffs = dest;
                    rec.landmarks.reset();
                    ++fitted;
                }
                catch (const Error& e)
                {
                    throw Error(e.code(), "record " + std::to_string(i) + " ('" + rec.video + "'): " + e.what(), i);
                }
            }
            write_text_file(rc.out / "manifest.jsonl", crossmodal::format_manifest(manifest, rc.out));
            out << fitted << " tracks fitted\n";
            return 0;
        }

        if (sub == transfer_cmd)
        {
            const auto manifest = crossmodal::load_manifest(manifest_path);
            crossmodal::DatasetConfig cfg;
            cfg.window_len = dt_us;
            cfg.clip_len = clip_len;
            cfg.alignment = detail::alignment_from(alignment);
            cfg.num_classes = num_classes;
            if (!identity_path.empty() && !au_path.empty())
            {
                cfg.fitting =
                    crossmodal::LandmarkFitting{model3dmm::load_model(identity_path), model3dmm::load_model(au_path)};
            }
            const auto data = crossmodal::build_dataset(manifest, cfg);
            crossmodal::save_dataset(data, rc.out / "dataset.lseq");
            out << data.size() << " sequences\n";
            return 0;
        }

        if (sub == train_cmd)
        {
            const auto data = crossmodal::load_dataset(dataset_path);
            const auto fcfg = train_opts.features();
            const auto train_set = learn::make_samples(data, fcfg, crossmodal::Split::train);
            if (train_set.empty())
            {
                throw Error(ErrorCode::InvalidArgument, "dataset has no training records");
            }
            auto net = learn::make_net(
                train_opts.net(fcfg.dim(), int(train_set.front().targets.cols()), detail::max_label(data) + 1), seed);
            net.features = fcfg;
            std::string metrics;
            const auto result = learn::train(net, train_set, train_opts.train(seed), [&](int epoch, const auto& r) {
                auto j = nlohmann::ordered_json{{"epoch", epoch + 1}};
                j.update(learn::to_json(r));
                metrics += j.dump() + "\n";
                log("epoch " + std::to_string(epoch + 1) + " loss " + std::to_string(r.loss));
            });
            learn::save_net(result.net, rc.out / "model.mtnw");
            write_text_file(rc.out / "metrics.jsonl", metrics);
            const auto& last = result.history.empty() ? result.initial : result.history.back();
            out << "trained " << result.history.size() << " epochs, final loss " << last.loss << ", top-1 "
                << last.top1 << "\n";
            return 0;
        }

        if (sub == eval_cmd)
        {
            const auto net = learn::load_net(model_path);
            const auto data = detail::split_of(crossmodal::load_dataset(dataset_path), split);
            const auto samples = learn::make_samples(data, net.features);
            const auto report = learn::evaluate(net, samples, eval_lambda);
            const std::string text = learn::to_json(report).dump(2) + "\n";
            if (!rc.out.empty())
            {
                write_text_file(rc.out / "metrics.json", text);
            }
            out << text;
            return 0;
        }

        if (sub == ablate_cmd)
        {
            std::vector<crossmodal::LabeledSequence> data;
            if (!dataset_path.empty())
            {
                data = crossmodal::load_dataset(dataset_path);
            }
            else if (!corpus_dir.empty())
            {
                crossmodal::DatasetConfig cfg;
                cfg.window_len = dt_us;
                cfg.clip_len = clip_len;
                data = crossmodal::build_dataset(crossmodal::load_manifest(corpus_dir / "manifest.jsonl"), cfg);
            }
            else
            {
                throw UsageError("ablate needs --corpus or --dataset");
            }
            const auto fcfg = ablate_opts.features();
            const auto train_set = learn::make_samples(data, fcfg, crossmodal::Split::train);
            const auto test_set = learn::make_samples(data, fcfg, crossmodal::Split::test);
            if (train_set.empty() || test_set.empty())
            {
                throw Error(ErrorCode::InvalidArgument, "ablation needs both train and test records");
            }
            const auto net_cfg =
                ablate_opts.net(fcfg.dim(), int(train_set.front().targets.cols()), detail::max_label(data) + 1);
            const auto rows = learn::ablate(train_set, test_set, net_cfg, ablate_opts.train(1), seeds);
            nlohmann::ordered_json table;
            table["seeds"] = seeds;
            table["train"] = train_set.size();
            table["test"] = test_set.size();
            table["rows"] = nlohmann::ordered_json::array();
            for (const auto& row : rows)
            {
                nlohmann::ordered_json r;
                r["loss"] = row.lambda == 0.0 ? "L_AU" : "L_AU + lambda * L_alpha";
                r["lambda"] = row.lambda;
                r["top1"] = row.top1;
                r["top3"] = row.top3;
                r["top5"] = row.top5;
                r["top1_per_seed"] = nlohmann::ordered_json::array();
                for (const auto& run : row.runs)
                {
                    r["top1_per_seed"].push_back(run.top1);
                }
                table["rows"].push_back(r);
            }
            const std::string text = table.dump(2) + "\n";
            if (!rc.out.empty())
            {
                write_text_file(rc.out / "ablation.json", text);
            }
            out << text;
            return 0;
        }

        if (sub == frames_cmd)
        {
            std::vector<events::Event> evs;
            events::SensorSize size{};
            if (events_path.extension() == ".csv")
            {
                std::ifstream in(events_path);
                if (!in)
                {
                    throw Error(ErrorCode::Io, "cannot open '" + events_path.string() + "'");
                }
                evs = events::read_event_csv(in);
                if (!frames_cmd->count("--width") || !frames_cmd->count("--height"))
                {
                    throw UsageError("CSV input needs --width and --height");
                }
                size = {csv_width, csv_height};
            }
            else
            {
                const auto stream = events::load_event_stream(events_path);
                evs = stream.read_all();
                size = stream.size();
            }
            events::FrameOptions opts;
            opts.window_len = dt_us;
            opts.policy = policy == "flush-partial" ? events::TailPolicy::flush_partial : events::TailPolicy::drop_tail;
            const auto seq = events::generate_frames(evs, size, opts);
            if (!rc.out.empty())
            {
                std::string dump;
                for (const auto& f : seq.frames)
                {
                    nlohmann::ordered_json j;
                    j["window_start"] = f.window_start;
                    j["span"] = f.span;
                    std::uint64_t on = 0, off = 0;
                    for (int y = 0; y < f.height; ++y)
                    {
                        for (int x = 0; x < f.width; ++x)
                        {
                            on += f.count(1, x, y);
                            off += f.count(0, x, y);
                        }
                    }
                    j["on"] = on;
                    j["off"] = off;
                    if (dump_counts)
                    {
                        j["counts"] = f.counts;
                    }
                    dump += j.dump() + "\n";
                }
                write_text_file(rc.out / "frames.jsonl", dump);
            }
            out << seq.frames.size() << " frames\n";
            return 0;
        }
    }
    catch (const UsageError& e)
    {
        err << "usage error: " << e.what() << "\n";
        return 1;
    }
    catch (const Error& e)
    {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    catch (const fs::filesystem_error& e)
    {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

} // namespace cli
} // namespace morphic

#endif /* MORPHIC_CLI_HPP_ */
