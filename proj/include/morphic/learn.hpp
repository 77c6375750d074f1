/*
 * morphic - Cross-modal facial action unit supervision for event cameras.
 *
 * File: include/morphic/learn.hpp
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

#ifndef MORPHIC_LEARN_HPP_
#define MORPHIC_LEARN_HPP_

#include "morphic/common.hpp"
#include "morphic/crossmodal.hpp"
#include "morphic/events.hpp"

#include "Eigen/Core"

#include "json.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace morphic {
namespace learn {

// --- features ----------------------------------------------------------------

enum class Normalization
{
    log1p,
    per_frame_max,
};

struct FeatureConfig
{
    int grid = 8;
    Normalization normalization = Normalization::log1p;

    int dim() const { return 2 * grid * grid; }
};

/**
 * Sum-pools each polarity plane into grid x grid cells (cells of
 * ceil(W/G) x ceil(H/G) pixels) and normalises. Layout [polarity][gy][gx].
 */
inline Eigen::VectorXd extract_features(const events::EventFrame& frame, const FeatureConfig& cfg)
{
    if (cfg.grid <= 0)
    {
        throw Error(ErrorCode::InvalidArgument, "feature grid must be positive");
    }
    const int g = cfg.grid;
    const int cw = (frame.width + g - 1) / g;
    const int ch = (frame.height + g - 1) / g;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(cfg.dim());
    for (int p = 0; p < 2; ++p)
    {
        for (int y = 0; y < frame.height; ++y)
        {
            for (int x = 0; x < frame.width; ++x)
            {
                const auto c = frame.count(p, x, y);
                if (c != 0)
                {
                    out[(p * g + y / ch) * g + x / cw] += c;
                }
            }
        }
    }
    if (cfg.normalization == Normalization::log1p)
    {
        out = out.array().log1p();
    }
    else
    {
        const double peak = out.maxCoeff();
        if (peak > 0.0)
        {
            out /= peak;
        }
    }
    return out;
}

/**
 * One training/evaluation example: T x d inputs, T x K regression targets,
 * a 0/1 mask of real frames (a non-empty prefix) and the class label.
 */
struct Sample
{
    Eigen::MatrixXd features;
    Eigen::MatrixXd targets;
    std::vector<std::uint8_t> mask;
    int label = 0;
};

inline Sample make_sample(const crossmodal::LabeledSequence& seq, const FeatureConfig& cfg)
{
    Sample s;
    s.features.resize(Eigen::Index(seq.frames.length()), cfg.dim());
    for (std::size_t f = 0; f < seq.frames.length(); ++f)
    {
        s.features.row(Eigen::Index(f)) = extract_features(seq.frames.frames[f], cfg).transpose();
    }
    s.targets = seq.targets;
    s.mask = seq.mask;
    s.label = seq.au_class;
    return s;
}

inline std::vector<Sample> make_samples(const std::vector<crossmodal::LabeledSequence>& data, const FeatureConfig& cfg,
                                        std::optional<crossmodal::Split> split = std::nullopt)
{
    std::vector<Sample> out;
    for (const auto& seq : data)
    {
        if (!split || seq.split == *split)
        {
            out.push_back(make_sample(seq, cfg));
        }
    }
    return out;
}

// --- network -----------------------------------------------------------------

enum class Aggregator
{
    mean_pool,
    gated,
};

enum class RegressionWiring
{
    per_step,              ///< encoder output (mean-pool) or per-step state (gated)
    final_state_broadcast, ///< aggregate state fed to the regressor at every step
};

struct NetConfig
{
    int input_dim = 128;
    int hidden = 32;
    int head_hidden = 32;
    int outputs = 8; ///< K, regression width
    int classes = 8; ///< C
    Aggregator aggregator = Aggregator::gated;
    RegressionWiring wiring = RegressionWiring::per_step;
};

/// Parameter tensors in declaration order.
enum Param : std::size_t
{
    kEncW,
    kEncB,
    kGateW,
    kGateU,
    kGateB,
    kCandW,
    kCandU,
    kCandB,
    kRegW1,
    kRegB1,
    kRegW2,
    kRegB2,
    kClsW1,
    kClsB1,
    kClsW2,
    kClsB2,
    kParamCount
};

inline constexpr std::array<const char*, kParamCount> kParamNames = {
    "encoder.weight",    "encoder.bias",   "gate.input",      "gate.recurrent",    "gate.bias",
    "candidate.input",   "candidate.recurrent", "candidate.bias", "regression.fc1.weight", "regression.fc1.bias",
    "regression.fc2.weight", "regression.fc2.bias", "classifier.fc1.weight", "classifier.fc1.bias",
    "classifier.fc2.weight", "classifier.fc2.bias"};

using ParamSet = std::array<Eigen::MatrixXd, kParamCount>;

/**
 * Desk-scale multi-task network: rectified affine frame encoder, mean-pool or
 * gated recurrent aggregator, a two-layer per-frame regression head (K
 * outputs) and a two-layer classification head (C logits). Gate tensors are
 * empty for the mean-pool aggregator.
 */
struct MultiTaskNet
{
    NetConfig config;
    FeatureConfig features; ///< how inputs were produced; informational for the net itself
    ParamSet params;

    bool uses(Param p) const
    {
        const bool gate = p >= kGateW && p <= kCandB;
        return !gate || config.aggregator == Aggregator::gated;
    }

    std::size_t parameter_count() const
    {
        std::size_t n = 0;
        for (const auto& t : params)
        {
            n += std::size_t(t.size());
        }
        return n;
    }
};

inline std::array<std::pair<int, int>, kParamCount> parameter_shapes(const NetConfig& c)
{
    const bool gated = c.aggregator == Aggregator::gated;
    const int h = c.hidden;
    const int gh = gated ? h : 0;
    const int gi = gated ? h : 0;
    return {{{h, c.input_dim},
             {h, 1},
             {gh, gi},
             {gh, gi},
             {gh, gated ? 1 : 0},
             {gh, gi},
             {gh, gi},
             {gh, gated ? 1 : 0},
             {c.head_hidden, h},
             {c.head_hidden, 1},
             {c.outputs, c.head_hidden},
             {c.outputs, 1},
             {c.head_hidden, h},
             {c.head_hidden, 1},
             {c.classes, c.head_hidden},
             {c.classes, 1}}};
}

/// Glorot-uniform weights, zero biases.
inline MultiTaskNet make_net(const NetConfig& cfg, std::uint64_t seed)
{
    if (cfg.input_dim <= 0 || cfg.hidden <= 0 || cfg.head_hidden <= 0 || cfg.outputs <= 0 || cfg.classes <= 0)
    {
        throw Error(ErrorCode::InvalidArgument, "network dimensions must be positive");
    }
    MultiTaskNet net;
    net.config = cfg;
    Rng rng(mix64(seed ^ 0x6e6574ull));
    const auto shapes = parameter_shapes(cfg);
    for (std::size_t p = 0; p < kParamCount; ++p)
    {
        const auto [rows, cols] = shapes[p];
        auto& t = net.params[p];
        t = Eigen::MatrixXd::Zero(rows, cols);
        if (cols > 1 || (cols == 1 && p != kEncB && p != kGateB && p != kCandB && p != kRegB1 && p != kRegB2 &&
                         p != kClsB1 && p != kClsB2))
        {
            const double bound = std::sqrt(6.0 / double(rows + cols));
            for (Eigen::Index i = 0; i < t.size(); ++i)
            {
                t.data()[i] = rng.uniform(-bound, bound);
            }
        }
    }
    return net;
}

/// Per-sequence forward state kept for the backward pass.
struct ForwardCache
{
    Eigen::MatrixXd enc_pre;   ///< T x h
    Eigen::MatrixXd enc;       ///< T x h
    Eigen::MatrixXd states;    ///< (T+1) x h, gated only; row 0 is the zero state
    Eigen::MatrixXd gates;     ///< T x h
    Eigen::MatrixXd cands;     ///< T x h
    Eigen::VectorXd aggregate; ///< h
    Eigen::MatrixXd reg_in;    ///< T x h
    Eigen::MatrixXd reg_pre;   ///< T x r
    Eigen::MatrixXd reg_hidden;
    Eigen::VectorXd cls_pre;
    Eigen::VectorXd cls_hidden;
    std::size_t last_real = 0;
    std::size_t real_count = 0;
};

struct ForwardResult
{
    Eigen::VectorXd logits;     ///< C
    Eigen::MatrixXd regression; ///< T x K
};

namespace detail {

inline double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

inline void check_mask(const std::vector<std::uint8_t>& mask, Eigen::Index frames, std::size_t& last, std::size_t& count)
{
    if (mask.size() != std::size_t(frames))
    {
        throw Error(ErrorCode::DimensionMismatch, "mask length must equal the frame count");
    }
    count = 0;
    for (std::size_t t = 0; t < mask.size(); ++t)
    {
        if (mask[t])
        {
            last = t;
            ++count;
        }
    }
    if (count == 0)
    {
        throw Error(ErrorCode::InvalidArgument, "sequence has no real frames");
    }
}

} // namespace detail

inline ForwardResult forward(const MultiTaskNet& net, const Eigen::MatrixXd& features,
                             const std::vector<std::uint8_t>& mask, ForwardCache* cache_out = nullptr)
{
    const auto& P = net.params;
    const auto& cfg = net.config;
    if (features.cols() != cfg.input_dim)
    {
        throw Error(ErrorCode::DimensionMismatch, "feature width " + std::to_string(features.cols()) +
                                                      " does not match network input " + std::to_string(cfg.input_dim));
    }
    ForwardCache local;
    ForwardCache& c = cache_out ? *cache_out : local;
    detail::check_mask(mask, features.rows(), c.last_real, c.real_count);
    const Eigen::Index steps = features.rows();

    c.enc_pre = (features * P[kEncW].transpose()).rowwise() + P[kEncB].col(0).transpose();
    c.enc = c.enc_pre.cwiseMax(0.0);

    if (cfg.aggregator == Aggregator::mean_pool)
    {
        c.aggregate = Eigen::VectorXd::Zero(cfg.hidden);
        for (Eigen::Index t = 0; t < steps; ++t)
        {
            if (mask[std::size_t(t)])
            {
                c.aggregate += c.enc.row(t).transpose();
            }
        }
        c.aggregate /= double(c.real_count);
        if (cfg.wiring == RegressionWiring::per_step)
        {
            c.reg_in = c.enc;
        }
        else
        {
            c.reg_in = c.aggregate.transpose().replicate(steps, 1);
        }
    }
    else
    {
        c.states = Eigen::MatrixXd::Zero(steps + 1, cfg.hidden);
        c.gates.resize(steps, cfg.hidden);
        c.cands.resize(steps, cfg.hidden);
        for (Eigen::Index t = 0; t < steps; ++t)
        {
            const Eigen::VectorXd prev = c.states.row(t).transpose();
            const Eigen::VectorXd x = c.enc.row(t).transpose();
            const Eigen::VectorXd u =
                (P[kGateW] * x + P[kGateU] * prev + P[kGateB].col(0)).unaryExpr(&detail::sigmoid);
            const Eigen::VectorXd cand = (P[kCandW] * x + P[kCandU] * prev + P[kCandB].col(0)).array().tanh();
            c.gates.row(t) = u.transpose();
            c.cands.row(t) = cand.transpose();
            c.states.row(t + 1) = ((1.0 - u.array()) * prev.array() + u.array() * cand.array()).transpose();
        }
        c.aggregate = c.states.row(Eigen::Index(c.last_real) + 1).transpose();
        if (cfg.wiring == RegressionWiring::per_step)
        {
            c.reg_in = c.states.bottomRows(steps);
        }
        else
        {
            c.reg_in = c.aggregate.transpose().replicate(steps, 1);
        }
    }

    c.reg_pre = (c.reg_in * P[kRegW1].transpose()).rowwise() + P[kRegB1].col(0).transpose();
    c.reg_hidden = c.reg_pre.cwiseMax(0.0);
    ForwardResult out;
    out.regression = (c.reg_hidden * P[kRegW2].transpose()).rowwise() + P[kRegB2].col(0).transpose();

    c.cls_pre = P[kClsW1] * c.aggregate + P[kClsB1].col(0);
    c.cls_hidden = c.cls_pre.cwiseMax(0.0);
    out.logits = P[kClsW2] * c.cls_hidden + P[kClsB2].col(0);
    return out;
}

inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits)
{
    const double m = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - m).exp();
    return e / e.sum();
}

struct SampleLoss
{
    double au = 0.0;
    double alpha = 0.0;
    double total = 0.0;
};

/**
 * L_AU = -log softmax(logits)[label]; L_alpha = mean over real frames of the
 * squared distance between predicted and target coefficients;
 * L = L_AU + lambda * L_alpha.
 */
inline SampleLoss loss(const ForwardResult& out, const Eigen::MatrixXd& targets, const std::vector<std::uint8_t>& mask,
                       int label, double lambda)
{
    if (label < 0 || label >= out.logits.size())
    {
        throw Error(ErrorCode::BadLabel, "label outside the classifier range");
    }
    if (targets.rows() != out.regression.rows() || targets.cols() != out.regression.cols())
    {
        throw Error(ErrorCode::DimensionMismatch, "regression targets do not match predictions");
    }
    SampleLoss l;
    const double m = out.logits.maxCoeff();
    const double lse = m + std::log((out.logits.array() - m).exp().sum());
    l.au = lse - out.logits[label];
    std::size_t real = 0;
    for (Eigen::Index t = 0; t < targets.rows(); ++t)
    {
        if (mask[std::size_t(t)])
        {
            l.alpha += (out.regression.row(t) - targets.row(t)).squaredNorm();
            ++real;
        }
    }
    l.alpha = real > 0 ? l.alpha / double(real) : 0.0;
    l.total = l.au + lambda * l.alpha;
    return l;
}

inline ParamSet zeros_like(const ParamSet& p)
{
    ParamSet g;
    for (std::size_t i = 0; i < kParamCount; ++i)
    {
        g[i] = Eigen::MatrixXd::Zero(p[i].rows(), p[i].cols());
    }
    return g;
}

/**
 * Reverse-mode gradient of the sample loss, accumulated (scaled by `weight`)
 * into `grads`. Returns the loss.
 */
inline SampleLoss backward(const MultiTaskNet& net, const Sample& sample, double lambda, ParamSet& grads,
                           double weight = 1.0)
{
    const auto& P = net.params;
    const auto& cfg = net.config;
    ForwardCache c;
    const ForwardResult out = forward(net, sample.features, sample.mask, &c);
    const SampleLoss l = loss(out, sample.targets, sample.mask, sample.label, lambda);
    const Eigen::Index steps = sample.features.rows();

    // classification head
    Eigen::VectorXd d_logits = softmax(out.logits);
    d_logits[sample.label] -= 1.0;
    d_logits *= weight;
    grads[kClsW2] += d_logits * c.cls_hidden.transpose();
    grads[kClsB2].col(0) += d_logits;
    const Eigen::VectorXd d_cls_pre = (P[kClsW2].transpose() * d_logits).cwiseProduct(
        (c.cls_pre.array() > 0.0).cast<double>().matrix());
    grads[kClsW1] += d_cls_pre * c.aggregate.transpose();
    grads[kClsB1].col(0) += d_cls_pre;
    Eigen::VectorXd d_aggregate = P[kClsW1].transpose() * d_cls_pre;

    // regression head
    Eigen::MatrixXd d_reg_in = Eigen::MatrixXd::Zero(steps, c.reg_in.cols());
    if (lambda != 0.0)
    {
        const double scale = weight * lambda * 2.0 / double(c.real_count);
        Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(steps, out.regression.cols());
        for (Eigen::Index t = 0; t < steps; ++t)
        {
            if (sample.mask[std::size_t(t)])
            {
                d_out.row(t) = scale * (out.regression.row(t) - sample.targets.row(t));
            }
        }
        grads[kRegW2] += d_out.transpose() * c.reg_hidden;
        grads[kRegB2].col(0) += d_out.colwise().sum().transpose();
        const Eigen::MatrixXd d_reg_pre =
            (d_out * P[kRegW2]).cwiseProduct((c.reg_pre.array() > 0.0).cast<double>().matrix());
        grads[kRegW1] += d_reg_pre.transpose() * c.reg_in;
        grads[kRegB1].col(0) += d_reg_pre.colwise().sum().transpose();
        d_reg_in = d_reg_pre * P[kRegW1];
    }

    Eigen::MatrixXd d_enc = Eigen::MatrixXd::Zero(steps, cfg.hidden);
    if (cfg.wiring == RegressionWiring::final_state_broadcast)
    {
        d_aggregate += d_reg_in.colwise().sum().transpose();
    }

    if (cfg.aggregator == Aggregator::mean_pool)
    {
        if (cfg.wiring == RegressionWiring::per_step)
        {
            d_enc += d_reg_in;
        }
        for (Eigen::Index t = 0; t < steps; ++t)
        {
            if (sample.mask[std::size_t(t)])
            {
                d_enc.row(t) += d_aggregate.transpose() / double(c.real_count);
            }
        }
    }
    else
    {
        Eigen::MatrixXd d_states = Eigen::MatrixXd::Zero(steps + 1, cfg.hidden);
        if (cfg.wiring == RegressionWiring::per_step)
        {
            d_states.bottomRows(steps) += d_reg_in;
        }
        d_states.row(Eigen::Index(c.last_real) + 1) += d_aggregate.transpose();
        for (Eigen::Index t = steps - 1; t >= 0; --t)
        {
            const Eigen::VectorXd ds = d_states.row(t + 1).transpose();
            const Eigen::VectorXd prev = c.states.row(t).transpose();
            const Eigen::VectorXd u = c.gates.row(t).transpose();
            const Eigen::VectorXd cand = c.cands.row(t).transpose();
            const Eigen::VectorXd x = c.enc.row(t).transpose();
            const Eigen::VectorXd d_u_pre =
                (ds.array() * (cand - prev).array() * u.array() * (1.0 - u.array())).matrix();
            const Eigen::VectorXd d_c_pre = (ds.array() * u.array() * (1.0 - cand.array().square())).matrix();
            grads[kGateW] += d_u_pre * x.transpose();
            grads[kGateU] += d_u_pre * prev.transpose();
            grads[kGateB].col(0) += d_u_pre;
            grads[kCandW] += d_c_pre * x.transpose();
            grads[kCandU] += d_c_pre * prev.transpose();
            grads[kCandB].col(0) += d_c_pre;
            d_states.row(t) += (ds.array() * (1.0 - u.array())).matrix().transpose() +
                               (P[kGateU].transpose() * d_u_pre + P[kCandU].transpose() * d_c_pre).transpose();
            d_enc.row(t) += (P[kGateW].transpose() * d_u_pre + P[kCandW].transpose() * d_c_pre).transpose();
        }
    }

    const Eigen::MatrixXd d_enc_pre = d_enc.cwiseProduct((c.enc_pre.array() > 0.0).cast<double>().matrix());
    grads[kEncW] += d_enc_pre.transpose() * sample.features;
    grads[kEncB].col(0) += d_enc_pre.colwise().sum().transpose();
    return l;
}

// --- optimisation ------------------------------------------------------------

struct TrainConfig
{
    double lambda = 1.0; ///< weight of the per-frame coefficient loss
    double learning_rate = 1e-3;
    int epochs = 30;
    int batch_size = 8;
    std::uint64_t seed = 1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adaptive moment estimation with bias correction.
class Adam
{
public:
    Adam(const ParamSet& like, const TrainConfig& cfg) : m_(zeros_like(like)), v_(zeros_like(like)), cfg_(cfg) {}

    void step(ParamSet& params, const ParamSet& grads)
    {
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, double(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, double(t_));
        for (std::size_t i = 0; i < kParamCount; ++i)
        {
            if (params[i].size() == 0)
            {
                continue;
            }
            m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grads[i];
            v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grads[i].cwiseProduct(grads[i]);
            params[i].array() -=
                cfg_.learning_rate * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + cfg_.epsilon);
        }
    }

    long steps() const noexcept { return t_; }

private:
    ParamSet m_, v_;
    TrainConfig cfg_;
    long t_ = 0;
};

struct LossReport
{
    double loss_au = 0.0;
    double loss_alpha = 0.0;
    double loss = 0.0;
    double lambda = 0.0;
    double top1 = 0.0;
    double top3 = 0.0;
    double top5 = 0.0;
    std::size_t samples = 0;
    std::vector<std::size_t> class_correct; ///< top-1 hits per class
    std::vector<std::size_t> class_total;

    /// Top-1 accuracy of class c, or NaN when the class is absent.
    double class_accuracy(std::size_t c) const
    {
        return class_total[c] ? double(class_correct[c]) / double(class_total[c]) : std::nan("");
    }
};

/// Rank of the true class among the logits (0 = best); ties go to the lower class index.
inline std::size_t rank_of(const Eigen::VectorXd& logits, int label)
{
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < logits.size(); ++i)
    {
        if (logits[i] > logits[label] || (logits[i] == logits[label] && i < label))
        {
            ++rank;
        }
    }
    return rank;
}

inline LossReport evaluate(const MultiTaskNet& net, const std::vector<Sample>& samples, double lambda)
{
    LossReport r;
    r.lambda = lambda;
    r.samples = samples.size();
    r.class_correct.assign(std::size_t(net.config.classes), 0);
    r.class_total.assign(std::size_t(net.config.classes), 0);
    if (samples.empty())
    {
        return r;
    }
    std::vector<SampleLoss> losses(samples.size());
    std::vector<std::size_t> ranks(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        const auto out = forward(net, samples[i].features, samples[i].mask);
        losses[i] = loss(out, samples[i].targets, samples[i].mask, samples[i].label, lambda);
        ranks[i] = rank_of(out.logits, samples[i].label);
    });
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        r.loss_au += losses[i].au;
        r.loss_alpha += losses[i].alpha;
        r.top1 += ranks[i] < 1;
        r.top3 += ranks[i] < 3;
        r.top5 += ranks[i] < 5;
        ++r.class_total[std::size_t(samples[i].label)];
        r.class_correct[std::size_t(samples[i].label)] += ranks[i] == 0;
    }
    const double n = double(samples.size());
    r.loss_au /= n;
    r.loss_alpha /= n;
    r.loss = r.loss_au + lambda * r.loss_alpha;
    r.top1 /= n;
    r.top3 /= n;
    r.top5 /= n;
    return r;
}

struct TrainResult
{
    MultiTaskNet net;
    LossReport initial;              ///< training-set report before the first update
    std::vector<LossReport> history; ///< training-set report after each epoch
};

/**
 * Mini-batch training with Adam. Batches are drawn from a seeded shuffle per
 * epoch; gradients are averaged over the batch. A non-finite batch loss aborts
 * with the global batch index.
 */
inline TrainResult train(MultiTaskNet net, const std::vector<Sample>& data, const TrainConfig& cfg,
                         const std::function<void(int, const LossReport&)>& on_epoch = {})
{
    if (!(cfg.lambda >= 0.0) || !(cfg.learning_rate > 0.0) || cfg.batch_size <= 0 || cfg.epochs < 0)
    {
        throw Error(ErrorCode::InvalidArgument, "invalid training configuration");
    }
    if (data.empty())
    {
        throw Error(ErrorCode::InvalidArgument, "training set is empty");
    }
    TrainResult result;
    result.initial = evaluate(net, data, cfg.lambda);
    Adam adam(net.params, cfg);
    Rng rng(mix64(cfg.seed ^ 0x747261696eull));
    std::vector<std::size_t> order(data.size());
    std::size_t batch_id = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch)
    {
        for (std::size_t i = 0; i < order.size(); ++i)
        {
            order[i] = i;
        }
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += std::size_t(cfg.batch_size), ++batch_id)
        {
            const std::size_t end = std::min(order.size(), start + std::size_t(cfg.batch_size));
            ParamSet grads = zeros_like(net.params);
            const double weight = 1.0 / double(end - start);
            double batch_loss = 0.0;
            for (std::size_t b = start; b < end; ++b)
            {
                batch_loss += weight * backward(net, data[order[b]], cfg.lambda, grads, weight).total;
            }
            bool finite = std::isfinite(batch_loss);
            for (const auto& g : grads)
            {
                finite = finite && g.allFinite();
            }
            if (!finite)
            {
                throw Error(ErrorCode::NonFiniteLoss, "non-finite loss or gradient in epoch " + std::to_string(epoch),
                            batch_id);
            }
            adam.step(net.params, grads);
        }
        result.history.push_back(evaluate(net, data, cfg.lambda));
        if (on_epoch)
        {
            on_epoch(epoch, result.history.back());
        }
    }
    result.net = std::move(net);
    return result;
}

// --- coefficient-sequence classifier -------------------------------------------

struct LabeledTrack
{
    crossmodal::CoeffTrack track;
    int label = 0;
    crossmodal::Split split = crossmodal::Split::train;
};

/// A coefficient track as a fixed-length sample: centre crop or edge pad with mask.
inline Sample track_sample(const crossmodal::CoeffTrack& track, int label, std::size_t clip_len)
{
    if (track.empty())
    {
        throw Error(ErrorCode::EmptyTrack, "coefficient track is empty");
    }
    const std::size_t n = track.size();
    Sample s;
    s.label = label;
    s.features.resize(Eigen::Index(clip_len), track.dims());
    s.mask.assign(clip_len, 0);
    const std::size_t start = n > clip_len ? (n - clip_len) / 2 : 0;
    for (std::size_t f = 0; f < clip_len; ++f)
    {
        const std::size_t src = std::min(start + f, n - 1);
        s.features.row(Eigen::Index(f)) = track.values.row(Eigen::Index(src));
        s.mask[f] = start + f < n;
    }
    s.targets = s.features;
    return s;
}

struct CoeffClassifierConfig
{
    NetConfig net{.aggregator = Aggregator::mean_pool};
    TrainConfig train{.epochs = 100};
    std::size_t clip_len = 75;
};

/**
 * Control experiment: the multi-task network fed with coefficient sequences
 * (d = K) instead of event features. Trains on the train split and reports on
 * the test split.
 */
inline LossReport classify_from_coeffs(const std::vector<LabeledTrack>& tracks, CoeffClassifierConfig cfg)
{
    if (tracks.empty())
    {
        throw Error(ErrorCode::InvalidArgument, "no tracks given");
    }
    std::vector<Sample> train_set, test_set;
    for (const auto& t : tracks)
    {
        (t.split == crossmodal::Split::train ? train_set : test_set).push_back(track_sample(t.track, t.label, cfg.clip_len));
    }
    cfg.net.input_dim = int(tracks.front().track.dims());
    cfg.net.outputs = int(tracks.front().track.dims());
    const auto trained = train(make_net(cfg.net, cfg.train.seed), train_set, cfg.train);
    return evaluate(trained.net, test_set, cfg.train.lambda);
}

// --- loss ablation -------------------------------------------------------------

struct AblationRow
{
    double lambda = 0.0;
    std::vector<LossReport> runs; ///< test report per seed
    double top1 = 0.0;            ///< means over seeds
    double top3 = 0.0;
    double top5 = 0.0;
};

/**
 * Trains one network per (lambda, seed) pair from identical initial weights
 * per seed and reports test accuracy. Seeds are 1..seeds.
 */
inline std::vector<AblationRow> ablate(const std::vector<Sample>& train_set, const std::vector<Sample>& test_set,
                                       const NetConfig& net_cfg, TrainConfig cfg, int seeds,
                                       const std::vector<double>& lambdas = {0.0, 1.0})
{
    if (seeds <= 0)
    {
        throw Error(ErrorCode::InvalidArgument, "ablation needs at least one seed");
    }
    std::vector<AblationRow> rows;
    for (const double lambda : lambdas)
    {
        AblationRow row;
        row.lambda = lambda;
        for (int s = 1; s <= seeds; ++s)
        {
            cfg.lambda = lambda;
            cfg.seed = std::uint64_t(s);
            const auto trained = train(make_net(net_cfg, cfg.seed), train_set, cfg);
            row.runs.push_back(evaluate(trained.net, test_set, lambda));
            row.top1 += row.runs.back().top1 / seeds;
            row.top3 += row.runs.back().top3 / seeds;
            row.top5 += row.runs.back().top5 / seeds;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// --- serialisation -------------------------------------------------------------

inline const char* to_string(Aggregator a) { return a == Aggregator::mean_pool ? "mean-pool" : "gated"; }
inline const char* to_string(RegressionWiring w)
{
    return w == RegressionWiring::per_step ? "per-step" : "final-state-broadcast";
}
inline const char* to_string(Normalization n) { return n == Normalization::log1p ? "log1p" : "per-frame-max"; }

inline Aggregator aggregator_from_string(const std::string& s)
{
    if (s == "mean-pool")
        return Aggregator::mean_pool;
    if (s == "gated")
        return Aggregator::gated;
    throw Error(ErrorCode::InvalidArgument, "unknown aggregator '" + s + "'");
}

inline RegressionWiring wiring_from_string(const std::string& s)
{
    if (s == "per-step")
        return RegressionWiring::per_step;
    if (s == "final-state-broadcast")
        return RegressionWiring::final_state_broadcast;
    throw Error(ErrorCode::InvalidArgument, "unknown regression wiring '" + s + "'");
}

inline Normalization normalization_from_string(const std::string& s)
{
    if (s == "log1p")
        return Normalization::log1p;
    if (s == "per-frame-max")
        return Normalization::per_frame_max;
    throw Error(ErrorCode::InvalidArgument, "unknown normalization '" + s + "'");
}

inline nlohmann::ordered_json to_json(const LossReport& r)
{
    nlohmann::ordered_json j;
    j["loss"] = r.loss;
    j["loss_au"] = r.loss_au;
    j["loss_alpha"] = r.loss_alpha;
    j["lambda"] = r.lambda;
    j["top1"] = r.top1;
    j["top3"] = r.top3;
    j["top5"] = r.top5;
    j["samples"] = r.samples;
    nlohmann::ordered_json per_class = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < r.class_total.size(); ++c)
    {
        per_class.push_back({{"class", c}, {"correct", r.class_correct[c]}, {"total", r.class_total[c]}});
    }
    j["per_class"] = per_class;
    return j;
}

inline nlohmann::ordered_json net_config_json(const MultiTaskNet& net)
{
    const auto& c = net.config;
    return {{"input_dim", c.input_dim},
            {"hidden", c.hidden},
            {"head_hidden", c.head_hidden},
            {"outputs", c.outputs},
            {"classes", c.classes},
            {"aggregator", to_string(c.aggregator)},
            {"wiring", to_string(c.wiring)},
            {"features", {{"grid", net.features.grid}, {"normalization", to_string(net.features.normalization)}}}};
}

/**
 * MTNW checkpoint: "MTNW", u32 config length, config JSON, every parameter
 * tensor as column-major f64 in declaration order, CRC-32 of everything after
 * the magic.
 */
inline std::vector<std::uint8_t> encode_net(const MultiTaskNet& net)
{
    const std::string config = net_config_json(net).dump();
    ByteWriter w;
    w.put_magic("MTNW");
    w.put<std::uint32_t>(static_cast<std::uint32_t>(config.size()));
    w.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(config.data()), config.size()));
    for (const auto& t : net.params)
    {
        for (Eigen::Index i = 0; i < t.size(); ++i)
        {
            w.put<double>(t.data()[i]);
        }
    }
    const std::uint32_t crc = crc32(std::span(w.bytes()).subspan(4));
    w.put<std::uint32_t>(crc);
    return w.release();
}

inline MultiTaskNet decode_net(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes);
    r.expect_magic("MTNW");
    verify_crc_trailer(bytes, 4);
    const auto len = r.get<std::uint32_t>();
    const auto text = r.get_bytes(len);
    MultiTaskNet net;
    try
    {
        const auto j = nlohmann::json::parse(text.begin(), text.end());
        auto& c = net.config;
        c.input_dim = j.at("input_dim").get<int>();
        c.hidden = j.at("hidden").get<int>();
        c.head_hidden = j.at("head_hidden").get<int>();
        c.outputs = j.at("outputs").get<int>();
        c.classes = j.at("classes").get<int>();
        c.aggregator = aggregator_from_string(j.at("aggregator").get<std::string>());
        c.wiring = wiring_from_string(j.at("wiring").get<std::string>());
        net.features.grid = j.at("features").at("grid").get<int>();
        net.features.normalization = normalization_from_string(j.at("features").at("normalization").get<std::string>());
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error(ErrorCode::InvalidRecord, std::string("checkpoint config: ") + e.what());
    }
    const auto shapes = parameter_shapes(net.config);
    for (std::size_t p = 0; p < kParamCount; ++p)
    {
        auto& t = net.params[p];
        t.resize(shapes[p].first, shapes[p].second);
        for (Eigen::Index i = 0; i < t.size(); ++i)
        {
            t.data()[i] = r.get<double>();
        }
    }
    if (r.remaining() != 4)
    {
        throw Error(ErrorCode::InvalidRecord, "checkpoint size does not match its configuration");
    }
    return net;
}

inline std::size_t save_net(const MultiTaskNet& net, const std::filesystem::path& path)
{
    return write_file(path, encode_net(net));
}

inline MultiTaskNet load_net(const std::filesystem::path& path) { return decode_net(read_file(path)); }

} // namespace learn
} // namespace morphic

#endif /* MORPHIC_LEARN_HPP_ */
