/*
 * morphic - Cross-modal facial action unit supervision for event cameras.
 *
 * File: include/morphic/synth.hpp
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

#ifndef MORPHIC_SYNTH_HPP_
#define MORPHIC_SYNTH_HPP_

#include "morphic/common.hpp"
#include "morphic/crossmodal.hpp"
#include "morphic/events.hpp"
#include "morphic/fitting.hpp"
#include "morphic/model3dmm.hpp"

#include "Eigen/Core"
#include "Eigen/Geometry"
#include "Eigen/QR"

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace morphic {
namespace synth {

using crossmodal::CoeffTrack;
using fitting::LandmarkSet;
using fitting::OrthoCamera;
using model3dmm::MorphableModel;
using model3dmm::VertexArray;

// --- synthetic face geometry -------------------------------------------------

struct FaceConfig
{
    std::uint32_t vertex_count = 512;
    std::uint32_t identity_components = 8;
    std::uint32_t au_components = 8;
    double au_radius = 0.3; ///< spatial extent of each AU bump, in face units
    std::uint64_t seed = 7;
};

/// Vertices scattered over a dome-shaped face of half-width 1 and half-height 1.3.
inline VertexArray make_face_template(std::uint32_t vertex_count, std::uint64_t seed)
{
    Rng rng(seed);
    VertexArray v(vertex_count, 3);
    for (std::uint32_t i = 0; i < vertex_count; ++i)
    {
        double x, y;
        do
        {
            x = rng.uniform(-1.0, 1.0);
            y = rng.uniform(-1.0, 1.0);
        } while (x * x + y * y > 1.0);
        v(i, 0) = x;
        v(i, 1) = 1.3 * y;
        v(i, 2) = 0.6 * std::sqrt(std::max(0.0, 1.0 - x * x - y * y));
    }
    return v;
}

/**
 * Orthonormal basis (68 x m) of the span of the constant vector, the template
 * landmark coordinates, and any extra landmark columns given.
 */
inline Eigen::MatrixXd landmark_gauge_basis(const model3dmm::LandmarkPoints& landmarks,
                                            const std::vector<Eigen::VectorXd>& extra = {})
{
    Eigen::MatrixXd span(landmarks.rows(), 4 + Eigen::Index(extra.size()));
    span.col(0).setOnes();
    span.middleCols(1, 3) = landmarks;
    for (std::size_t i = 0; i < extra.size(); ++i)
    {
        span.col(4 + Eigen::Index(i)) = extra[i];
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(span);
    return qr.householderQ() * Eigen::MatrixXd::Identity(span.rows(), span.cols());
}

/**
 * Removes from a component the landmark motion an affine camera could absorb:
 * each coordinate column of the landmark displacement is projected onto the
 * orthogonal complement of `gauge`. The column is then renormalised.
 */
inline void remove_affine_landmark_motion(Eigen::Ref<Eigen::VectorXd> component,
                                          const model3dmm::LandmarkIndices& indices, const Eigen::MatrixXd& gauge)
{
    for (int c = 0; c < 3; ++c)
    {
        Eigen::VectorXd col(Eigen::Index(indices.size()));
        for (std::size_t j = 0; j < indices.size(); ++j)
        {
            col[Eigen::Index(j)] = component[3 * Eigen::Index(indices[j]) + c];
        }
        col -= gauge * (gauge.transpose() * col);
        for (std::size_t j = 0; j < indices.size(); ++j)
        {
            component[3 * Eigen::Index(indices[j]) + c] = col[Eigen::Index(j)];
        }
    }
    component.normalize();
}

/// Landmark-vertex coordinate columns (x, y, z) of every component.
inline std::vector<Eigen::VectorXd> landmark_columns(const Eigen::MatrixXd& components,
                                                     const model3dmm::LandmarkIndices& indices)
{
    std::vector<Eigen::VectorXd> out;
    for (Eigen::Index k = 0; k < components.cols(); ++k)
    {
        for (int c = 0; c < 3; ++c)
        {
            Eigen::VectorXd col(Eigen::Index(indices.size()));
            for (std::size_t j = 0; j < indices.size(); ++j)
            {
                col[Eigen::Index(j)] = components(3 * Eigen::Index(indices[j]) + c, k);
            }
            out.push_back(std::move(col));
        }
    }
    return out;
}

struct SyntheticFace
{
    MorphableModel identity;
    MorphableModel au;
};

/**
 * Ground-truth identity and AU models for the synthetic corpus.
 *
 * Identity components are smooth cubic displacement fields; AU components are
 * localised Gaussian bumps. Landmark motion of identity components is kept
 * orthogonal to the affine span of the template landmarks, and AU components
 * orthogonal to that span plus every identity direction, so that per-frame
 * affine camera estimation never absorbs deformation.
 */
inline SyntheticFace make_synthetic_face(const FaceConfig& cfg)
{
    Rng rng(mix64(cfg.seed));
    const VertexArray tmpl = make_face_template(cfg.vertex_count, mix64(cfg.seed + 1));
    const auto indices = model3dmm::default_landmark_indices(cfg.vertex_count);
    const auto lm = model3dmm::landmark_positions(tmpl, indices);
    const Eigen::Index n3 = 3 * Eigen::Index(cfg.vertex_count);

    Eigen::MatrixXd id_comp(n3, cfg.identity_components);
    const Eigen::MatrixXd id_gauge = landmark_gauge_basis(lm);
    for (Eigen::Index k = 0; k < id_comp.cols(); ++k)
    {
        double w[3][10];
        for (auto& row : w)
        {
            for (double& x : row)
            {
                x = rng.normal();
            }
        }
        for (std::uint32_t v = 0; v < cfg.vertex_count; ++v)
        {
            const double x = tmpl(v, 0), y = tmpl(v, 1);
            const double mono[10] = {1, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y};
            for (int c = 0; c < 3; ++c)
            {
                double s = 0.0;
                for (int m = 0; m < 10; ++m)
                {
                    s += w[c][m] * mono[m];
                }
                id_comp(3 * v + c, k) = s;
            }
        }
        remove_affine_landmark_motion(id_comp.col(k), indices, id_gauge);
    }

    Eigen::MatrixXd au_comp(n3, cfg.au_components);
    const Eigen::MatrixXd au_gauge = landmark_gauge_basis(lm, landmark_columns(id_comp, indices));
    for (Eigen::Index k = 0; k < au_comp.cols(); ++k)
    {
        // Bump centres cycle through landmark vertices spread over the face.
        const std::uint32_t centre = indices[std::size_t((k * 29 + 5) % Eigen::Index(indices.size()))];
        Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal() * 0.5);
        dir.normalize();
        const Eigen::RowVector3d c = tmpl.row(centre);
        for (std::uint32_t v = 0; v < cfg.vertex_count; ++v)
        {
            const double d2 = (tmpl.row(v) - c).squaredNorm();
            const double w = std::exp(-d2 / (2.0 * cfg.au_radius * cfg.au_radius));
            au_comp.block<3, 1>(3 * Eigen::Index(v), k) = w * dir;
        }
        remove_affine_landmark_motion(au_comp.col(k), indices, au_gauge);
    }

    const Eigen::VectorXd flat = model3dmm::flatten(tmpl);
    return SyntheticFace{MorphableModel(flat, id_comp, model3dmm::ComponentKind::identity, indices),
                         MorphableModel(flat, au_comp, model3dmm::ComponentKind::action_unit, indices)};
}

/**
 * A random model with arbitrary smooth components, gauge-fixed against the
 * template landmarks (used for fitting tests that need a fresh model per trial).
 */
inline MorphableModel make_random_model(std::uint32_t vertex_count, std::uint32_t k, model3dmm::ComponentKind kind,
                                        std::uint64_t seed)
{
    FaceConfig cfg;
    cfg.vertex_count = vertex_count;
    cfg.identity_components = k;
    cfg.au_components = 1;
    cfg.seed = seed;
    const auto face = make_synthetic_face(cfg);
    return MorphableModel(face.identity.template_vertices(), face.identity.components(), kind,
                          face.identity.landmark_indices());
}

/**
 * Scaled-rotation orthographic camera with image y pointing down.
 */
inline OrthoCamera make_camera(double scale, double yaw, double pitch, double roll, Eigen::Vector2d translation)
{
    const Eigen::Matrix3d r = (Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()) *
                               Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()) *
                               Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()))
                                  .toRotationMatrix();
    OrthoCamera cam;
    cam.A.row(0) = scale * r.row(0);
    cam.A.row(1) = -scale * r.row(1);
    cam.t = translation;
    return cam;
}

// --- trajectories ------------------------------------------------------------

struct TrajectoryConfig
{
    double rate_hz = 30.0;
    double duration_s = 2.5;
    double amplitude_min = 1.0;
    double amplitude_max = 2.0;
    double onset_min = 0.5;
    double onset_max = 1.2;
    double width_min = 0.3;
    double width_max = 0.5;
    std::uint32_t components = 8;
    std::uint64_t start_us = 0;
};

/**
 * A single-AU activation: a Gaussian bump a * exp(-((t - o - w/2) / (w/4))^2)
 * on the class's component, zero on all others.
 */
struct Trajectory
{
    int au_class = 0;
    std::uint32_t component = 0;
    std::uint32_t components = 0;
    double amplitude = 0.0;
    double onset = 0.0; ///< seconds
    double width = 0.0; ///< seconds
    double rate_hz = 30.0;
    double duration_s = 0.0;
    std::uint64_t start_us = 0;
    std::uint64_t seed = 0;

    double value(double t_s) const
    {
        const double u = (t_s - onset - 0.5 * width) / (0.25 * width);
        return amplitude * std::exp(-u * u);
    }

    Eigen::VectorXd alpha(double t_s) const
    {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(components);
        a[component] = value(t_s);
        return a;
    }

    /// Samples at the given microsecond timestamps (relative to start_us).
    CoeffTrack sample(const std::vector<std::uint64_t>& times) const
    {
        CoeffTrack track;
        track.source = crossmodal::TrackSource::synthetic;
        track.times = times;
        track.values.resize(Eigen::Index(times.size()), components);
        for (std::size_t i = 0; i < times.size(); ++i)
        {
            track.values.row(Eigen::Index(i)) = alpha(double(times[i] - start_us) * 1e-6).transpose();
        }
        return track;
    }

    /// Timestamps k / rate for k = 0 .. floor(duration * rate), in microseconds.
    std::vector<std::uint64_t> sample_times(double rate) const
    {
        std::vector<std::uint64_t> times;
        const auto n = static_cast<std::size_t>(std::floor(duration_s * rate + 1e-9));
        for (std::size_t k = 0; k <= n; ++k)
        {
            times.push_back(start_us + static_cast<std::uint64_t>(std::llround(double(k) * 1e6 / rate)));
        }
        return times;
    }
};

inline std::uint32_t component_for_class(int au_class, std::uint32_t components)
{
    return static_cast<std::uint32_t>(au_class) % components;
}

struct TrajectorySample
{
    Trajectory trajectory;
    CoeffTrack track;
};

/// Deterministic per seed; the track is sampled at cfg.rate_hz.
inline TrajectorySample make_trajectory(int au_class, const TrajectoryConfig& cfg, std::uint64_t seed)
{
    if (au_class < 0 || au_class >= crossmodal::kAuClassCount || cfg.components == 0)
    {
        throw Error(ErrorCode::BadLabel, "AU class must lie in [0, 24)");
    }
    Rng rng(mix64(seed ^ 0x7472616aull));
    Trajectory tr;
    tr.au_class = au_class;
    tr.components = cfg.components;
    tr.component = component_for_class(au_class, cfg.components);
    tr.amplitude = rng.uniform(cfg.amplitude_min, cfg.amplitude_max);
    tr.onset = rng.uniform(cfg.onset_min, cfg.onset_max);
    tr.width = rng.uniform(cfg.width_min, cfg.width_max);
    tr.rate_hz = cfg.rate_hz;
    tr.duration_s = cfg.duration_s;
    tr.start_us = cfg.start_us;
    tr.seed = seed;
    TrajectorySample out{tr, tr.sample(tr.sample_times(cfg.rate_hz))};
    return out;
}

// --- rendering ---------------------------------------------------------------

/**
 * Projects the model's landmarks for every track entry:
 * l_j(t) = A(t) * S(alpha(t))_j + t2(t), with S = base + C * alpha. The base
 * defaults to the model template. One camera applies to all frames; otherwise
 * one camera per entry. Optional Gaussian pixel noise.
 */
inline std::vector<LandmarkSet> render_landmarks(const CoeffTrack& track, const MorphableModel& model,
                                                 const std::vector<OrthoCamera>& cameras,
                                                 const std::optional<VertexArray>& base = std::nullopt,
                                                 double noise_sigma = 0.0, std::uint64_t noise_seed = 0)
{
    if (track.dims() != Eigen::Index(model.component_count()))
    {
        throw Error(ErrorCode::DimensionMismatch, "track and model disagree on K");
    }
    if (cameras.size() != 1 && cameras.size() != track.size())
    {
        throw Error(ErrorCode::DimensionMismatch, "need one camera or one per track entry");
    }
    const VertexArray shape0 = base ? *base : model.template_array();
    if (shape0.rows() != Eigen::Index(model.vertex_count()))
    {
        throw Error(ErrorCode::DimensionMismatch, "base shape does not match the model");
    }
    const auto& idx = model.landmark_indices();
    const auto base_lm = model3dmm::landmark_positions(shape0, idx);
    Rng rng(noise_seed);
    std::vector<LandmarkSet> out(track.size());
    for (std::size_t f = 0; f < track.size(); ++f)
    {
        const OrthoCamera& cam = cameras.size() == 1 ? cameras[0] : cameras[f];
        const Eigen::VectorXd alpha = track.values.row(Eigen::Index(f)).transpose();
        LandmarkSet& set = out[f];
        set.frame_time = track.times[f];
        for (int j = 0; j < fitting::kLandmarks; ++j)
        {
            Eigen::Vector3d p = base_lm.row(j).transpose();
            for (Eigen::Index k = 0; k < alpha.size(); ++k)
            {
                p += alpha[k] * model.component_at(k, idx[std::size_t(j)]);
            }
            set.points.row(j) = cam.project(p).transpose();
            if (noise_sigma > 0.0)
            {
                set.points(j, 0) += noise_sigma * rng.normal();
                set.points(j, 1) += noise_sigma * rng.normal();
            }
        }
    }
    return out;
}

struct SimConfig
{
    double threshold = 0.25; ///< log-intensity contrast threshold
    std::uint16_t width = 64;
    std::uint16_t height = 64;
    double splat_sigma = 1.5;      ///< pixels
    double render_rate_hz = 120.0; ///< intensity frames per second fed to the simulator
    std::uint64_t refractory_us = 100;
    double log_floor = 1e-3;
};

/// Grayscale image, rows = y, cols = x, values in [0, 1].
using Image = Eigen::MatrixXd;

/**
 * Sum of unit-peak Gaussian splats at the landmark positions on a black
 * background, clamped to [0, 1].
 */
inline Image render_intensity_frame(const LandmarkSet& landmarks, const SimConfig& cfg)
{
    Image img = Image::Zero(cfg.height, cfg.width);
    const double s = cfg.splat_sigma;
    const int reach = static_cast<int>(std::ceil(5.0 * s));
    for (int j = 0; j < fitting::kLandmarks; ++j)
    {
        const double px = landmarks.points(j, 0);
        const double py = landmarks.points(j, 1);
        const int x0 = std::max(0, static_cast<int>(std::floor(px)) - reach);
        const int x1 = std::min(int(cfg.width) - 1, static_cast<int>(std::floor(px)) + reach);
        const int y0 = std::max(0, static_cast<int>(std::floor(py)) - reach);
        const int y1 = std::min(int(cfg.height) - 1, static_cast<int>(std::floor(py)) + reach);
        for (int y = y0; y <= y1; ++y)
        {
            for (int x = x0; x <= x1; ++x)
            {
                const double d2 = (x - px) * (x - px) + (y - py) * (y - py);
                img(y, x) += std::exp(-d2 / (2.0 * s * s));
            }
        }
    }
    return img.cwiseMin(1.0);
}

inline std::vector<Image> render_intensity(const std::vector<LandmarkSet>& landmarks, const SimConfig& cfg)
{
    std::vector<Image> out;
    out.reserve(landmarks.size());
    for (const auto& set : landmarks)
    {
        out.push_back(render_intensity_frame(set, cfg));
    }
    return out;
}

/**
 * Contrast-threshold event simulation.
 *
 * Each pixel keeps a reference log intensity. Between consecutive frames the
 * log intensity is interpolated linearly; every full threshold crossing emits
 * one event at the interpolated crossing time (rounded to the microsecond) and
 * moves the reference by one threshold. Events inside the refractory period
 * after the pixel's previous event are suppressed, but the reference still
 * moves. Output is sorted by time, ties in (y, x) order.
 */
inline std::vector<events::Event> simulate_events(const std::vector<Image>& frames,
                                                  const std::vector<std::uint64_t>& timestamps, const SimConfig& cfg)
{
    if (!(cfg.threshold > 0.0))
    {
        throw Error(ErrorCode::InvalidArgument, "contrast threshold must be positive");
    }
    if (frames.size() != timestamps.size())
    {
        throw Error(ErrorCode::DimensionMismatch, "one timestamp per frame required");
    }
    for (std::size_t i = 0; i < frames.size(); ++i)
    {
        if (frames[i].rows() != frames[0].rows() || frames[i].cols() != frames[0].cols())
        {
            throw Error(ErrorCode::DimensionMismatch, "frames must share dimensions", i);
        }
        if (i > 0 && timestamps[i] <= timestamps[i - 1])
        {
            throw Error(ErrorCode::NonMonotonicTimestamp, "frame timestamps must be strictly increasing", i);
        }
    }
    std::vector<events::Event> out;
    if (frames.size() < 2)
    {
        return out;
    }
    const Eigen::Index h = frames[0].rows();
    const Eigen::Index w = frames[0].cols();
    const double theta = cfg.threshold;
    constexpr double tolerance = 1e-9;
    auto log_i = [&](double v) { return std::log(std::max(v, cfg.log_floor)); };

    for (Eigen::Index y = 0; y < h; ++y)
    {
        for (Eigen::Index x = 0; x < w; ++x)
        {
            double ref = log_i(frames[0](y, x));
            std::optional<std::uint64_t> last;
            for (std::size_t f = 1; f < frames.size(); ++f)
            {
                const double la = log_i(frames[f - 1](y, x));
                const double lb = log_i(frames[f](y, x));
                const double ta = double(timestamps[f - 1]);
                const double span = double(timestamps[f] - timestamps[f - 1]);
                for (;;)
                {
                    int sign = 0;
                    if (lb - ref >= theta - tolerance)
                    {
                        sign = 1;
                    }
                    else if (ref - lb >= theta - tolerance)
                    {
                        sign = -1;
                    }
                    if (sign == 0)
                    {
                        break;
                    }
                    const double level = ref + sign * theta;
                    const double s = std::clamp((level - la) / (lb - la), 0.0, 1.0);
                    const auto t = static_cast<std::uint64_t>(std::llround(ta + s * span));
                    ref = level;
                    if (last && t < *last + cfg.refractory_us)
                    {
                        continue;
                    }
                    last = t;
                    out.push_back(events::Event{t, static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y),
                                                static_cast<std::uint8_t>(sign > 0 ? 1 : 0)});
                }
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const events::Event& a, const events::Event& b) { return a.t < b.t; });
    return out;
}

// --- corpus ------------------------------------------------------------------

struct CorpusConfig
{
    std::uint32_t subjects = 4;
    std::uint32_t classes = 8;
    std::uint32_t videos_per_class = 2;
    std::uint64_t seed = 1;
    FaceConfig face;
    TrajectoryConfig trajectory;
    SimConfig sim;
    double identity_sigma = 1.0;  ///< std of identity coefficients
    double apex_amplitude = 1.5;  ///< AU amplitude of the expressive scans
    double camera_scale = 18.0;   ///< pixels per face unit
    double pose_jitter_deg = 8.0; ///< max |yaw|, |pitch|, |roll|
    double shift_jitter_px = 2.0;
    double landmark_noise_px = 0.0;
    double test_fraction = 0.2;
    crossmodal::SplitMode split_mode = crossmodal::SplitMode::by_video;
};

struct CorpusStats
{
    std::size_t videos = 0;
    std::size_t events = 0;
    double min_class_separation = 0.0; ///< min distance between per-class mean coefficient vectors
};

struct Corpus
{
    crossmodal::Manifest manifest;
    SyntheticFace face;
    CorpusStats stats;
};

namespace detail {

template <typename E>
E enum_from(const nlohmann::json& j, std::initializer_list<std::pair<const char*, E>> table)
{
    const auto s = j.get<std::string>();
    for (const auto& [name, value] : table)
    {
        if (s == name)
        {
            return value;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown value '" + s + "'");
}

/// Assigns j[key] to field if present; rejects unknown keys.
class StrictReader
{
public:
    explicit StrictReader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where))
    {
        if (!j_.is_object())
        {
            throw Error(ErrorCode::InvalidArgument, where_ + " must be a JSON object");
        }
    }

    template <typename T>
    StrictReader& read(const char* key, T& field)
    {
        seen_.insert(key);
        if (j_.contains(key))
        {
            try
            {
                field = j_[key].get<T>();
            }
            catch (const nlohmann::json::exception& e)
            {
                throw Error(ErrorCode::InvalidArgument, where_ + "." + key + ": " + e.what());
            }
        }
        return *this;
    }

    const nlohmann::json* child(const char* key)
    {
        seen_.insert(key);
        return j_.contains(key) ? &j_[key] : nullptr;
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
        {
            if (!seen_.count(it.key()))
            {
                throw Error(ErrorCode::InvalidArgument, "unknown key '" + where_ + "." + it.key() + "'");
            }
        }
    }

private:
    const nlohmann::json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

} // namespace detail

inline nlohmann::ordered_json to_json(const CorpusConfig& c)
{
    nlohmann::ordered_json j;
    j["subjects"] = c.subjects;
    j["classes"] = c.classes;
    j["videos_per_class"] = c.videos_per_class;
    j["seed"] = c.seed;
    j["face"] = {{"vertex_count", c.face.vertex_count},
                 {"identity_components", c.face.identity_components},
                 {"au_components", c.face.au_components},
                 {"au_radius", c.face.au_radius},
                 {"seed", c.face.seed}};
    j["trajectory"] = {{"rate_hz", c.trajectory.rate_hz},         {"duration_s", c.trajectory.duration_s},
                       {"amplitude_min", c.trajectory.amplitude_min}, {"amplitude_max", c.trajectory.amplitude_max},
                       {"onset_min", c.trajectory.onset_min},     {"onset_max", c.trajectory.onset_max},
                       {"width_min", c.trajectory.width_min},     {"width_max", c.trajectory.width_max}};
    j["sim"] = {{"threshold", c.sim.threshold},
                {"width", c.sim.width},
                {"height", c.sim.height},
                {"splat_sigma", c.sim.splat_sigma},
                {"render_rate_hz", c.sim.render_rate_hz},
                {"refractory_us", c.sim.refractory_us},
                {"log_floor", c.sim.log_floor}};
    j["identity_sigma"] = c.identity_sigma;
    j["apex_amplitude"] = c.apex_amplitude;
    j["camera_scale"] = c.camera_scale;
    j["pose_jitter_deg"] = c.pose_jitter_deg;
    j["shift_jitter_px"] = c.shift_jitter_px;
    j["landmark_noise_px"] = c.landmark_noise_px;
    j["test_fraction"] = c.test_fraction;
    j["split_mode"] = c.split_mode == crossmodal::SplitMode::by_video ? "by-video" : "by-subject";
    return j;
}

/// Strict parse: unknown keys are errors, missing keys keep their defaults.
inline CorpusConfig corpus_config_from_json(const nlohmann::json& j, CorpusConfig c = {})
{
    detail::StrictReader r(j, "corpus");
    r.read("subjects", c.subjects).read("classes", c.classes).read("videos_per_class", c.videos_per_class);
    r.read("seed", c.seed).read("identity_sigma", c.identity_sigma).read("apex_amplitude", c.apex_amplitude);
    r.read("camera_scale", c.camera_scale).read("pose_jitter_deg", c.pose_jitter_deg);
    r.read("shift_jitter_px", c.shift_jitter_px).read("landmark_noise_px", c.landmark_noise_px);
    r.read("test_fraction", c.test_fraction);
    if (const auto* s = r.child("split_mode"))
    {
        c.split_mode = detail::enum_from<crossmodal::SplitMode>(
            *s, {{"by-video", crossmodal::SplitMode::by_video}, {"by-subject", crossmodal::SplitMode::by_subject}});
    }
    if (const auto* f = r.child("face"))
    {
        detail::StrictReader fr(*f, "corpus.face");
        fr.read("vertex_count", c.face.vertex_count).read("identity_components", c.face.identity_components);
        fr.read("au_components", c.face.au_components).read("au_radius", c.face.au_radius).read("seed", c.face.seed);
        fr.finish();
    }
    if (const auto* t = r.child("trajectory"))
    {
        detail::StrictReader tr(*t, "corpus.trajectory");
        tr.read("rate_hz", c.trajectory.rate_hz).read("duration_s", c.trajectory.duration_s);
        tr.read("amplitude_min", c.trajectory.amplitude_min).read("amplitude_max", c.trajectory.amplitude_max);
        tr.read("onset_min", c.trajectory.onset_min).read("onset_max", c.trajectory.onset_max);
        tr.read("width_min", c.trajectory.width_min).read("width_max", c.trajectory.width_max);
        tr.finish();
    }
    if (const auto* s = r.child("sim"))
    {
        detail::StrictReader sr(*s, "corpus.sim");
        sr.read("threshold", c.sim.threshold).read("width", c.sim.width).read("height", c.sim.height);
        sr.read("splat_sigma", c.sim.splat_sigma).read("render_rate_hz", c.sim.render_rate_hz);
        sr.read("refractory_us", c.sim.refractory_us).read("log_floor", c.sim.log_floor);
        sr.finish();
    }
    r.finish();
    return c;
}

/**
 * Writes a fully synthetic corpus to `dir`:
 *   identity.m3dm, au.m3dm   ground-truth generator models
 *   meshes.mtab              neutral + apex scans per subject
 *   <video>.evt/.atrk/.landmarks.json per video
 *   manifest.jsonl, corpus.json
 * Output is a pure function of the config.
 */
inline Corpus generate_corpus(const CorpusConfig& cfg, const std::filesystem::path& dir)
{
    if (cfg.classes == 0 || cfg.classes > std::uint32_t(crossmodal::kAuClassCount) || cfg.subjects == 0 ||
        cfg.videos_per_class == 0)
    {
        throw Error(ErrorCode::InvalidArgument, "corpus needs 1..24 classes, subjects and videos per class");
    }
    std::filesystem::create_directories(dir);
    Corpus corpus;
    FaceConfig face_cfg = cfg.face;
    corpus.face = make_synthetic_face(face_cfg);
    const auto& id_model = corpus.face.identity;
    const auto& au_model = corpus.face.au;
    model3dmm::save_model(id_model, dir / "identity.m3dm");
    model3dmm::save_model(au_model, dir / "au.m3dm");

    // Identity coefficients, centred across subjects so the neutral mean is the template.
    Rng rng(mix64(cfg.seed));
    Eigen::MatrixXd id_alpha(id_model.component_count(), cfg.subjects);
    for (Eigen::Index s = 0; s < id_alpha.cols(); ++s)
    {
        for (Eigen::Index k = 0; k < id_alpha.rows(); ++k)
        {
            id_alpha(k, s) = cfg.identity_sigma * rng.normal();
        }
    }
    if (cfg.subjects > 1)
    {
        id_alpha = id_alpha.colwise() - id_alpha.rowwise().mean();
    }
    else
    {
        id_alpha.setZero();
    }
    std::vector<VertexArray> identity_shapes;
    model3dmm::MeshTable meshes;
    meshes.vertex_count = id_model.vertex_count();
    for (std::uint32_t s = 0; s < cfg.subjects; ++s)
    {
        identity_shapes.push_back(model3dmm::synthesize(id_model, {id_alpha.col(s), model3dmm::ComponentKind::identity}));
        meshes.add({s, model3dmm::kNeutralTag, model3dmm::flatten(identity_shapes.back())});
        for (std::uint32_t c = 0; c < cfg.classes; ++c)
        {
            const auto comp = component_for_class(int(c), au_model.component_count());
            meshes.add({s, static_cast<std::uint16_t>(c + 1),
                        model3dmm::flatten(identity_shapes.back()) + cfg.apex_amplitude * au_model.components().col(comp)});
        }
    }
    model3dmm::save_mesh_table(meshes, dir / "meshes.mtab");

    struct VideoSpec
    {
        std::uint32_t subject, au_class, repeat;
        std::string id;
    };
    std::vector<VideoSpec> videos;
    for (std::uint32_t s = 0; s < cfg.subjects; ++s)
    {
        for (std::uint32_t c = 0; c < cfg.classes; ++c)
        {
            for (std::uint32_t r = 0; r < cfg.videos_per_class; ++r)
            {
                char name[64];
                std::snprintf(name, sizeof(name), "s%02u_c%02u_r%u", s, c, r);
                videos.push_back({s, c, r, name});
            }
        }
    }

    TrajectoryConfig traj_cfg = cfg.trajectory;
    traj_cfg.components = au_model.component_count();
    std::vector<std::size_t> event_counts(videos.size());
    std::vector<Eigen::VectorXd> mean_alpha(videos.size());
    parallel_for(videos.size(), [&](std::size_t v) {
        const auto& spec = videos[v];
        const std::uint64_t vseed = mix64(cfg.seed * 1000003ull + v);
        const auto sample = make_trajectory(int(spec.au_class), traj_cfg, vseed);
        Rng cam_rng(mix64(vseed + 17));
        const double jitter = cfg.pose_jitter_deg * M_PI / 180.0;
        const OrthoCamera cam = make_camera(
            cfg.camera_scale, cam_rng.uniform(-jitter, jitter), cam_rng.uniform(-jitter, jitter),
            cam_rng.uniform(-jitter, jitter),
            Eigen::Vector2d(0.5 * cfg.sim.width + cam_rng.uniform(-cfg.shift_jitter_px, cfg.shift_jitter_px),
                            0.5 * cfg.sim.height + cam_rng.uniform(-cfg.shift_jitter_px, cfg.shift_jitter_px)));
        const VertexArray& base = identity_shapes[spec.subject];

        const auto landmarks =
            render_landmarks(sample.track, au_model, {cam}, base, cfg.landmark_noise_px, mix64(vseed + 29));
        crossmodal::save_track(sample.track, dir / (spec.id + ".atrk"));
        fitting::save_landmarks_json(landmarks, dir / (spec.id + ".landmarks.json"));

        const auto render_times = sample.trajectory.sample_times(cfg.sim.render_rate_hz);
        const auto fine_track = sample.trajectory.sample(render_times);
        const auto fine_landmarks = render_landmarks(fine_track, au_model, {cam}, base);
        const auto evs = simulate_events(render_intensity(fine_landmarks, cfg.sim), render_times, cfg.sim);
        events::write_event_stream(evs, {cfg.sim.width, cfg.sim.height}, dir / (spec.id + ".evt"));
        event_counts[v] = evs.size();
        mean_alpha[v] = sample.track.values.colwise().mean().transpose();
    });

    for (std::size_t v = 0; v < videos.size(); ++v)
    {
        crossmodal::ManifestRecord rec;
        rec.video = videos[v].id;
        rec.events = dir / (videos[v].id + ".evt");
        rec.coeffs = dir / (videos[v].id + ".atrk");
        rec.landmarks = dir / (videos[v].id + ".landmarks.json");
        rec.au = int(videos[v].au_class);
        rec.subject = videos[v].subject;
        corpus.manifest.records.push_back(std::move(rec));
        corpus.stats.events += event_counts[v];
    }
    crossmodal::assign_splits(corpus.manifest, cfg.split_mode, cfg.seed, cfg.test_fraction);
    write_text_file(dir / "manifest.jsonl", crossmodal::format_manifest(corpus.manifest, dir));

    // Separability precondition: per-class mean coefficient vectors must differ.
    std::vector<Eigen::VectorXd> class_mean(cfg.classes, Eigen::VectorXd::Zero(au_model.component_count()));
    std::vector<int> class_count(cfg.classes, 0);
    for (std::size_t v = 0; v < videos.size(); ++v)
    {
        class_mean[videos[v].au_class] += mean_alpha[v];
        ++class_count[videos[v].au_class];
    }
    double separation = std::numeric_limits<double>::infinity();
    for (std::uint32_t a = 0; a < cfg.classes; ++a)
    {
        for (std::uint32_t b = a + 1; b < cfg.classes; ++b)
        {
            separation = std::min(separation, (class_mean[a] / class_count[a] - class_mean[b] / class_count[b]).norm());
        }
    }
    corpus.stats.videos = videos.size();
    corpus.stats.min_class_separation = cfg.classes > 1 ? separation : 0.0;
    if (cfg.classes > 1 && !(separation > 1e-6) && cfg.trajectory.amplitude_max > 0.0)
    {
        throw Error(ErrorCode::InvalidArgument,
                    "generated classes are not separable in coefficient space; use more AU components than classes");
    }
    auto meta = to_json(cfg);
    meta["stats"] = {{"videos", corpus.stats.videos},
                     {"events", corpus.stats.events},
                     {"min_class_separation", corpus.stats.min_class_separation}};
    write_text_file(dir / "corpus.json", meta.dump(2) + "\n");
    return corpus;
}

} // namespace synth
} // namespace morphic

#endif /* MORPHIC_SYNTH_HPP_ */
