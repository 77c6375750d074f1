/*
 * morphic - Cross-modal facial action unit supervision for event cameras.
 *
 * File: include/morphic/fitting.hpp
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

#ifndef MORPHIC_FITTING_HPP_
#define MORPHIC_FITTING_HPP_

#include "morphic/common.hpp"
#include "morphic/model3dmm.hpp"

#include "Eigen/Cholesky"
#include "Eigen/Core"
#include "Eigen/QR"
#include "Eigen/SVD"

#include "json.hpp"

#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace morphic {
namespace fitting {

using model3dmm::kLandmarkCount;
using model3dmm::LandmarkPoints;
using model3dmm::MorphableModel;
using model3dmm::VertexArray;

inline constexpr int kLandmarks = static_cast<int>(kLandmarkCount);

/**
 * 68 detected landmarks of one video frame, in pixels. The optional depth
 * column carries the detector's approximate z.
 */
struct LandmarkSet
{
    Eigen::Matrix<double, kLandmarks, 2> points = Eigen::Matrix<double, kLandmarks, 2>::Zero();
    std::optional<Eigen::Matrix<double, kLandmarks, 1>> depth;
    std::uint64_t frame_time = 0; ///< microseconds

    bool finite() const { return points.allFinite() && (!depth || depth->allFinite()); }
};

/**
 * Affine orthographic camera x = A * X + t. When depth fitting is enabled the
 * camera also carries a depth row z = depth_row * X + depth_offset.
 */
struct OrthoCamera
{
    Eigen::Matrix<double, 2, 3> A = Eigen::Matrix<double, 2, 3>::Identity();
    Eigen::Vector2d t = Eigen::Vector2d::Zero();
    std::optional<Eigen::RowVector3d> depth_row;
    double depth_offset = 0.0;

    Eigen::Vector2d project(const Eigen::Vector3d& p) const { return A * p + t; }

    friend bool operator==(const OrthoCamera& a, const OrthoCamera& b)
    {
        return a.A == b.A && a.t == b.t && a.depth_row == b.depth_row && a.depth_offset == b.depth_offset;
    }
};

struct FitConfig
{
    double lambda_reg = 0.01;
    bool use_depth = false;
    double depth_weight = 1.0;
    double min_scale = 1e-8;
    /// fit_au_sequence: mark failing frames invalid instead of aborting.
    bool skip_failed = false;
};

struct FitResult
{
    model3dmm::Coefficients coeffs;
    OrthoCamera camera;
    double rms_residual = 0.0;       ///< pixels, after applying the coefficients
    double condition_estimate = 0.0; ///< from the Cholesky factor of the ridge system
    bool valid = true;
    std::string error;
};

/**
 * Least-squares affine camera from 2D-3D landmark correspondences.
 *
 * Both point sets are mean-centred; A is the least-squares solution of
 * A * Lc^T ~ lc^T (equivalently A = lc^T * pinv(Lc^T)) and the translation
 * maps the 3D centroid onto the 2D centroid.
 */
inline OrthoCamera estimate_camera(const LandmarkSet& landmarks, const LandmarkPoints& model_points,
                                   double min_scale = 1e-8, bool use_depth = false)
{
    if (!landmarks.finite() || !model_points.allFinite())
    {
        throw Error(ErrorCode::InvalidArgument, "landmarks must be finite");
    }
    const Eigen::RowVector3d model_mean = model_points.colwise().mean();
    const Eigen::RowVector2d image_mean = landmarks.points.colwise().mean();
    const Eigen::Matrix<double, kLandmarks, 3> centered_model = model_points.rowwise() - model_mean;
    const Eigen::Matrix<double, kLandmarks, 2> centered_image = landmarks.points.rowwise() - image_mean;

    Eigen::JacobiSVD<Eigen::Matrix<double, kLandmarks, 3>> geometry(centered_model);
    const auto& sv = geometry.singularValues();
    if (!(sv[0] > 0.0) || sv[2] <= 1e-10 * sv[0])
    {
        throw Error(ErrorCode::DegenerateLandmarks, "centred model landmarks do not span three dimensions");
    }
    const auto qr = centered_model.colPivHouseholderQr();
    OrthoCamera cam;
    cam.A = qr.solve(centered_image).transpose();
    const double scale = Eigen::JacobiSVD<Eigen::Matrix<double, 2, 3>>(cam.A).singularValues()[0];
    if (!(scale >= min_scale))
    {
        throw Error(ErrorCode::ScaleBelowMin, "camera scale " + std::to_string(scale) + " below minimum");
    }
    cam.t = image_mean.transpose() - cam.A * model_mean.transpose();
    if (use_depth && landmarks.depth)
    {
        const double depth_mean = landmarks.depth->mean();
        const Eigen::Matrix<double, kLandmarks, 1> centered_depth = landmarks.depth->array() - depth_mean;
        const Eigen::RowVector3d row = qr.solve(centered_depth).transpose();
        cam.depth_row = row;
        cam.depth_offset = depth_mean - row.dot(model_mean);
    }
    return cam;
}

/**
 * Closed-form ridge fit of deformation coefficients.
 *
 * The residual between the landmarks and the projected base shape is regressed
 * onto the projected components at the landmark vertices:
 * alpha = (M^T M + lambda I)^-1 M^T r, solved by Cholesky.
 */
inline FitResult fit_coefficients(const LandmarkSet& landmarks, const VertexArray& base_shape,
                                  const MorphableModel& model, const OrthoCamera& cam, const FitConfig& cfg)
{
    if (base_shape.rows() != Eigen::Index(model.vertex_count()))
    {
        throw Error(ErrorCode::DimensionMismatch, "base shape vertex count does not match the model");
    }
    if (!(cfg.lambda_reg >= 0.0))
    {
        throw Error(ErrorCode::InvalidArgument, "lambda_reg must be nonnegative");
    }
    if (!landmarks.finite() || !cam.A.allFinite() || !cam.t.allFinite() || cam.A.norm() == 0.0)
    {
        throw Error(ErrorCode::InvalidArgument, "landmarks and camera must be finite and nondegenerate");
    }
    const bool depth = cfg.use_depth && landmarks.depth && cam.depth_row;
    const Eigen::Index k = model.component_count();
    const Eigen::Index rows = 2 * kLandmarks + (depth ? kLandmarks : 0);
    const auto& indices = model.landmark_indices();

    Eigen::MatrixXd design(rows, k);
    Eigen::VectorXd residual(rows);
    for (int j = 0; j < kLandmarks; ++j)
    {
        const Eigen::Vector3d b = base_shape.row(indices[std::size_t(j)]).transpose();
        residual.segment<2>(2 * j) = landmarks.points.row(j).transpose() - cam.project(b);
        for (Eigen::Index c = 0; c < k; ++c)
        {
            design.block<2, 1>(2 * j, c) = cam.A * model.component_at(c, indices[std::size_t(j)]);
        }
        if (depth)
        {
            const Eigen::Index row = 2 * kLandmarks + j;
            residual[row] = cfg.depth_weight * ((*landmarks.depth)[j] - cam.depth_row->dot(b) - cam.depth_offset);
            for (Eigen::Index c = 0; c < k; ++c)
            {
                design(row, c) = cfg.depth_weight * cam.depth_row->dot(model.component_at(c, indices[std::size_t(j)]));
            }
        }
    }

    Eigen::MatrixXd normal = design.transpose() * design;
    normal.diagonal().array() += cfg.lambda_reg;
    const Eigen::VectorXd rhs = design.transpose() * residual;
    Eigen::LLT<Eigen::MatrixXd> llt(normal);
    FitResult result;
    result.camera = cam;
    result.coeffs.kind = model.kind();
    if (k > 0)
    {
        const Eigen::VectorXd diag = Eigen::MatrixXd(llt.matrixL()).diagonal();
        const double lo = diag.minCoeff();
        const double hi = diag.maxCoeff();
        result.condition_estimate = lo > 0.0 ? (hi / lo) * (hi / lo) : std::numeric_limits<double>::infinity();
        if (llt.info() != Eigen::Success || !(lo > 0.0) || (cfg.lambda_reg == 0.0 && result.condition_estimate > 1e12))
        {
            throw Error(ErrorCode::SingularSystem, "projected component matrix is rank deficient");
        }
        result.coeffs.alpha = llt.solve(rhs);
    }
    else
    {
        result.coeffs.alpha = Eigen::VectorXd(0);
        result.condition_estimate = 1.0;
    }
    const Eigen::VectorXd remaining = (residual - design * result.coeffs.alpha).head(2 * kLandmarks);
    result.rms_residual = std::sqrt(remaining.squaredNorm() / kLandmarks);
    return result;
}

struct IdentityFit
{
    VertexArray shape; ///< S_I = T + C_I * alpha_I
    FitResult fit;
};

/// Identity fit on a neutral frame against the model template.
inline IdentityFit fit_identity(const LandmarkSet& first_frame, const MorphableModel& id_model, const FitConfig& cfg)
{
    if (id_model.kind() != model3dmm::ComponentKind::identity)
    {
        throw Error(ErrorCode::InvalidArgument, "fit_identity needs an identity model");
    }
    const VertexArray base = id_model.template_array();
    const OrthoCamera cam = estimate_camera(first_frame, model3dmm::landmark_positions(base, id_model.landmark_indices()),
                                            cfg.min_scale, cfg.use_depth);
    IdentityFit out;
    out.fit = fit_coefficients(first_frame, base, id_model, cam, cfg);
    out.shape = model3dmm::synthesize(id_model, out.fit.coeffs);
    return out;
}

/// AU coefficients for one frame against an identity shape, with its own camera.
inline FitResult fit_au_frame(const LandmarkSet& frame, const VertexArray& identity_shape, const MorphableModel& au_model,
                              const FitConfig& cfg)
{
    const OrthoCamera cam = estimate_camera(
        frame, model3dmm::landmark_positions(identity_shape, au_model.landmark_indices()), cfg.min_scale, cfg.use_depth);
    return fit_coefficients(frame, identity_shape, au_model, cam, cfg);
}

/**
 * Per-frame AU fitting against the identity shape. Frames are independent and
 * may be fitted concurrently; results keep input order. A failing frame aborts
 * with its index unless cfg.skip_failed, in which case it is marked invalid
 * with zero coefficients.
 */
inline std::vector<FitResult> fit_au_sequence(const std::vector<LandmarkSet>& frames, const VertexArray& identity_shape,
                                              const MorphableModel& au_model, const FitConfig& cfg)
{
    if (au_model.kind() != model3dmm::ComponentKind::action_unit)
    {
        throw Error(ErrorCode::InvalidArgument, "fit_au_sequence needs an action-unit model");
    }
    std::vector<FitResult> out(frames.size());
    parallel_for(frames.size(), [&](std::size_t i) {
        try
        {
            out[i] = fit_au_frame(frames[i], identity_shape, au_model, cfg);
        }
        catch (const Error& e)
        {
            if (!cfg.skip_failed)
            {
                throw Error(e.code(), std::string("frame fit failed: ") + e.what(), i);
            }
            out[i] = FitResult{};
            out[i].coeffs.kind = au_model.kind();
            out[i].coeffs.alpha = Eigen::VectorXd::Zero(au_model.component_count());
            out[i].valid = false;
            out[i].error = e.what();
        }
    });
    return out;
}

// --- landmark files ----------------------------------------------------------

/// `[{"t_us": ..., "pts": [[x, y, z?] x 68]}, ...]`
inline std::vector<LandmarkSet> parse_landmarks_json(const nlohmann::json& doc)
{
    if (!doc.is_array())
    {
        throw Error(ErrorCode::InvalidRecord, "landmark JSON must be an array of frames");
    }
    std::vector<LandmarkSet> out;
    for (std::size_t f = 0; f < doc.size(); ++f)
    {
        const auto& frame = doc[f];
        if (!frame.is_object() || !frame.contains("t_us") || !frame.contains("pts") || !frame["pts"].is_array() ||
            frame["pts"].size() != kLandmarkCount)
        {
            throw Error(ErrorCode::InvalidRecord, "frame needs t_us and 68 pts", f);
        }
        LandmarkSet set;
        set.frame_time = frame["t_us"].get<std::uint64_t>();
        const auto& pts = frame["pts"];
        const std::size_t dims = pts[0].size();
        if (dims == 3)
        {
            set.depth = Eigen::Matrix<double, kLandmarks, 1>::Zero();
        }
        for (int j = 0; j < kLandmarks; ++j)
        {
            const auto& p = pts[std::size_t(j)];
            if (!p.is_array() || p.size() != dims || (dims != 2 && dims != 3))
            {
                throw Error(ErrorCode::InvalidRecord, "landmark points must all have 2 or 3 coordinates", f);
            }
            set.points(j, 0) = p[0].get<double>();
            set.points(j, 1) = p[1].get<double>();
            if (dims == 3)
            {
                (*set.depth)[j] = p[2].get<double>();
            }
        }
        if (!set.finite())
        {
            throw Error(ErrorCode::InvalidRecord, "non-finite landmark", f);
        }
        out.push_back(std::move(set));
    }
    return out;
}

inline nlohmann::json landmarks_to_json(const std::vector<LandmarkSet>& frames)
{
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& set : frames)
    {
        nlohmann::json pts = nlohmann::json::array();
        for (int j = 0; j < kLandmarks; ++j)
        {
            nlohmann::json p = {set.points(j, 0), set.points(j, 1)};
            if (set.depth)
            {
                p.push_back((*set.depth)[j]);
            }
            pts.push_back(std::move(p));
        }
        doc.push_back({{"t_us", set.frame_time}, {"pts", std::move(pts)}});
    }
    return doc;
}

inline std::vector<LandmarkSet> load_landmarks_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    }
    try
    {
        return parse_landmarks_json(nlohmann::json::parse(in));
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error(ErrorCode::InvalidRecord, path.string() + ": " + e.what());
    }
}

inline void save_landmarks_json(const std::vector<LandmarkSet>& frames, const std::filesystem::path& path)
{
    write_text_file(path, landmarks_to_json(frames).dump());
}

/**
 * CSV rows `frame_index,t_us,j,x,y[,z]`, optionally preceded by a header line.
 * Every frame must list all 68 landmarks.
 */
inline std::vector<LandmarkSet> read_landmarks_csv(std::istream& in)
{
    std::vector<LandmarkSet> frames;
    std::vector<std::array<bool, kLandmarkCount>> seen;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line))
    {
        ++row;
        if (!line.empty() && line.back() == '\r')
        {
            line.pop_back();
        }
        if (line.empty() || (row == 1 && line.rfind("frame_index", 0) == 0))
        {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
        {
            fields.push_back(field);
        }
        if (fields.size() != 5 && fields.size() != 6)
        {
            throw Error(ErrorCode::InvalidRecord, "landmark CSV rows have 5 or 6 fields", row);
        }
        std::size_t frame, j;
        std::uint64_t t;
        double x, y, z = 0.0;
        try
        {
            frame = std::stoul(fields[0]);
            t = std::stoull(fields[1]);
            j = std::stoul(fields[2]);
            x = std::stod(fields[3]);
            y = std::stod(fields[4]);
            if (fields.size() == 6 && !fields[5].empty())
            {
                z = std::stod(fields[5]);
            }
        }
        catch (const std::exception&)
        {
            throw Error(ErrorCode::InvalidRecord, "malformed landmark CSV row", row);
        }
        if (j >= kLandmarkCount)
        {
            throw Error(ErrorCode::InvalidRecord, "landmark index out of range", row);
        }
        if (frame >= frames.size())
        {
            frames.resize(frame + 1);
            seen.resize(frame + 1, std::array<bool, kLandmarkCount>{});
        }
        auto& set = frames[frame];
        set.frame_time = t;
        set.points(Eigen::Index(j), 0) = x;
        set.points(Eigen::Index(j), 1) = y;
        if (fields.size() == 6 && !fields[5].empty())
        {
            if (!set.depth)
            {
                set.depth = Eigen::Matrix<double, kLandmarks, 1>::Zero();
            }
            (*set.depth)[Eigen::Index(j)] = z;
        }
        seen[frame][j] = true;
    }
    for (std::size_t f = 0; f < frames.size(); ++f)
    {
        for (const bool s : seen[f])
        {
            if (!s)
            {
                throw Error(ErrorCode::InvalidRecord, "frame is missing landmarks", f);
            }
        }
    }
    return frames;
}

/// Dispatches on extension: .csv is read as CSV, anything else as JSON.
inline std::vector<LandmarkSet> load_landmarks(const std::filesystem::path& path)
{
    if (path.extension() == ".csv")
    {
        std::ifstream in(path);
        if (!in)
        {
            throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
        }
        return read_landmarks_csv(in);
    }
    return load_landmarks_json(path);
}

} // namespace fitting
} // namespace morphic

#endif /* MORPHIC_FITTING_HPP_ */
