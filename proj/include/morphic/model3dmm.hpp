/*
 * morphic - Cross-modal facial action unit supervision for event cameras.
 *
 * File: include/morphic/model3dmm.hpp
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

#ifndef MORPHIC_MODEL3DMM_HPP_
#define MORPHIC_MODEL3DMM_HPP_

#include "morphic/common.hpp"

#include "Eigen/Core"
#include "Eigen/SVD"
#include "Eigen/QR"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <vector>

namespace morphic {
namespace model3dmm {

inline constexpr std::size_t kLandmarkCount = 68;

/// N x 3 vertices; row-major storage is the canonical vertex-major flattening (x0,y0,z0,x1,...).
using VertexArray = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using LandmarkIndices = std::array<std::uint32_t, kLandmarkCount>;
using LandmarkPoints = Eigen::Matrix<double, static_cast<int>(kLandmarkCount), 3>;

enum class ComponentKind : std::uint8_t
{
    identity = 0,
    action_unit = 1,
};

inline const char* to_string(ComponentKind kind) { return kind == ComponentKind::identity ? "identity" : "action_unit"; }

/// Views a flat vertex-major vector as an N x 3 array (copying).
inline VertexArray to_vertex_array(const Eigen::VectorXd& flat)
{
    return Eigen::Map<const VertexArray>(flat.data(), flat.size() / 3, 3);
}

inline Eigen::VectorXd flatten(const VertexArray& vertices)
{
    return Eigen::Map<const Eigen::VectorXd>(vertices.data(), vertices.size());
}

/// Evenly spaced landmark vertices, index j -> floor(j * N / 68).
inline LandmarkIndices default_landmark_indices(std::uint32_t vertex_count)
{
    if (vertex_count < kLandmarkCount)
    {
        throw Error(ErrorCode::InvalidArgument, "need at least 68 vertices for landmarks");
    }
    LandmarkIndices out;
    for (std::size_t j = 0; j < kLandmarkCount; ++j)
    {
        out[j] = static_cast<std::uint32_t>(j * vertex_count / kLandmarkCount);
    }
    return out;
}

/**
 * A linear deformation model S = T + C * alpha.
 *
 * The template holds 3N values in vertex-major order; the component matrix is
 * 3N x K with unit-norm columns. Construction validates all invariants.
 */
class MorphableModel
{
public:
    MorphableModel() = default;

    MorphableModel(Eigen::VectorXd template_vertices, Eigen::MatrixXd components, ComponentKind kind,
                   const LandmarkIndices& landmarks)
        : template_(std::move(template_vertices)), components_(std::move(components)), kind_(kind),
          landmarks_(landmarks)
    {
        validate();
    }

    const Eigen::VectorXd& template_vertices() const noexcept { return template_; }
    const Eigen::MatrixXd& components() const noexcept { return components_; }
    ComponentKind kind() const noexcept { return kind_; }
    const LandmarkIndices& landmark_indices() const noexcept { return landmarks_; }
    std::uint32_t vertex_count() const noexcept { return static_cast<std::uint32_t>(template_.size() / 3); }
    std::uint32_t component_count() const noexcept { return static_cast<std::uint32_t>(components_.cols()); }

    VertexArray template_array() const { return to_vertex_array(template_); }

    /// 3-vector of component k at vertex v.
    Eigen::Vector3d component_at(Eigen::Index k, std::uint32_t vertex) const
    {
        return components_.block<3, 1>(3 * Eigen::Index(vertex), k);
    }

    friend bool operator==(const MorphableModel& a, const MorphableModel& b)
    {
        return a.kind_ == b.kind_ && a.landmarks_ == b.landmarks_ && a.template_.size() == b.template_.size() &&
               a.components_.rows() == b.components_.rows() && a.components_.cols() == b.components_.cols() &&
               a.template_ == b.template_ && a.components_ == b.components_;
    }

private:
    void validate() const
    {
        if (template_.size() == 0 || template_.size() % 3 != 0)
        {
            throw Error(ErrorCode::DimensionMismatch, "template must hold 3N values");
        }
        if (components_.rows() != template_.size())
        {
            throw Error(ErrorCode::DimensionMismatch, "component rows must equal 3N");
        }
        if (!template_.allFinite() || !components_.allFinite())
        {
            throw Error(ErrorCode::InvalidArgument, "model contains non-finite values");
        }
        for (Eigen::Index k = 0; k < components_.cols(); ++k)
        {
            if (std::abs(components_.col(k).norm() - 1.0) > 1e-9)
            {
                throw Error(ErrorCode::InvalidArgument, "component columns must have unit norm", std::size_t(k));
            }
        }
        std::set<std::uint32_t> seen;
        for (const auto idx : landmarks_)
        {
            if (idx >= vertex_count() || !seen.insert(idx).second)
            {
                throw Error(ErrorCode::InvalidArgument, "landmark indices must be distinct and < N", idx);
            }
        }
    }

    Eigen::VectorXd template_;
    Eigen::MatrixXd components_;
    ComponentKind kind_ = ComponentKind::identity;
    LandmarkIndices landmarks_{};
};

struct Coefficients
{
    Eigen::VectorXd alpha;
    ComponentKind kind = ComponentKind::identity;
};

/// Rows of `vertices` at the model's landmark indices.
inline LandmarkPoints landmark_positions(const VertexArray& vertices, const LandmarkIndices& indices)
{
    LandmarkPoints out;
    for (std::size_t j = 0; j < kLandmarkCount; ++j)
    {
        out.row(Eigen::Index(j)) = vertices.row(indices[j]);
    }
    return out;
}

/// S = T + C * alpha.
inline VertexArray synthesize(const MorphableModel& model, const Coefficients& coeffs)
{
    if (coeffs.alpha.size() != Eigen::Index(model.component_count()))
    {
        throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(model.component_count()) +
                                                      " coefficients, got " + std::to_string(coeffs.alpha.size()));
    }
    if (coeffs.kind != model.kind())
    {
        throw Error(ErrorCode::DimensionMismatch, "coefficient kind does not match model kind");
    }
    if (!coeffs.alpha.allFinite())
    {
        throw Error(ErrorCode::InvalidArgument, "coefficients must be finite");
    }
    const Eigen::VectorXd flat = model.template_vertices() + model.components() * coeffs.alpha;
    return to_vertex_array(flat);
}

// --- mesh tables -------------------------------------------------------------

inline constexpr std::uint16_t kNeutralTag = 0;

struct Mesh
{
    std::uint32_t subject = 0;
    std::uint16_t tag = kNeutralTag; ///< 0 = neutral, otherwise an AU code
    Eigen::VectorXd vertices;        ///< 3N, vertex-major

    bool neutral() const noexcept { return tag == kNeutralTag; }

    friend bool operator==(const Mesh& a, const Mesh& b)
    {
        return a.subject == b.subject && a.tag == b.tag && a.vertices.size() == b.vertices.size() &&
               a.vertices == b.vertices;
    }
};

struct MeshTable
{
    std::uint32_t vertex_count = 0;
    std::vector<Mesh> meshes;

    void add(Mesh mesh)
    {
        if (meshes.empty() && vertex_count == 0)
        {
            vertex_count = static_cast<std::uint32_t>(mesh.vertices.size() / 3);
        }
        if (mesh.vertices.size() != Eigen::Index(3) * vertex_count)
        {
            throw Error(ErrorCode::DimensionMismatch, "all meshes must share the vertex count", meshes.size());
        }
        meshes.push_back(std::move(mesh));
    }

    MeshTable neutrals() const
    {
        MeshTable out;
        out.vertex_count = vertex_count;
        for (const auto& m : meshes)
        {
            if (m.neutral())
            {
                out.meshes.push_back(m);
            }
        }
        return out;
    }

    friend bool operator==(const MeshTable&, const MeshTable&) = default;
};

inline std::vector<std::uint8_t> encode_mesh_table(const MeshTable& table)
{
    ByteWriter w;
    w.put_magic("MTAB");
    w.put<std::uint32_t>(table.vertex_count);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(table.meshes.size()));
    for (const auto& m : table.meshes)
    {
        w.put<std::uint32_t>(m.subject);
        w.put<std::uint16_t>(m.tag);
        for (Eigen::Index i = 0; i < m.vertices.size(); ++i)
        {
            w.put<double>(m.vertices[i]);
        }
    }
    return w.release();
}

inline MeshTable decode_mesh_table(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes);
    r.expect_magic("MTAB");
    MeshTable table;
    table.vertex_count = r.get<std::uint32_t>();
    const auto count = r.get<std::uint32_t>();
    r.require(std::size_t(count) * (6 + 24 * std::size_t(table.vertex_count)));
    for (std::uint32_t i = 0; i < count; ++i)
    {
        Mesh m;
        m.subject = r.get<std::uint32_t>();
        m.tag = r.get<std::uint16_t>();
        m.vertices.resize(3 * Eigen::Index(table.vertex_count));
        for (Eigen::Index v = 0; v < m.vertices.size(); ++v)
        {
            m.vertices[v] = r.get<double>();
        }
        table.meshes.push_back(std::move(m));
    }
    if (r.remaining() != 0)
    {
        throw Error(ErrorCode::InvalidRecord, "trailing bytes after mesh table");
    }
    return table;
}

inline std::size_t save_mesh_table(const MeshTable& table, const std::filesystem::path& path)
{
    return write_file(path, encode_mesh_table(table));
}

/**
 * Loads a single .mtab file, or every .mtab file of a directory (in filename
 * order) concatenated into one table.
 */
inline MeshTable load_mesh_table(const std::filesystem::path& path)
{
    if (!std::filesystem::is_directory(path))
    {
        return decode_mesh_table(read_file(path));
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path))
    {
        if (entry.is_regular_file() && entry.path().extension() == ".mtab")
        {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    MeshTable out;
    for (const auto& f : files)
    {
        MeshTable part = decode_mesh_table(read_file(f));
        if (out.meshes.empty() && out.vertex_count == 0)
        {
            out.vertex_count = part.vertex_count;
        }
        if (part.vertex_count != out.vertex_count)
        {
            throw Error(ErrorCode::DimensionMismatch, "mesh files disagree on vertex count: " + f.string());
        }
        for (auto& m : part.meshes)
        {
            out.meshes.push_back(std::move(m));
        }
    }
    return out;
}

// --- principal components ----------------------------------------------------

struct PrincipalComponents
{
    Eigen::VectorXd mean;      ///< zero when built without centering
    Eigen::MatrixXd basis;     ///< D x K, orthonormal columns
    Eigen::VectorXd variances; ///< per component, descending
    double total_variance = 0.0;

    double explained_ratio() const { return total_variance > 0.0 ? variances.sum() / total_variance : 0.0; }
};

/// Flips each column so that its entry of largest magnitude is positive (first such entry on ties).
inline void canonicalize_signs(Eigen::MatrixXd& basis)
{
    for (Eigen::Index k = 0; k < basis.cols(); ++k)
    {
        Eigen::Index arg = 0;
        basis.col(k).cwiseAbs().maxCoeff(&arg);
        if (basis(arg, k) < 0.0)
        {
            basis.col(k) *= -1.0;
        }
    }
}

/**
 * Top-K principal directions of the columns of `samples` (D x M) by thin SVD.
 * With `center`, the sample mean is removed and variances use the M-1
 * normalisation; otherwise the raw second moment about zero is used.
 */
inline PrincipalComponents principal_components(const Eigen::MatrixXd& samples, Eigen::Index k, bool center)
{
    const Eigen::Index m = samples.cols();
    PrincipalComponents pc;
    pc.mean = center ? Eigen::VectorXd(samples.rowwise().mean()) : Eigen::VectorXd::Zero(samples.rows());
    const Eigen::MatrixXd x = samples.colwise() - pc.mean;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU);
    if (svd.matrixU().cols() < k)
    {
        throw Error(ErrorCode::TooFewMeshes, "not enough samples for the requested rank");
    }
    const double denom = center ? double(m - 1) : double(m);
    pc.basis = svd.matrixU().leftCols(k);
    pc.variances = svd.singularValues().head(k).array().square() / denom;
    pc.total_variance = svd.singularValues().array().square().sum() / denom;
    canonicalize_signs(pc.basis);
    return pc;
}

inline Eigen::MatrixXd stack_columns(const std::vector<const Eigen::VectorXd*>& columns)
{
    Eigen::MatrixXd out(columns.front()->size(), Eigen::Index(columns.size()));
    for (std::size_t i = 0; i < columns.size(); ++i)
    {
        out.col(Eigen::Index(i)) = *columns[i];
    }
    return out;
}

/**
 * Identity model from neutral scans: template = mean mesh, components = top-K
 * principal directions. K must not exceed M - 1.
 */
inline MorphableModel build_identity_model(const MeshTable& neutrals, std::uint32_t k, const LandmarkIndices& landmarks)
{
    for (std::size_t i = 0; i < neutrals.meshes.size(); ++i)
    {
        if (!neutrals.meshes[i].neutral())
        {
            throw Error(ErrorCode::MixedTags, "identity models are built from neutral meshes only", i);
        }
    }
    const std::size_t m = neutrals.meshes.size();
    if (k == 0 || m < 2 || k > m - 1)
    {
        throw Error(ErrorCode::TooFewMeshes, "identity model rank " + std::to_string(k) + " needs at least " +
                                                 std::to_string(k + 1) + " meshes, have " + std::to_string(m));
    }
    std::vector<const Eigen::VectorXd*> cols;
    for (const auto& mesh : neutrals.meshes)
    {
        cols.push_back(&mesh.vertices);
    }
    const PrincipalComponents pc = principal_components(stack_columns(cols), k, true);
    return MorphableModel(pc.mean, pc.basis, ComponentKind::identity, landmarks);
}

enum class AuMethod
{
    pca_offsets,
    sparse_dict,
};

struct SparseDictConfig
{
    int sparsity = 5;          ///< maximum nonzero codes per offset
    int iterations = 20;       ///< alternations of coding and dictionary update
    double penalty = 0.05;     ///< lasso weight relative to max |D^T o|
    int coordinate_sweeps = 50;
};

struct AuOffsets
{
    Eigen::VectorXd neutral_mean;
    Eigen::MatrixXd offsets; ///< 3N x M
};

/// Expressive minus same-subject neutral (the subject's neutral mean if several).
inline AuOffsets compute_au_offsets(const MeshTable& table)
{
    std::map<std::uint32_t, std::pair<Eigen::VectorXd, int>> neutral_sum;
    Eigen::VectorXd global = Eigen::VectorXd::Zero(3 * Eigen::Index(table.vertex_count));
    int neutral_count = 0;
    for (const auto& m : table.meshes)
    {
        if (!m.neutral())
        {
            continue;
        }
        auto [it, inserted] = neutral_sum.try_emplace(m.subject, Eigen::VectorXd::Zero(m.vertices.size()), 0);
        it->second.first += m.vertices;
        it->second.second += 1;
        global += m.vertices;
        ++neutral_count;
    }
    std::vector<Eigen::VectorXd> offsets;
    for (std::size_t i = 0; i < table.meshes.size(); ++i)
    {
        const auto& m = table.meshes[i];
        if (m.neutral())
        {
            continue;
        }
        const auto it = neutral_sum.find(m.subject);
        if (it == neutral_sum.end())
        {
            throw Error(ErrorCode::MissingNeutralPair,
                        "expressive mesh of subject " + std::to_string(m.subject) + " has no neutral scan", i);
        }
        offsets.push_back(m.vertices - it->second.first / double(it->second.second));
    }
    AuOffsets out;
    out.neutral_mean = neutral_count > 0 ? Eigen::VectorXd(global / double(neutral_count)) : global;
    out.offsets.resize(out.neutral_mean.size(), Eigen::Index(offsets.size()));
    for (std::size_t i = 0; i < offsets.size(); ++i)
    {
        out.offsets.col(Eigen::Index(i)) = offsets[i];
    }
    return out;
}

namespace detail {

inline double soft_threshold(double v, double mu) { return v > mu ? v - mu : (v < -mu ? v + mu : 0.0); }

/// Lasso by coordinate descent for a unit-norm dictionary, truncated to the
/// `sparsity` largest codes and refit by least squares on that support.
inline Eigen::VectorXd sparse_code(const Eigen::MatrixXd& dict, const Eigen::VectorXd& target, const SparseDictConfig& cfg)
{
    const Eigen::Index k = dict.cols();
    const Eigen::VectorXd correlation = dict.transpose() * target;
    const double mu = cfg.penalty * correlation.cwiseAbs().maxCoeff();
    Eigen::VectorXd code = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd residual = target;
    for (int sweep = 0; sweep < cfg.coordinate_sweeps; ++sweep)
    {
        for (Eigen::Index j = 0; j < k; ++j)
        {
            const double rho = dict.col(j).dot(residual) + code[j];
            const double updated = soft_threshold(rho, mu);
            if (updated != code[j])
            {
                residual -= (updated - code[j]) * dict.col(j);
                code[j] = updated;
            }
        }
    }
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < k; ++j)
    {
        if (code[j] != 0.0)
        {
            support.push_back(j);
        }
    }
    std::stable_sort(support.begin(), support.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(code[a]) > std::abs(code[b]); });
    if (support.size() > std::size_t(cfg.sparsity))
    {
        support.resize(std::size_t(cfg.sparsity));
    }
    std::sort(support.begin(), support.end());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(k);
    if (support.empty())
    {
        return out;
    }
    Eigen::MatrixXd sub(dict.rows(), Eigen::Index(support.size()));
    for (std::size_t i = 0; i < support.size(); ++i)
    {
        sub.col(Eigen::Index(i)) = dict.col(support[i]);
    }
    const Eigen::VectorXd refit = sub.colPivHouseholderQr().solve(target);
    for (std::size_t i = 0; i < support.size(); ++i)
    {
        out[support[i]] = refit[Eigen::Index(i)];
    }
    return out;
}

} // namespace detail

/**
 * Learns a dictionary of unit-norm atoms for sparse reconstruction of the
 * offsets. Initialised from the uncentered principal directions.
 */
inline Eigen::MatrixXd learn_sparse_dictionary(const Eigen::MatrixXd& offsets, Eigen::Index k,
                                               const SparseDictConfig& cfg)
{
    Eigen::MatrixXd dict = principal_components(offsets, k, false).basis;
    Eigen::MatrixXd codes(k, offsets.cols());
    for (int iter = 0; iter < cfg.iterations; ++iter)
    {
        for (Eigen::Index i = 0; i < offsets.cols(); ++i)
        {
            codes.col(i) = detail::sparse_code(dict, offsets.col(i), cfg);
        }
        Eigen::MatrixXd residual = offsets - dict * codes;
        for (Eigen::Index j = 0; j < k; ++j)
        {
            const double energy = codes.row(j).squaredNorm();
            if (energy == 0.0)
            {
                continue; // unused atom keeps its previous direction
            }
            residual += dict.col(j) * codes.row(j);
            Eigen::VectorXd atom = residual * codes.row(j).transpose() / energy;
            const double norm = atom.norm();
            if (norm > 0.0)
            {
                dict.col(j) = atom / norm;
                codes.row(j) *= norm;
            }
            residual -= dict.col(j) * codes.row(j);
        }
    }
    canonicalize_signs(dict);
    return dict;
}

/**
 * AU model from expression offsets. The template is the global neutral mean.
 */
inline MorphableModel build_au_model(const MeshTable& table, std::uint32_t k, AuMethod method,
                                     const LandmarkIndices& landmarks, const SparseDictConfig& sparse = {})
{
    const AuOffsets off = compute_au_offsets(table);
    if (off.offsets.cols() == 0 || k == 0 || Eigen::Index(k) > off.offsets.cols())
    {
        throw Error(ErrorCode::TooFewOffsets, "AU model rank " + std::to_string(k) + " needs at least as many offsets, have " +
                                                  std::to_string(off.offsets.cols()));
    }
    Eigen::MatrixXd components = method == AuMethod::pca_offsets
                                     ? principal_components(off.offsets, k, false).basis
                                     : learn_sparse_dictionary(off.offsets, k, sparse);
    return MorphableModel(off.neutral_mean, std::move(components), ComponentKind::action_unit, landmarks);
}

// --- M3DM container ----------------------------------------------------------

inline constexpr std::size_t kM3dmHeaderSize = 20;

/// Total M3DM file size for N vertices and K components (header, payload, CRC).
constexpr std::size_t m3dm_file_size(std::size_t n, std::size_t k)
{
    return kM3dmHeaderSize + 8 * (3 * n) + 8 * (3 * n * k) + 4 * kLandmarkCount + 4;
}

inline std::vector<std::uint8_t> encode_model(const MorphableModel& model)
{
    ByteWriter w;
    w.put_magic("M3DM");
    w.put<std::uint16_t>(1);
    w.put<std::uint32_t>(model.vertex_count());
    w.put<std::uint32_t>(model.component_count());
    w.put<std::uint8_t>(static_cast<std::uint8_t>(model.kind()));
    w.put_zeros(5);
    const auto& t = model.template_vertices();
    for (Eigen::Index i = 0; i < t.size(); ++i)
    {
        w.put<double>(t[i]);
    }
    const auto& c = model.components();
    for (Eigen::Index k = 0; k < c.cols(); ++k)
    {
        for (Eigen::Index i = 0; i < c.rows(); ++i)
        {
            w.put<double>(c(i, k));
        }
    }
    for (const auto idx : model.landmark_indices())
    {
        w.put<std::uint32_t>(idx);
    }
    const auto& bytes = w.bytes();
    const std::uint32_t crc = crc32(std::span(bytes).subspan(kM3dmHeaderSize));
    w.put<std::uint32_t>(crc);
    return w.release();
}

inline MorphableModel decode_model(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes);
    r.expect_magic("M3DM");
    r.require(kM3dmHeaderSize - 4);
    const auto version = r.get<std::uint16_t>();
    if (version != 1)
    {
        throw Error(ErrorCode::InvalidRecord, "unsupported M3DM version " + std::to_string(version));
    }
    const std::size_t n = r.get<std::uint32_t>();
    const std::size_t k = r.get<std::uint32_t>();
    const auto kind = r.get<std::uint8_t>();
    if (kind > 1)
    {
        throw Error(ErrorCode::InvalidRecord, "unknown component kind");
    }
    r.get_bytes(5);
    const std::size_t expected = m3dm_file_size(n, k);
    if (bytes.size() < expected)
    {
        throw Error(ErrorCode::TruncatedPayload,
                    "M3DM file has " + std::to_string(bytes.size()) + " bytes, expected " + std::to_string(expected));
    }
    if (bytes.size() > expected)
    {
        throw Error(ErrorCode::InvalidRecord, "trailing bytes after M3DM payload");
    }
    verify_crc_trailer(bytes, kM3dmHeaderSize);
    Eigen::VectorXd t(3 * Eigen::Index(n));
    for (Eigen::Index i = 0; i < t.size(); ++i)
    {
        t[i] = r.get<double>();
    }
    Eigen::MatrixXd c(3 * Eigen::Index(n), Eigen::Index(k));
    for (Eigen::Index j = 0; j < c.cols(); ++j)
    {
        for (Eigen::Index i = 0; i < c.rows(); ++i)
        {
            c(i, j) = r.get<double>();
        }
    }
    LandmarkIndices landmarks;
    for (auto& idx : landmarks)
    {
        idx = r.get<std::uint32_t>();
    }
    return MorphableModel(std::move(t), std::move(c), static_cast<ComponentKind>(kind), landmarks);
}

inline std::size_t save_model(const MorphableModel& model, const std::filesystem::path& path)
{
    return write_file(path, encode_model(model));
}

inline MorphableModel load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }

} // namespace model3dmm
} // namespace morphic

#endif /* MORPHIC_MODEL3DMM_HPP_ */
