/*
 * morphic - Cross-modal facial action unit supervision for event cameras.
 *
 * File: include/morphic/crossmodal.hpp
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

#ifndef MORPHIC_CROSSMODAL_HPP_
#define MORPHIC_CROSSMODAL_HPP_

#include "morphic/common.hpp"
#include "morphic/events.hpp"
#include "morphic/fitting.hpp"
#include "morphic/model3dmm.hpp"

#include "Eigen/Core"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace morphic {
namespace crossmodal {

inline constexpr int kAuClassCount = 24;

enum class TrackSource
{
    fitted,
    synthetic,
};

/**
 * Time-stamped coefficient vectors, one row per entry. Timestamps are
 * strictly increasing.
 */
struct CoeffTrack
{
    std::vector<std::uint64_t> times;
    Eigen::MatrixXd values; ///< count x K
    TrackSource source = TrackSource::fitted;

    std::size_t size() const noexcept { return times.size(); }
    bool empty() const noexcept { return times.empty(); }
    Eigen::Index dims() const noexcept { return values.cols(); }

    void validate() const
    {
        if (values.rows() != Eigen::Index(times.size()))
        {
            throw Error(ErrorCode::DimensionMismatch, "track has mismatched times and values");
        }
        for (std::size_t i = 1; i < times.size(); ++i)
        {
            if (times[i] <= times[i - 1])
            {
                throw Error(ErrorCode::NonMonotonicTimestamp, "track times must be strictly increasing", i);
            }
        }
        if (!values.allFinite())
        {
            throw Error(ErrorCode::InvalidArgument, "track values must be finite");
        }
    }

    /// Payload equality (times and values); the source tag is not serialized.
    friend bool operator==(const CoeffTrack& a, const CoeffTrack& b)
    {
        return a.times == b.times && a.values.rows() == b.values.rows() && a.values.cols() == b.values.cols() &&
               a.values == b.values;
    }
};

// --- ATRK container ----------------------------------------------------------

inline constexpr std::size_t kAtrkHeaderSize = 12;

inline std::vector<std::uint8_t> encode_track(const CoeffTrack& track)
{
    track.validate();
    ByteWriter w;
    w.put_magic("ATRK");
    w.put<std::uint32_t>(static_cast<std::uint32_t>(track.dims()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(track.size()));
    for (std::size_t i = 0; i < track.size(); ++i)
    {
        w.put<std::uint64_t>(track.times[i]);
        for (Eigen::Index k = 0; k < track.dims(); ++k)
        {
            w.put<double>(track.values(Eigen::Index(i), k));
        }
    }
    const std::uint32_t crc = crc32(std::span(w.bytes()).subspan(kAtrkHeaderSize));
    w.put<std::uint32_t>(crc);
    return w.release();
}

inline CoeffTrack decode_track(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes);
    r.expect_magic("ATRK");
    const std::size_t k = r.get<std::uint32_t>();
    const std::size_t count = r.get<std::uint32_t>();
    const std::size_t expected = kAtrkHeaderSize + count * (8 + 8 * k) + 4;
    if (bytes.size() < expected)
    {
        throw Error(ErrorCode::TruncatedPayload, "ATRK file shorter than its declared record count");
    }
    if (bytes.size() > expected)
    {
        throw Error(ErrorCode::InvalidRecord, "trailing bytes after ATRK payload");
    }
    verify_crc_trailer(bytes, kAtrkHeaderSize);
    CoeffTrack track;
    track.times.resize(count);
    track.values.resize(Eigen::Index(count), Eigen::Index(k));
    for (std::size_t i = 0; i < count; ++i)
    {
        track.times[i] = r.get<std::uint64_t>();
        for (std::size_t j = 0; j < k; ++j)
        {
            track.values(Eigen::Index(i), Eigen::Index(j)) = r.get<double>();
        }
    }
    track.validate();
    return track;
}

inline std::size_t save_track(const CoeffTrack& track, const std::filesystem::path& path)
{
    return write_file(path, encode_track(track));
}

inline CoeffTrack load_track(const std::filesystem::path& path) { return decode_track(read_file(path)); }

// --- alignment ---------------------------------------------------------------

/// Twice the window midpoint, keeping integer arithmetic exact.
inline std::uint64_t doubled_midpoint(const events::EventFrame& frame)
{
    return 2 * frame.window_start + frame.window_len;
}

/**
 * Index of the track entry nearest to each frame midpoint. An exact tie
 * between two entries resolves to the earlier one.
 */
inline std::vector<std::size_t> nearest_indices(const CoeffTrack& track, const events::FrameSequence& frames)
{
    if (track.empty())
    {
        throw Error(ErrorCode::EmptyTrack, "cannot align against an empty track");
    }
    std::vector<std::size_t> out;
    out.reserve(frames.length());
    for (const auto& frame : frames.frames)
    {
        const std::uint64_t mid2 = doubled_midpoint(frame);
        // first entry with 2t >= mid2
        const auto it = std::lower_bound(track.times.begin(), track.times.end(), mid2,
                                         [](std::uint64_t t, std::uint64_t m) { return 2 * t < m; });
        std::size_t hi = std::size_t(it - track.times.begin());
        if (hi == 0)
        {
            out.push_back(0);
        }
        else if (hi == track.size())
        {
            out.push_back(track.size() - 1);
        }
        else
        {
            const std::uint64_t before = mid2 - 2 * track.times[hi - 1];
            const std::uint64_t after = 2 * track.times[hi] - mid2;
            out.push_back(before <= after ? hi - 1 : hi);
        }
    }
    return out;
}

/// Per-frame targets taken from the nearest track entry (frames x K).
inline Eigen::MatrixXd align_nearest(const CoeffTrack& track, const events::FrameSequence& frames)
{
    const auto idx = nearest_indices(track, frames);
    Eigen::MatrixXd out(Eigen::Index(idx.size()), track.dims());
    for (std::size_t f = 0; f < idx.size(); ++f)
    {
        out.row(Eigen::Index(f)) = track.values.row(Eigen::Index(idx[f]));
    }
    return out;
}

/// Linear interpolation of the track at time t (microseconds), clamped to the end values.
inline Eigen::RowVectorXd interpolate_at(const CoeffTrack& track, double t)
{
    if (track.empty())
    {
        throw Error(ErrorCode::EmptyTrack, "cannot interpolate an empty track");
    }
    if (t <= double(track.times.front()))
    {
        return track.values.row(0);
    }
    if (t >= double(track.times.back()))
    {
        return track.values.row(Eigen::Index(track.size() - 1));
    }
    // last entry with time <= t
    const auto it = std::upper_bound(track.times.begin(), track.times.end(), t,
                                     [](double v, std::uint64_t time) { return v < double(time); });
    const std::size_t lo = std::size_t(it - track.times.begin()) - 1;
    const double t_lo = double(track.times[lo]);
    const double t_hi = double(track.times[lo + 1]);
    const double w = (t - t_lo) / (t_hi - t_lo);
    if (w == 0.0)
    {
        return track.values.row(Eigen::Index(lo));
    }
    return (1.0 - w) * track.values.row(Eigen::Index(lo)) + w * track.values.row(Eigen::Index(lo + 1));
}

/// Per-frame targets interpolated at each window midpoint (frames x K).
inline Eigen::MatrixXd align_interpolated(const CoeffTrack& track, const events::FrameSequence& frames)
{
    if (track.empty())
    {
        throw Error(ErrorCode::EmptyTrack, "cannot align against an empty track");
    }
    Eigen::MatrixXd out(Eigen::Index(frames.length()), track.dims());
    for (std::size_t f = 0; f < frames.length(); ++f)
    {
        out.row(Eigen::Index(f)) = interpolate_at(track, double(doubled_midpoint(frames.frames[f])) / 2.0);
    }
    return out;
}

enum class Alignment
{
    nearest,
    interpolated,
};

// --- manifest ----------------------------------------------------------------

enum class Split
{
    train,
    test,
};

inline const char* to_string(Split s) { return s == Split::train ? "train" : "test"; }

struct ManifestRecord
{
    std::string video;
    std::filesystem::path events;
    std::optional<std::filesystem::path> coeffs;
    std::optional<std::filesystem::path> landmarks;
    int au = 0;
    std::uint32_t subject = 0;
    Split split = Split::train;
};

struct Manifest
{
    std::vector<ManifestRecord> records;
};

/**
 * Parses JSON-lines manifest text. Keys: events, coeffs or landmarks, au,
 * subject, split, and an optional video id. Relative paths are resolved
 * against `base`. Unknown keys are rejected.
 */
inline Manifest parse_manifest(std::istream& in, const std::filesystem::path& base, bool check_paths = true)
{
    Manifest m;
    std::string line;
    std::size_t index = 0;
    while (std::getline(in, line))
    {
        if (line.empty() || line == "\r")
        {
            continue;
        }
        ManifestRecord rec;
        try
        {
            const auto j = nlohmann::json::parse(line);
            for (auto it = j.begin(); it != j.end(); ++it)
            {
                static const std::set<std::string> known = {"events", "coeffs", "landmarks", "au",
                                                            "subject", "split", "video"};
                if (!known.count(it.key()))
                {
                    throw Error(ErrorCode::InvalidRecord, "unknown manifest key '" + it.key() + "'", index);
                }
            }
            auto resolve = [&](const std::string& p) {
                std::filesystem::path path(p);
                return path.is_absolute() ? path : base / path;
            };
            rec.events = resolve(j.at("events").get<std::string>());
            if (j.contains("coeffs"))
            {
                rec.coeffs = resolve(j["coeffs"].get<std::string>());
            }
            if (j.contains("landmarks"))
            {
                rec.landmarks = resolve(j["landmarks"].get<std::string>());
            }
            if (!rec.coeffs && !rec.landmarks)
            {
                throw Error(ErrorCode::InvalidRecord, "record needs 'coeffs' or 'landmarks'", index);
            }
            rec.au = j.at("au").get<int>();
            rec.subject = j.at("subject").get<std::uint32_t>();
            const auto split = j.at("split").get<std::string>();
            if (split != "train" && split != "test")
            {
                throw Error(ErrorCode::InvalidRecord, "split must be 'train' or 'test'", index);
            }
            rec.split = split == "train" ? Split::train : Split::test;
            rec.video = j.contains("video") ? j["video"].get<std::string>() : rec.events.stem().string();
        }
        catch (const nlohmann::json::exception& e)
        {
            throw Error(ErrorCode::InvalidRecord, std::string("manifest line: ") + e.what(), index);
        }
        if (check_paths)
        {
            for (const auto* p : {&rec.events, rec.coeffs ? &*rec.coeffs : nullptr, rec.landmarks ? &*rec.landmarks : nullptr})
            {
                if (p && !std::filesystem::exists(*p))
                {
                    throw Error(ErrorCode::Io, "manifest path does not exist: " + p->string(), index);
                }
            }
        }
        m.records.push_back(std::move(rec));
        ++index;
    }
    return m;
}

inline Manifest load_manifest(const std::filesystem::path& path, bool check_paths = true)
{
    std::ifstream in(path);
    if (!in)
    {
        throw Error(ErrorCode::Io, "cannot open manifest '" + path.string() + "'");
    }
    return parse_manifest(in, path.parent_path(), check_paths);
}

/// One JSON line per record; paths are written relative to `base` when possible.
inline std::string format_manifest(const Manifest& m, const std::filesystem::path& base)
{
    auto rel = [&](const std::filesystem::path& p) {
        const auto r = std::filesystem::relative(p, base);
        return (r.empty() ? p : r).generic_string();
    };
    std::string out;
    for (const auto& rec : m.records)
    {
        nlohmann::ordered_json j;
        j["video"] = rec.video;
        j["events"] = rel(rec.events);
        if (rec.coeffs)
        {
            j["coeffs"] = rel(*rec.coeffs);
        }
        if (rec.landmarks)
        {
            j["landmarks"] = rel(*rec.landmarks);
        }
        j["au"] = rec.au;
        j["subject"] = rec.subject;
        j["split"] = to_string(rec.split);
        out += j.dump() + "\n";
    }
    return out;
}

enum class SplitMode
{
    by_video,
    by_subject,
};

/**
 * Deterministic train/test assignment. Records (or whole subjects) are ranked
 * by a seeded hash of their ids and the lowest-ranked ones go to test until
 * round(test_fraction * n) records are reached.
 */
inline void assign_splits(Manifest& m, SplitMode mode, std::uint64_t seed, double test_fraction = 0.2)
{
    const std::size_t n = m.records.size();
    const auto want = static_cast<std::size_t>(std::llround(test_fraction * double(n)));
    for (auto& r : m.records)
    {
        r.split = Split::train;
    }
    if (mode == SplitMode::by_video)
    {
        std::vector<std::pair<std::uint64_t, std::size_t>> order;
        for (std::size_t i = 0; i < n; ++i)
        {
            const auto& r = m.records[i];
            order.emplace_back(stable_hash(std::to_string(r.subject) + "/" + r.video, seed), i);
        }
        std::sort(order.begin(), order.end());
        for (std::size_t i = 0; i < want; ++i)
        {
            m.records[order[i].second].split = Split::test;
        }
        return;
    }
    std::map<std::uint32_t, std::size_t> per_subject;
    for (const auto& r : m.records)
    {
        ++per_subject[r.subject];
    }
    std::vector<std::pair<std::uint64_t, std::uint32_t>> order;
    for (const auto& [subject, count] : per_subject)
    {
        order.emplace_back(stable_hash(std::to_string(subject), seed), subject);
    }
    std::sort(order.begin(), order.end());
    std::set<std::uint32_t> test_subjects;
    std::size_t taken = 0;
    for (const auto& [h, subject] : order)
    {
        if (taken >= want)
        {
            break;
        }
        test_subjects.insert(subject);
        taken += per_subject[subject];
    }
    for (auto& r : m.records)
    {
        if (test_subjects.count(r.subject))
        {
            r.split = Split::test;
        }
    }
}

// --- dataset -----------------------------------------------------------------

/**
 * A fixed-length clip of event frames with per-frame coefficient targets and
 * a video-level AU label. mask[f] is 1 for real frames and 0 for padding.
 */
struct LabeledSequence
{
    events::FrameSequence frames;
    Eigen::MatrixXd targets; ///< clip_len x K
    std::vector<std::uint8_t> mask;
    int au_class = 0;
    std::uint32_t subject = 0;
    Split split = Split::train;
    std::string video;

    std::size_t real_frames() const { return std::size_t(std::count(mask.begin(), mask.end(), std::uint8_t{1})); }
};

/// Models used to turn landmark records into coefficient tracks.
struct LandmarkFitting
{
    model3dmm::MorphableModel identity;
    model3dmm::MorphableModel au;
    fitting::FitConfig identity_cfg{.lambda_reg = 0.01};
    fitting::FitConfig au_cfg{.lambda_reg = 0.05};
};

struct DatasetConfig
{
    std::uint64_t window_len = 33'000;
    std::size_t clip_len = 75;
    Alignment alignment = Alignment::nearest;
    int num_classes = kAuClassCount;
    std::optional<LandmarkFitting> fitting;
};

/**
 * Two-step fit of a landmark sequence: identity on the first frame, AU
 * coefficients on every frame against the identity shape.
 */
inline CoeffTrack fit_landmark_track(const std::vector<fitting::LandmarkSet>& frames, const LandmarkFitting& models)
{
    if (frames.empty())
    {
        throw Error(ErrorCode::EmptyTrack, "landmark sequence is empty");
    }
    const auto identity = fitting::fit_identity(frames.front(), models.identity, models.identity_cfg);
    auto cfg = models.au_cfg;
    cfg.skip_failed = false;
    const auto fits = fitting::fit_au_sequence(frames, identity.shape, models.au, cfg);
    CoeffTrack track;
    track.source = TrackSource::fitted;
    track.values.resize(Eigen::Index(frames.size()), models.au.component_count());
    for (std::size_t i = 0; i < frames.size(); ++i)
    {
        track.times.push_back(frames[i].frame_time);
        track.values.row(Eigen::Index(i)) = fits[i].coeffs.alpha.transpose();
    }
    track.validate();
    return track;
}

/**
 * Aligns one event stream with its coefficient track and cuts a clip of
 * exactly clip_len frames. Frames start at the first track entry; events
 * before it are outside the labelled span and are dropped.
 */
inline LabeledSequence make_sequence(const std::vector<events::Event>& all_events, events::SensorSize size,
                                     const CoeffTrack& track, const DatasetConfig& cfg)
{
    if (track.empty())
    {
        throw Error(ErrorCode::EmptyTrack, "coefficient track is empty");
    }
    if (all_events.empty() || all_events.back().t < track.times.front() || all_events.front().t > track.times.back())
    {
        throw Error(ErrorCode::NoTemporalOverlap, "event stream and coefficient track do not overlap");
    }
    const std::uint64_t t0 = track.times.front();
    const auto first = std::lower_bound(all_events.begin(), all_events.end(), t0,
                                        [](const events::Event& e, std::uint64_t t) { return e.t < t; });
    const auto kept = std::span<const events::Event>(all_events).subspan(std::size_t(first - all_events.begin()));
    events::FrameOptions opts;
    opts.window_len = cfg.window_len;
    opts.t0 = t0;
    opts.t_end = std::max(all_events.back().t, track.times.back()) + 1;
    opts.policy = events::TailPolicy::drop_tail;
    events::FrameSequence frames = events::generate_frames(kept, size, opts);
    Eigen::MatrixXd targets =
        cfg.alignment == Alignment::nearest ? align_nearest(track, frames) : align_interpolated(track, frames);

    LabeledSequence seq;
    const std::size_t n = frames.length();
    const std::size_t clip = cfg.clip_len;
    seq.frames.size = size;
    seq.frames.window_len = cfg.window_len;
    seq.targets.resize(Eigen::Index(clip), track.dims());
    seq.mask.assign(clip, 0);
    if (n >= clip)
    {
        const std::size_t start = (n - clip) / 2;
        seq.frames.frames.assign(frames.frames.begin() + std::ptrdiff_t(start),
                                 frames.frames.begin() + std::ptrdiff_t(start + clip));
        seq.frames.t0 = seq.frames.frames.empty() ? t0 : seq.frames.frames.front().window_start;
        seq.targets = targets.middleRows(Eigen::Index(start), Eigen::Index(clip));
        std::fill(seq.mask.begin(), seq.mask.end(), std::uint8_t{1});
        return seq;
    }
    seq.frames.t0 = t0;
    seq.frames.frames = std::move(frames.frames);
    const Eigen::RowVectorXd edge = n > 0 ? Eigen::RowVectorXd(targets.row(Eigen::Index(n - 1)))
                                          : Eigen::RowVectorXd(track.values.row(0));
    for (std::size_t f = 0; f < clip; ++f)
    {
        if (f < n)
        {
            seq.targets.row(Eigen::Index(f)) = targets.row(Eigen::Index(f));
            seq.mask[f] = 1;
        }
        else
        {
            seq.frames.frames.emplace_back(t0 + f * cfg.window_len, cfg.window_len, size);
            seq.targets.row(Eigen::Index(f)) = edge;
        }
    }
    return seq;
}

/// Builds one LabeledSequence per manifest record (in manifest order).
inline std::vector<LabeledSequence> build_dataset(const Manifest& manifest, const DatasetConfig& cfg)
{
    if (cfg.window_len == 0)
    {
        throw Error(ErrorCode::ZeroWindow, "window length must be positive");
    }
    std::vector<LabeledSequence> out(manifest.records.size());
    parallel_for(manifest.records.size(), [&](std::size_t i) {
        const auto& rec = manifest.records[i];
        try
        {
            if (rec.au < 0 || rec.au >= cfg.num_classes)
            {
                throw Error(ErrorCode::BadLabel, "AU class " + std::to_string(rec.au) + " outside [0," +
                                                     std::to_string(cfg.num_classes) + ")");
            }
            CoeffTrack track;
            if (rec.coeffs)
            {
                track = load_track(*rec.coeffs);
            }
            else if (cfg.fitting)
            {
                track = fit_landmark_track(fitting::load_landmarks(*rec.landmarks), *cfg.fitting);
            }
            else
            {
                throw Error(ErrorCode::InvalidArgument, "landmark record requires fitting models");
            }
            const auto stream = events::load_event_stream(rec.events);
            auto seq = make_sequence(stream.read_all(), stream.size(), track, cfg);
            seq.au_class = rec.au;
            seq.subject = rec.subject;
            seq.split = rec.split;
            seq.video = rec.video;
            out[i] = std::move(seq);
        }
        catch (const Error& e)
        {
            throw Error(e.code(), "record '" + rec.video + "': " + e.what(), i);
        }
    });
    return out;
}

// --- LSEQ container ----------------------------------------------------------
//
// Materialized dataset written by `transfer`. Frames are stored sparsely as
// (flat index u32, count u16) pairs. Layout:
//   "LSEQ", version u16 = 1, count u32, then per sequence:
//   au i32, subject u32, split u8, video (u32 length + bytes), width u16,
//   height u16, t0 u64, window_len u64, clip u32, K u32, mask u8[clip],
//   targets f64[clip*K] row-major, per frame: window_start u64, span u64,
//   nonzero u32, (index u32, count u16)[nonzero]
//   CRC32 of everything after the 10-byte header.

inline std::vector<std::uint8_t> encode_dataset(const std::vector<LabeledSequence>& data)
{
    ByteWriter w;
    w.put_magic("LSEQ");
    w.put<std::uint16_t>(1);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(data.size()));
    for (const auto& s : data)
    {
        w.put<std::int32_t>(s.au_class);
        w.put<std::uint32_t>(s.subject);
        w.put<std::uint8_t>(s.split == Split::train ? 0 : 1);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(s.video.size()));
        w.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(s.video.data()), s.video.size()));
        w.put<std::uint16_t>(s.frames.size.width);
        w.put<std::uint16_t>(s.frames.size.height);
        w.put<std::uint64_t>(s.frames.t0);
        w.put<std::uint64_t>(s.frames.window_len);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(s.mask.size()));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(s.targets.cols()));
        w.put_bytes(s.mask);
        for (Eigen::Index r = 0; r < s.targets.rows(); ++r)
        {
            for (Eigen::Index c = 0; c < s.targets.cols(); ++c)
            {
                w.put<double>(s.targets(r, c));
            }
        }
        for (const auto& f : s.frames.frames)
        {
            w.put<std::uint64_t>(f.window_start);
            w.put<std::uint64_t>(f.span);
            std::uint32_t nonzero = 0;
            for (const auto c : f.counts)
            {
                nonzero += c != 0;
            }
            w.put<std::uint32_t>(nonzero);
            for (std::size_t i = 0; i < f.counts.size(); ++i)
            {
                if (f.counts[i] != 0)
                {
                    w.put<std::uint32_t>(static_cast<std::uint32_t>(i));
                    w.put<std::uint16_t>(f.counts[i]);
                }
            }
        }
    }
    const std::uint32_t crc = crc32(std::span(w.bytes()).subspan(10));
    w.put<std::uint32_t>(crc);
    return w.release();
}

inline std::vector<LabeledSequence> decode_dataset(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes);
    r.expect_magic("LSEQ");
    if (r.get<std::uint16_t>() != 1)
    {
        throw Error(ErrorCode::InvalidRecord, "unsupported LSEQ version");
    }
    const std::size_t count = r.get<std::uint32_t>();
    verify_crc_trailer(bytes, 10);
    std::vector<LabeledSequence> out(count);
    for (auto& s : out)
    {
        s.au_class = r.get<std::int32_t>();
        s.subject = r.get<std::uint32_t>();
        s.split = r.get<std::uint8_t>() == 0 ? Split::train : Split::test;
        const auto len = r.get<std::uint32_t>();
        const auto name = r.get_bytes(len);
        s.video.assign(name.begin(), name.end());
        s.frames.size.width = r.get<std::uint16_t>();
        s.frames.size.height = r.get<std::uint16_t>();
        s.frames.t0 = r.get<std::uint64_t>();
        s.frames.window_len = r.get<std::uint64_t>();
        const std::size_t clip = r.get<std::uint32_t>();
        const std::size_t k = r.get<std::uint32_t>();
        const auto mask = r.get_bytes(clip);
        s.mask.assign(mask.begin(), mask.end());
        s.targets.resize(Eigen::Index(clip), Eigen::Index(k));
        for (Eigen::Index i = 0; i < s.targets.rows(); ++i)
        {
            for (Eigen::Index c = 0; c < s.targets.cols(); ++c)
            {
                s.targets(i, c) = r.get<double>();
            }
        }
        for (std::size_t f = 0; f < clip; ++f)
        {
            const auto start = r.get<std::uint64_t>();
            events::EventFrame frame(start, s.frames.window_len, s.frames.size);
            frame.span = r.get<std::uint64_t>();
            const auto nonzero = r.get<std::uint32_t>();
            for (std::uint32_t z = 0; z < nonzero; ++z)
            {
                const auto idx = r.get<std::uint32_t>();
                const auto c = r.get<std::uint16_t>();
                if (idx >= frame.counts.size())
                {
                    throw Error(ErrorCode::InvalidRecord, "frame count index out of range", f);
                }
                frame.counts[idx] = c;
            }
            s.frames.frames.push_back(std::move(frame));
        }
    }
    if (r.remaining() != 4)
    {
        throw Error(ErrorCode::InvalidRecord, "trailing bytes in LSEQ container");
    }
    return out;
}

inline std::size_t save_dataset(const std::vector<LabeledSequence>& data, const std::filesystem::path& path)
{
    return write_file(path, encode_dataset(data));
}

inline std::vector<LabeledSequence> load_dataset(const std::filesystem::path& path)
{
    return decode_dataset(read_file(path));
}

} // namespace crossmodal
} // namespace morphic

#endif /* MORPHIC_CROSSMODAL_HPP_ */
