/*
 * morphic - Cross-modal facial action unit supervision for event cameras.
 *
 * File: tests/test_crossmodal.cpp
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
#include "support.hpp"

#include "morphic/crossmodal.hpp"
#include "morphic/synth.hpp"

#include "gtest/gtest.h"

#include <set>
#include <sstream>

using namespace morphic;
using crossmodal::CoeffTrack;
using crossmodal::Manifest;
using crossmodal::ManifestRecord;
using crossmodal::Split;

namespace {

constexpr events::SensorSize kSize{8, 6};

events::FrameSequence frames_at(std::uint64_t start, std::uint64_t len, std::size_t n)
{
    events::FrameSequence seq;
    seq.size = kSize;
    seq.t0 = start;
    seq.window_len = len;
    for (std::size_t i = 0; i < n; ++i)
    {
        seq.frames.emplace_back(start + i * len, len, kSize);
    }
    return seq;
}

CoeffTrack random_track(Rng& rng, std::size_t n, Eigen::Index k, std::uint64_t t_hi)
{
    std::set<std::uint64_t> times;
    while (times.size() < n)
    {
        times.insert(rng.below(t_hi));
    }
    CoeffTrack track;
    track.times.assign(times.begin(), times.end());
    track.values.resize(Eigen::Index(n), k);
    for (Eigen::Index i = 0; i < track.values.size(); ++i)
    {
        track.values.data()[i] = rng.normal();
    }
    return track;
}

CoeffTrack regular_track(std::uint64_t start, std::uint64_t step, std::size_t n, Eigen::Index k)
{
    CoeffTrack track;
    track.values.resize(Eigen::Index(n), k);
    for (std::size_t i = 0; i < n; ++i)
    {
        track.times.push_back(start + i * step);
        for (Eigen::Index c = 0; c < k; ++c)
        {
            track.values(Eigen::Index(i), c) = double(i) + 0.01 * double(c);
        }
    }
    return track;
}

} // namespace

// --- ATRK --------------------------------------------------------------------

TEST(Atrk, RoundTripIsExact)
{
    Rng rng(1);
    const auto track = random_track(rng, 50, 7, 5'000'000);
    const auto path = test::scratch_dir("atrk") / "t.atrk";
    EXPECT_EQ(crossmodal::save_track(track, path), crossmodal::kAtrkHeaderSize + 50 * (8 + 8 * 7) + 4);
    EXPECT_EQ(crossmodal::load_track(path), track);
}

TEST(Atrk, EmptyTrackRoundTrips)
{
    CoeffTrack track;
    track.values.resize(0, 3);
    const auto back = crossmodal::decode_track(crossmodal::encode_track(track));
    EXPECT_TRUE(back.empty());
    EXPECT_EQ(back.dims(), 3);
}

TEST(Atrk, CorruptionDetected)
{
    Rng rng(2);
    const auto bytes = crossmodal::encode_track(random_track(rng, 10, 3, 1'000'000));
    auto flipped = bytes;
    flipped[40] ^= 0x10;
    EXPECT_EQ(test::caught([&] { crossmodal::decode_track(flipped); })->code(), ErrorCode::ChecksumMismatch);
    auto truncated = bytes;
    truncated.resize(bytes.size() - 9);
    EXPECT_EQ(test::caught([&] { crossmodal::decode_track(truncated); })->code(), ErrorCode::TruncatedPayload);
    auto longer = bytes;
    longer.push_back(0);
    EXPECT_EQ(test::caught([&] { crossmodal::decode_track(longer); })->code(), ErrorCode::InvalidRecord);
    auto magic = bytes;
    magic[0] = 'X';
    EXPECT_TRUE(test::caught([&] { crossmodal::decode_track(magic); }));
}

TEST(Atrk, RejectsNonMonotonicTrack)
{
    auto track = regular_track(0, 10, 4, 2);
    track.times[2] = track.times[1];
    const auto err = test::caught([&] { crossmodal::encode_track(track); });
    ASSERT_TRUE(err);
    EXPECT_EQ(err->code(), ErrorCode::NonMonotonicTimestamp);
    EXPECT_EQ(*err->index(), 2u);
}

// --- nearest alignment -------------------------------------------------------

TEST(AlignNearest, EqualCadencePairsIdentically)
{
    const auto track = regular_track(0, 33'333, 75, 4);
    const auto frames = frames_at(0, 33'333, 75);
    const auto idx = crossmodal::nearest_indices(track, frames);
    for (std::size_t i = 0; i < idx.size(); ++i)
    {
        EXPECT_EQ(idx[i], i);
    }
    EXPECT_EQ(crossmodal::align_nearest(track, frames), track.values);
}

TEST(AlignNearest, DoubleRateUsesEachEntryTwice)
{
    // Track entries stamped at the centres of 30 Hz exposures.
    const auto track = regular_track(16'666, 33'332, 30, 2);
    const auto frames = frames_at(0, 16'666, 60);
    const auto idx = crossmodal::nearest_indices(track, frames);
    std::vector<int> uses(track.size(), 0);
    for (const auto i : idx)
    {
        ++uses[i];
    }
    for (std::size_t k = 0; k < uses.size(); ++k)
    {
        EXPECT_EQ(uses[k], 2) << k;
    }
}

TEST(AlignNearest, SingleEntryServesEveryFrame)
{
    const auto track = regular_track(500'000, 1, 1, 3);
    const auto frames = frames_at(0, 33'000, 40);
    const auto out = crossmodal::align_nearest(track, frames);
    ASSERT_EQ(out.rows(), 40);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
    {
        EXPECT_EQ(out.row(r), track.values.row(0));
    }
}

TEST(AlignNearest, TieGoesToEarlierEntry)
{
    CoeffTrack track = regular_track(0, 100, 2, 1);
    const auto frames = frames_at(40, 20, 1); // midpoint 50
    EXPECT_EQ(crossmodal::nearest_indices(track, frames)[0], 0u);
}

TEST(AlignNearest, EmptyTrackRejected)
{
    CoeffTrack track;
    track.values.resize(0, 2);
    EXPECT_EQ(test::caught([&] { crossmodal::align_nearest(track, frames_at(0, 10, 2)); })->code(),
              ErrorCode::EmptyTrack);
    EXPECT_EQ(test::caught([&] { crossmodal::align_interpolated(track, frames_at(0, 10, 2)); })->code(),
              ErrorCode::EmptyTrack);
}

TEST(AlignNearest, MatchesExhaustiveSearch)
{
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial)
    {
        const auto track = random_track(rng, 1 + rng.below(20), 1, 2'000'000);
        const auto frames = frames_at(rng.below(1'000'000), 1 + rng.below(100'000), 1 + rng.below(30));
        const auto idx = crossmodal::nearest_indices(track, frames);
        for (std::size_t f = 0; f < frames.length(); ++f)
        {
            // doubled times keep the midpoint integral
            const auto mid2 = std::int64_t(2 * frames.frames[f].window_start + frames.frames[f].window_len);
            std::size_t best = 0;
            for (std::size_t i = 1; i < track.size(); ++i)
            {
                if (std::llabs(2 * std::int64_t(track.times[i]) - mid2) <
                    std::llabs(2 * std::int64_t(track.times[best]) - mid2))
                {
                    best = i;
                }
            }
            ASSERT_EQ(idx[f], best) << "trial " << trial << " frame " << f;
        }
    }
}

// --- interpolation -----------------------------------------------------------

TEST(AlignInterpolated, OnEntryReturnsEntry)
{
    const auto track = regular_track(0, 1000, 5, 3);
    const auto frames = frames_at(1500, 1000, 2); // midpoints 2000, 3000
    const auto out = crossmodal::align_interpolated(track, frames);
    EXPECT_EQ(out.row(0), track.values.row(2));
    EXPECT_EQ(out.row(1), track.values.row(3));
}

TEST(AlignInterpolated, HalfwayIsMean)
{
    CoeffTrack track;
    track.times = {0, 1000};
    track.values.resize(2, 3);
    track.values.row(0).setZero();
    track.values.row(1) << 2.0, -4.0, 1.0;
    const auto out = crossmodal::align_interpolated(track, frames_at(400, 200, 1));
    EXPECT_EQ(out.row(0), (track.values.row(1) / 2.0).eval());
}

TEST(AlignInterpolated, ClampsOutsideSpan)
{
    const auto track = regular_track(10'000, 1000, 4, 2);
    const auto out = crossmodal::align_interpolated(track, frames_at(0, 100, 1));
    EXPECT_EQ(out.row(0), track.values.row(0));
    const auto late = crossmodal::align_interpolated(track, frames_at(90'000, 100, 1));
    EXPECT_EQ(late.row(0), track.values.row(3));
}

TEST(AlignInterpolated, MatchesTwoPointOracle)
{
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial)
    {
        const auto track = random_track(rng, 2 + rng.below(15), 4, 1'000'000);
        for (int q = 0; q < 20; ++q)
        {
            const double t = rng.uniform(-1000.0, 1'001'000.0);
            Eigen::RowVectorXd expect;
            if (t <= double(track.times.front()))
            {
                expect = track.values.row(0);
            }
            else if (t >= double(track.times.back()))
            {
                expect = track.values.bottomRows(1);
            }
            else
            {
                std::size_t i = 0;
                while (!(double(track.times[i]) <= t && t < double(track.times[i + 1])))
                {
                    ++i;
                }
                const double a = double(track.times[i]), b = double(track.times[i + 1]);
                const Eigen::RowVectorXd v0 = track.values.row(Eigen::Index(i));
                const Eigen::RowVectorXd v1 = track.values.row(Eigen::Index(i + 1));
                expect = v0 + (v1 - v0) * ((t - a) / (b - a));
                const Eigen::RowVectorXd lo = v0.cwiseMin(v1), hi = v0.cwiseMax(v1);
                const auto got = crossmodal::interpolate_at(track, t);
                EXPECT_TRUE(((got.array() >= lo.array() - 1e-15) && (got.array() <= hi.array() + 1e-15)).all());
            }
            EXPECT_LE((crossmodal::interpolate_at(track, t) - expect).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

// --- manifest ----------------------------------------------------------------

namespace {

Manifest parse(const std::string& text, bool check = false)
{
    std::istringstream in(text);
    return crossmodal::parse_manifest(in, "/data", check);
}

} // namespace

TEST(ManifestFile, ParsesRecords)
{
    const auto m = parse("{\"events\":\"a.evt\",\"coeffs\":\"a.atrk\",\"au\":3,\"subject\":2,\"split\":\"test\"}\n"
                         "\n"
                         "{\"events\":\"/abs/b.evt\",\"landmarks\":\"b.json\",\"au\":0,\"subject\":1,"
                         "\"split\":\"train\",\"video\":\"vid_b\"}\n");
    ASSERT_EQ(m.records.size(), 2u);
    EXPECT_EQ(m.records[0].events, std::filesystem::path("/data/a.evt"));
    EXPECT_EQ(*m.records[0].coeffs, std::filesystem::path("/data/a.atrk"));
    EXPECT_FALSE(m.records[0].landmarks);
    EXPECT_EQ(m.records[0].video, "a");
    EXPECT_EQ(m.records[0].split, Split::test);
    EXPECT_EQ(m.records[1].events, std::filesystem::path("/abs/b.evt"));
    EXPECT_EQ(m.records[1].video, "vid_b");
    EXPECT_EQ(m.records[1].au, 0);
    EXPECT_EQ(m.records[1].subject, 1u);
}

TEST(ManifestFile, StrictAboutKeysAndValues)
{
    const std::string ok = "\"events\":\"a.evt\",\"coeffs\":\"a.atrk\",\"au\":1,\"subject\":0";
    auto code = [&](const std::string& line) {
        return test::caught([&] { parse(line); })->code();
    };
    EXPECT_EQ(code("{" + ok + ",\"split\":\"train\",\"extra\":1}"), ErrorCode::InvalidRecord);
    EXPECT_EQ(code("{" + ok + ",\"split\":\"dev\"}"), ErrorCode::InvalidRecord);
    EXPECT_EQ(code("{" + ok + "}"), ErrorCode::InvalidRecord);
    EXPECT_EQ(code("{\"events\":\"a.evt\",\"au\":1,\"subject\":0,\"split\":\"train\"}"), ErrorCode::InvalidRecord);
    EXPECT_EQ(code("not json"), ErrorCode::InvalidRecord);
    const auto err = test::caught([&] { parse("{" + ok + ",\"split\":\"train\"}\n{" + ok + "}\n"); });
    EXPECT_EQ(*err->index(), 1u);
}

TEST(ManifestFile, MissingPathsRejectedAtLoad)
{
    const auto err = test::caught(
        [] { parse("{\"events\":\"none.evt\",\"coeffs\":\"none.atrk\",\"au\":1,\"subject\":0,\"split\":\"train\"}", true); });
    ASSERT_TRUE(err);
    EXPECT_EQ(err->code(), ErrorCode::Io);
}

TEST(ManifestFile, FormatRoundTrip)
{
    const auto m = parse("{\"events\":\"v/a.evt\",\"coeffs\":\"v/a.atrk\",\"au\":5,\"subject\":9,\"split\":\"test\"}\n"
                         "{\"events\":\"v/b.evt\",\"landmarks\":\"v/b.json\",\"au\":2,\"subject\":8,\"split\":\"train\"}\n");
    const auto text = crossmodal::format_manifest(m, "/data");
    std::istringstream in(text);
    const auto back = crossmodal::parse_manifest(in, "/data", false);
    ASSERT_EQ(back.records.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i)
    {
        EXPECT_EQ(back.records[i].events, m.records[i].events);
        EXPECT_EQ(back.records[i].coeffs, m.records[i].coeffs);
        EXPECT_EQ(back.records[i].landmarks, m.records[i].landmarks);
        EXPECT_EQ(back.records[i].au, m.records[i].au);
        EXPECT_EQ(back.records[i].subject, m.records[i].subject);
        EXPECT_EQ(back.records[i].split, m.records[i].split);
        EXPECT_EQ(back.records[i].video, m.records[i].video);
    }
    EXPECT_NE(text.find("\"events\":\"v/a.evt\""), std::string::npos);
}

// --- splits ------------------------------------------------------------------

namespace {

Manifest hundred_records()
{
    Manifest m;
    for (int i = 0; i < 100; ++i)
    {
        ManifestRecord r;
        r.video = "video_" + std::to_string(i);
        r.events = r.video + ".evt";
        r.coeffs = r.video + ".atrk";
        r.au = i % 24;
        r.subject = std::uint32_t(i % 10);
        m.records.push_back(r);
    }
    return m;
}

std::size_t count_test(const Manifest& m)
{
    return std::size_t(std::count_if(m.records.begin(), m.records.end(), [](const auto& r) { return r.split == Split::test; }));
}

} // namespace

TEST(Splits, ByVideoIsEightyTwenty)
{
    auto m = hundred_records();
    crossmodal::assign_splits(m, crossmodal::SplitMode::by_video, 42);
    EXPECT_EQ(count_test(m), 20u);
    auto again = hundred_records();
    crossmodal::assign_splits(again, crossmodal::SplitMode::by_video, 42);
    auto other = hundred_records();
    crossmodal::assign_splits(other, crossmodal::SplitMode::by_video, 43);
    bool differs = false;
    for (std::size_t i = 0; i < 100; ++i)
    {
        EXPECT_EQ(m.records[i].split, again.records[i].split);
        differs |= m.records[i].split != other.records[i].split;
    }
    EXPECT_TRUE(differs);
}

TEST(Splits, BySubjectKeepsSubjectsDisjoint)
{
    auto m = hundred_records();
    crossmodal::assign_splits(m, crossmodal::SplitMode::by_subject, 7);
    std::set<std::uint32_t> train, test;
    for (const auto& r : m.records)
    {
        (r.split == Split::train ? train : test).insert(r.subject);
    }
    for (const auto s : test)
    {
        EXPECT_FALSE(train.count(s));
    }
    EXPECT_EQ(count_test(m), 20u); // ten subjects of ten videos each
}

TEST(Splits, SmallFractions)
{
    auto m = hundred_records();
    m.records.resize(7);
    crossmodal::assign_splits(m, crossmodal::SplitMode::by_video, 1);
    EXPECT_EQ(count_test(m), 1u);
    crossmodal::assign_splits(m, crossmodal::SplitMode::by_video, 1, 0.0);
    EXPECT_EQ(count_test(m), 0u);
}

// --- dataset -----------------------------------------------------------------

namespace {

struct Video
{
    std::filesystem::path events;
    std::filesystem::path coeffs;
};

/// Uniform random events over [t_lo, t_hi) and a 30 Hz track over the same span.
Video write_video(const std::filesystem::path& dir, const std::string& name, std::uint64_t t_lo, std::uint64_t t_hi,
                  std::uint64_t seed)
{
    Rng rng(seed);
    const auto ev = test::random_events(rng, 4000, kSize, t_lo, t_hi);
    Video v{dir / (name + ".evt"), dir / (name + ".atrk")};
    events::write_event_stream(ev, kSize, v.events);
    CoeffTrack track;
    for (std::uint64_t t = t_lo; t < t_hi; t += 33'333)
    {
        track.times.push_back(t);
    }
    track.values.resize(Eigen::Index(track.size()), 3);
    for (Eigen::Index i = 0; i < track.values.rows(); ++i)
    {
        track.values.row(i) << double(i), std::sin(double(i)), 1.0;
    }
    crossmodal::save_track(track, v.coeffs);
    return v;
}

ManifestRecord record_for(const Video& v, int au, std::uint32_t subject = 0)
{
    ManifestRecord r;
    r.video = v.events.stem().string();
    r.events = v.events;
    r.coeffs = v.coeffs;
    r.au = au;
    r.subject = subject;
    return r;
}

} // namespace

TEST(Dataset, LongVideoIsCentreCropped)
{
    const auto dir = test::scratch_dir("dataset_long");
    const auto v = write_video(dir, "long", 1'000'000, 5'000'000, 1);
    Manifest m;
    m.records.push_back(record_for(v, 4, 2));
    crossmodal::DatasetConfig cfg;
    cfg.window_len = 33'000;
    cfg.clip_len = 75;
    const auto data = crossmodal::build_dataset(m, cfg);
    ASSERT_EQ(data.size(), 1u);
    const auto& s = data[0];
    ASSERT_EQ(s.frames.length(), 75u);
    EXPECT_EQ(s.targets.rows(), 75);
    EXPECT_EQ(s.real_frames(), 75u);
    EXPECT_EQ(s.au_class, 4);
    EXPECT_EQ(s.subject, 2u);
    EXPECT_EQ(s.video, "long");
    const auto& last = s.frames.frames.back();
    EXPECT_EQ(last.window_start + last.window_len - s.frames.frames.front().window_start, 2'475'000u);
    // 121 full windows from the track start, centre crop drops 23 on each side
    EXPECT_EQ(s.frames.frames.front().window_start, 1'000'000u + 23u * 33'000u);
    for (std::size_t f = 1; f < 75; ++f)
    {
        EXPECT_EQ(s.frames.frames[f].window_start, s.frames.frames[f - 1].window_start + 33'000u);
    }
}

TEST(Dataset, ShortVideoIsPaddedAndMasked)
{
    const auto dir = test::scratch_dir("dataset_short");
    const auto v = write_video(dir, "short", 0, 1'000'000, 2);
    Manifest m;
    m.records.push_back(record_for(v, 1));
    crossmodal::DatasetConfig cfg;
    cfg.window_len = 33'000;
    cfg.clip_len = 75;
    const auto s = crossmodal::build_dataset(m, cfg).at(0);
    ASSERT_EQ(s.frames.length(), 75u);
    const std::size_t real = s.real_frames();
    EXPECT_EQ(real, 30u);
    for (std::size_t f = 0; f < 75; ++f)
    {
        EXPECT_EQ(s.mask[f], f < real ? 1 : 0);
        if (f >= real)
        {
            EXPECT_EQ(s.frames.frames[f].total(), 0u);
            EXPECT_EQ(s.targets.row(Eigen::Index(f)), s.targets.row(Eigen::Index(real - 1)));
        }
    }
    std::uint64_t events_in_real = 0;
    for (std::size_t f = 0; f < real; ++f)
    {
        events_in_real += s.frames.frames[f].total();
    }
    EXPECT_GT(events_in_real, 3000u);
}

TEST(Dataset, NearestAndInterpolatedTargets)
{
    const auto dir = test::scratch_dir("dataset_align");
    const auto v = write_video(dir, "align", 0, 2'000'000, 3);
    Manifest m;
    m.records.push_back(record_for(v, 0));
    crossmodal::DatasetConfig cfg;
    cfg.window_len = 33'333;
    cfg.clip_len = 20;
    const auto track = crossmodal::load_track(v.coeffs);
    const auto near = crossmodal::build_dataset(m, cfg).at(0);
    EXPECT_EQ(near.targets, crossmodal::align_nearest(track, near.frames));
    cfg.alignment = crossmodal::Alignment::interpolated;
    const auto interp = crossmodal::build_dataset(m, cfg).at(0);
    EXPECT_EQ(interp.targets, crossmodal::align_interpolated(track, interp.frames));
    EXPECT_NE(interp.targets, near.targets);
}

TEST(Dataset, ErrorsCarryRecordIndex)
{
    const auto dir = test::scratch_dir("dataset_errors");
    const auto a = write_video(dir, "a", 0, 1'000'000, 4);
    const auto b = write_video(dir, "b", 0, 1'000'000, 5);
    crossmodal::DatasetConfig cfg;

    Manifest m;
    m.records.push_back(record_for(a, 0));
    m.records.push_back(record_for(b, 24));
    auto err = test::caught([&] { crossmodal::build_dataset(m, cfg); });
    EXPECT_EQ(err->code(), ErrorCode::BadLabel);
    EXPECT_EQ(*err->index(), 1u);

    // coefficients from a later recording than the events
    CoeffTrack late;
    late.times = {5'000'000, 5'033'333};
    late.values = Eigen::MatrixXd::Zero(2, 3);
    crossmodal::save_track(late, dir / "late.atrk");
    m.records[1] = record_for(b, 2);
    m.records[1].coeffs = dir / "late.atrk";
    err = test::caught([&] { crossmodal::build_dataset(m, cfg); });
    EXPECT_EQ(err->code(), ErrorCode::NoTemporalOverlap);
    EXPECT_EQ(*err->index(), 1u);

    m.records[1].coeffs.reset();
    m.records[1].landmarks = dir / "b.json";
    EXPECT_EQ(test::caught([&] { crossmodal::build_dataset(m, cfg); })->code(), ErrorCode::InvalidArgument);

    cfg.window_len = 0;
    EXPECT_EQ(test::caught([&] { crossmodal::build_dataset(m, cfg); })->code(), ErrorCode::ZeroWindow);
}

TEST(Dataset, HundredRecordsSplitEightyTwenty)
{
    const auto dir = test::scratch_dir("dataset_hundred");
    const auto v = write_video(dir, "shared", 0, 400'000, 6);
    auto m = hundred_records();
    for (auto& r : m.records)
    {
        r.events = v.events;
        r.coeffs = v.coeffs;
    }
    crossmodal::assign_splits(m, crossmodal::SplitMode::by_video, 2024);
    crossmodal::DatasetConfig cfg;
    cfg.clip_len = 10;
    const auto data = crossmodal::build_dataset(m, cfg);
    ASSERT_EQ(data.size(), 100u);
    const auto tests = std::count_if(data.begin(), data.end(), [](const auto& s) { return s.split == Split::test; });
    EXPECT_EQ(tests, 20);
    for (std::size_t i = 0; i < data.size(); ++i)
    {
        EXPECT_EQ(data[i].video, m.records[i].video);
        EXPECT_EQ(data[i].au_class, m.records[i].au);
    }
}

TEST(Dataset, LandmarkRecordsAreFitted)
{
    const auto dir = test::scratch_dir("dataset_landmarks");
    synth::FaceConfig fc;
    fc.vertex_count = 384;
    const auto face = synth::make_synthetic_face(fc);
    const auto traj = synth::make_trajectory(3, synth::TrajectoryConfig{}, 9);
    const auto cam = synth::make_camera(100.0, 0.1, 0.0, 0.0, {4.0, 3.0});
    const auto lms = synth::render_landmarks(traj.track, face.au, {cam});
    fitting::save_landmarks_json(lms, dir / "v.json");
    Rng rng(7);
    events::write_event_stream(test::random_events(rng, 3000, kSize, 0, 2'600'000), kSize, dir / "v.evt");

    Manifest m;
    ManifestRecord r;
    r.video = "v";
    r.events = dir / "v.evt";
    r.landmarks = dir / "v.json";
    r.au = 3;
    m.records.push_back(r);
    crossmodal::DatasetConfig cfg;
    cfg.clip_len = 75;
    crossmodal::LandmarkFitting models{face.identity, face.au};
    models.identity_cfg.lambda_reg = 0.0;
    models.au_cfg.lambda_reg = 0.0;
    cfg.fitting = models;

    const auto track = crossmodal::fit_landmark_track(lms, models);
    EXPECT_LE((track.values - traj.track.values).cwiseAbs().maxCoeff(), 1e-8);
    const auto s = crossmodal::build_dataset(m, cfg).at(0);
    EXPECT_EQ(s.targets.cols(), 8);
    EXPECT_LE((s.targets - crossmodal::align_nearest(traj.track, s.frames)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Dataset, BuildIsDeterministic)
{
    const auto dir = test::scratch_dir("dataset_det");
    Manifest m;
    for (int i = 0; i < 12; ++i)
    {
        m.records.push_back(record_for(write_video(dir, "v" + std::to_string(i), 0, 3'000'000, 10 + i), i));
    }
    crossmodal::DatasetConfig cfg;
    const auto a = crossmodal::encode_dataset(crossmodal::build_dataset(m, cfg));
    const auto b = crossmodal::encode_dataset(crossmodal::build_dataset(m, cfg));
    EXPECT_EQ(a, b);
}

// --- LSEQ --------------------------------------------------------------------

TEST(Lseq, RoundTripAndCorruption)
{
    const auto dir = test::scratch_dir("lseq");
    Manifest m;
    m.records.push_back(record_for(write_video(dir, "a", 0, 4'000'000, 20), 5, 1));
    m.records.push_back(record_for(write_video(dir, "b", 0, 900'000, 21), 7, 2));
    m.records[1].split = Split::test;
    crossmodal::DatasetConfig cfg;
    const auto data = crossmodal::build_dataset(m, cfg);
    crossmodal::save_dataset(data, dir / "d.lseq");
    const auto back = crossmodal::load_dataset(dir / "d.lseq");
    ASSERT_EQ(back.size(), data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
    {
        EXPECT_EQ(back[i].frames, data[i].frames);
        EXPECT_EQ(back[i].targets, data[i].targets);
        EXPECT_EQ(back[i].mask, data[i].mask);
        EXPECT_EQ(back[i].au_class, data[i].au_class);
        EXPECT_EQ(back[i].subject, data[i].subject);
        EXPECT_EQ(back[i].split, data[i].split);
        EXPECT_EQ(back[i].video, data[i].video);
    }
    auto bytes = crossmodal::encode_dataset(data);
    bytes[bytes.size() / 2] ^= 1;
    EXPECT_EQ(test::caught([&] { crossmodal::decode_dataset(bytes); })->code(), ErrorCode::ChecksumMismatch);
}
