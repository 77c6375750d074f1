/*
 * morphic - Cross-modal facial action unit supervision for event cameras.
 *
 * File: tests/test_common.cpp
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
#include "morphic/common.hpp"

#include "support.hpp"

#include "gtest/gtest.h"

#include <atomic>
#include <cstdlib>
#include <set>
#include <string_view>

using namespace morphic;

namespace {

// Bitwise reflected CRC-32 (polynomial 0xEDB88320), independent of zlib.
std::uint32_t crc32_bitwise(std::span<const std::uint8_t> bytes)
{
    std::uint32_t crc = 0xffffffffu;
    for (const auto b : bytes)
    {
        crc ^= b;
        for (int k = 0; k < 8; ++k)
        {
            crc = (crc >> 1) ^ (0xedb88320u & (0u - (crc & 1u)));
        }
    }
    return ~crc;
}

} // namespace

TEST(Crc32, CheckValue)
{
    const std::string_view text = "123456789";
    EXPECT_EQ(crc32(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size())), 0xCBF43926u);
}

TEST(Crc32, MatchesBitwiseOracle)
{
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial)
    {
        std::vector<std::uint8_t> bytes(rng.below(4096));
        for (auto& b : bytes)
        {
            b = static_cast<std::uint8_t>(rng.below(256));
        }
        EXPECT_EQ(crc32(bytes), crc32_bitwise(bytes));
    }
}

TEST(ByteIo, RoundTripAndTruncation)
{
    ByteWriter w;
    w.put_magic("ABCD");
    w.put<std::uint16_t>(0xBEEF);
    w.put<double>(-1.25);
    w.put_zeros(3);
    const auto bytes = w.release();
    ASSERT_EQ(bytes.size(), 4u + 2 + 8 + 3);
    EXPECT_EQ(bytes[4], 0xEF); // little-endian
    ByteReader r(bytes);
    r.expect_magic("ABCD");
    EXPECT_EQ(r.get<std::uint16_t>(), 0xBEEF);
    EXPECT_EQ(r.get<double>(), -1.25);
    EXPECT_EQ(r.remaining(), 3u);
    const auto e = test::caught([&] { r.get<std::uint32_t>(); });
    ASSERT_TRUE(e);
    EXPECT_EQ(e->code(), ErrorCode::TruncatedPayload);

    ByteReader bad(bytes);
    EXPECT_EQ(test::caught([&] { bad.expect_magic("WXYZ"); })->code(), ErrorCode::BadMagic);
}

TEST(ByteIo, CrcTrailer)
{
    ByteWriter w;
    w.put_magic("HDR!");
    w.put<std::uint64_t>(42);
    w.put<std::uint32_t>(crc32(std::span(w.bytes()).subspan(4)));
    auto bytes = w.release();
    EXPECT_NO_THROW(verify_crc_trailer(bytes, 4));
    bytes[5] ^= 1;
    EXPECT_EQ(test::caught([&] { verify_crc_trailer(bytes, 4); })->code(), ErrorCode::ChecksumMismatch);
}

TEST(Rng, Deterministic)
{
    Rng a(11), b(11), c(12);
    bool differs = false;
    for (int i = 0; i < 100; ++i)
    {
        const double x = a.uniform();
        EXPECT_EQ(x, b.uniform());
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 1.0);
        differs = differs || x != c.uniform();
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, NormalMoments)
{
    Rng rng(5);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const double v = rng.normal();
        s += v;
        s2 += v * v;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, BelowAndShuffle)
{
    Rng rng(9);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 7000; ++i)
    {
        ++counts[rng.below(7)];
    }
    for (const int c : counts)
    {
        EXPECT_GT(c, 850);
        EXPECT_LT(c, 1150);
    }
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i)
    {
        v[i] = i;
    }
    rng.shuffle(v);
    EXPECT_EQ(std::set<int>(v.begin(), v.end()).size(), 50u);
}

TEST(StableHash, SeedAndTextSensitive)
{
    EXPECT_EQ(stable_hash("abc", 1), stable_hash("abc", 1));
    EXPECT_NE(stable_hash("abc", 1), stable_hash("abc", 2));
    EXPECT_NE(stable_hash("abc", 1), stable_hash("abd", 1));
}

TEST(ParallelFor, VisitsEveryIndexOnceAndRethrows)
{
    ::setenv("MORPHIC_THREADS", "4", 1);
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits)
    {
        EXPECT_EQ(h.load(), 1);
    }
    const auto e = test::caught([] {
        parallel_for(100, [](std::size_t i) {
            if (i == 17 || i == 80)
            {
                throw Error(ErrorCode::InvalidRecord, "boom", i);
            }
        });
    });
    ASSERT_TRUE(e);
    EXPECT_EQ(e->index(), 17u);
    ::unsetenv("MORPHIC_THREADS");
}

TEST(ParallelFor, ThreadCountFromEnvironment)
{
    ::setenv("MORPHIC_THREADS", "3", 1);
    EXPECT_EQ(worker_count(), 3u);
    ::setenv("MORPHIC_THREADS", "0", 1);
    EXPECT_GE(worker_count(), 1u);
    ::unsetenv("MORPHIC_THREADS");
}
