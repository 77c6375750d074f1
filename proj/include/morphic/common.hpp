/*
 * morphic - Cross-modal facial action unit supervision for event cameras.
 *
 * File: include/morphic/common.hpp
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

#ifndef MORPHIC_COMMON_HPP_
#define MORPHIC_COMMON_HPP_

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

static_assert(std::endian::native == std::endian::little, "morphic containers assume a little-endian host");

namespace morphic {

/**
 * Machine-readable error categories. Every error raised by the library is a
 * morphic::Error carrying one of these codes.
 */
enum class ErrorCode
{
    BadMagic,
    TruncatedPayload,
    ChecksumMismatch,
    OutOfBounds,
    NonMonotonicTimestamp,
    InvalidRecord,
    EventBeforeOrigin,
    ZeroWindow,
    DimensionMismatch,
    TooFewMeshes,
    MixedTags,
    MissingNeutralPair,
    TooFewOffsets,
    DegenerateLandmarks,
    ScaleBelowMin,
    SingularSystem,
    EmptyTrack,
    NoTemporalOverlap,
    BadLabel,
    NonFiniteLoss,
    InvalidArgument,
    Io,
};

inline const char* to_string(ErrorCode code) noexcept
{
    switch (code)
    {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::EventBeforeOrigin: return "EventBeforeOrigin";
    case ErrorCode::ZeroWindow: return "ZeroWindow";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooFewMeshes: return "TooFewMeshes";
    case ErrorCode::MixedTags: return "MixedTags";
    case ErrorCode::MissingNeutralPair: return "MissingNeutralPair";
    case ErrorCode::TooFewOffsets: return "TooFewOffsets";
    case ErrorCode::DegenerateLandmarks: return "DegenerateLandmarks";
    case ErrorCode::ScaleBelowMin: return "ScaleBelowMin";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::EmptyTrack: return "EmptyTrack";
    case ErrorCode::NoTemporalOverlap: return "NoTemporalOverlap";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/**
 * Exception type used throughout the library. The optional index names the
 * offending record, frame, batch or manifest line, depending on the operation.
 */
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(compose(code, message, index)), code_(code), index_(index)
    {
    }

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    static std::string compose(ErrorCode code, const std::string& message, std::optional<std::size_t> index)
    {
        std::string s = std::string(to_string(code)) + ": " + message;
        if (index)
        {
            s += " (index " + std::to_string(*index) + ")";
        }
        return s;
    }

    ErrorCode code_;
    std::optional<std::size_t> index_;
};

/// IEEE CRC-32, as used by zlib and PNG.
inline std::uint32_t crc32(std::span<const std::uint8_t> bytes)
{
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed large buffers in chunks.
    std::size_t offset = 0;
    while (offset < bytes.size())
    {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
        crc = ::crc32(crc, bytes.data() + offset, chunk);
        offset += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

/**
 * Appends little-endian scalars to a growing byte buffer.
 */
class ByteWriter
{
public:
    template <typename T>
    void put(T value)
    {
        static_assert(std::is_trivially_copyable_v<T>);
        const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
        bytes_.insert(bytes_.end(), p, p + sizeof(T));
    }

    void put_bytes(std::span<const std::uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }

    void put_magic(std::string_view magic) { bytes_.insert(bytes_.end(), magic.begin(), magic.end()); }

    void put_zeros(std::size_t count) { bytes_.insert(bytes_.end(), count, std::uint8_t{0}); }

    std::size_t size() const noexcept { return bytes_.size(); }
    const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
    std::vector<std::uint8_t>&& release() noexcept { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

/**
 * Bounds-checked little-endian reader over a byte span. Reading past the end
 * raises TruncatedPayload.
 */
class ByteReader
{
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <typename T>
    T get()
    {
        static_assert(std::is_trivially_copyable_v<T>);
        require(sizeof(T));
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::span<const std::uint8_t> get_bytes(std::size_t count)
    {
        require(count);
        auto out = bytes_.subspan(pos_, count);
        pos_ += count;
        return out;
    }

    void expect_magic(std::string_view magic)
    {
        if (bytes_.size() - pos_ < magic.size() ||
            std::memcmp(bytes_.data() + pos_, magic.data(), magic.size()) != 0)
        {
            throw Error(ErrorCode::BadMagic, "expected magic '" + std::string(magic) + "'");
        }
        pos_ += magic.size();
    }

    void require(std::size_t count) const
    {
        if (bytes_.size() - pos_ < count)
        {
            throw Error(ErrorCode::TruncatedPayload, "need " + std::to_string(count) + " bytes at offset " +
                                                         std::to_string(pos_) + ", have " +
                                                         std::to_string(bytes_.size() - pos_));
        }
    }

    std::size_t position() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    std::span<const std::uint8_t> data() const noexcept { return bytes_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

/**
 * Validates the trailing CRC-32 of a container: the checksum covers bytes
 * [payload_begin, size - 4). Returns the span of the payload.
 */
inline std::span<const std::uint8_t> verify_crc_trailer(std::span<const std::uint8_t> bytes, std::size_t payload_begin)
{
    if (bytes.size() < payload_begin + 4)
    {
        throw Error(ErrorCode::TruncatedPayload, "container shorter than its header and checksum");
    }
    const auto payload = bytes.subspan(payload_begin, bytes.size() - 4 - payload_begin);
    std::uint32_t stored;
    std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
    if (stored != crc32(payload))
    {
        throw Error(ErrorCode::ChecksumMismatch, "payload checksum does not match trailer");
    }
    return payload;
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
    }
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::size_t write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
    {
        throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
    {
        throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
    }
    return bytes.size();
}

inline std::size_t write_text_file(const std::filesystem::path& path, std::string_view text)
{
    return write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/**
 * Seeded random source with platform-independent output. The standard
 * distributions are implementation-defined, so uniform and normal variates
 * are derived directly from the mt19937_64 bit stream.
 */
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n)
    {
        // Rejection sampling for an unbiased result.
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do
        {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    /// Standard normal via Box-Muller (one variate cached).
    double normal()
    {
        if (cached_)
        {
            cached_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0)
        {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        cached_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i)
        {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool cached_ = false;
};

/// splitmix64 finalizer; used to derive independent sub-seeds and stable hashes.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// FNV-1a over a string, mixed with a seed.
inline std::uint64_t stable_hash(std::string_view text, std::uint64_t seed)
{
    std::uint64_t h = 0xcbf29ce484222325ull ^ mix64(seed);
    for (const char c : text)
    {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ull;
    }
    return mix64(h);
}

/**
 * Number of worker threads for internal parallel loops. Reads MORPHIC_THREADS
 * (0 or unset = hardware concurrency).
 */
inline unsigned worker_count()
{
    unsigned n = 0;
    if (const char* env = std::getenv("MORPHIC_THREADS"))
    {
        n = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    }
    if (n == 0)
    {
        n = std::max(1u, std::thread::hardware_concurrency());
    }
    return n;
}

/**
 * Runs fn(i) for i in [0, count). Work is split into contiguous blocks; each
 * index is visited exactly once, so callers writing to slot i get results that
 * do not depend on scheduling. The first exception (lowest index) is rethrown.
 */
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn)
{
    const std::size_t workers = std::min<std::size_t>(worker_count(), count);
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
        {
            fn(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
    {
        const std::size_t begin = count * w / workers;
        const std::size_t end = count * (w + 1) / workers;
        threads.emplace_back([&, begin, end] {
            for (std::size_t i = begin; i < end; ++i)
            {
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    errors[i] = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : threads)
    {
        t.join();
    }
    for (auto& e : errors)
    {
        if (e)
        {
            std::rethrow_exception(e);
        }
    }
}

} // namespace morphic

#endif /* MORPHIC_COMMON_HPP_ */
