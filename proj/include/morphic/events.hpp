/*
 * morphic - Cross-modal facial action unit supervision for event cameras.
 *
 * File: include/morphic/events.hpp
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

#ifndef MORPHIC_EVENTS_HPP_
#define MORPHIC_EVENTS_HPP_

#include "morphic/common.hpp"

#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace morphic {
namespace events {

/**
 * A single sensor event. Polarity is 1 for a brightness increase and 0 for a
 * decrease.
 */
struct Event
{
    std::uint64_t t = 0; ///< microseconds
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::uint8_t polarity = 0;

    friend bool operator==(const Event&, const Event&) = default;
};

struct SensorSize
{
    std::uint16_t width = 0;
    std::uint16_t height = 0;

    friend bool operator==(const SensorSize&, const SensorSize&) = default;
};

// EVT-B1 layout.
inline constexpr std::size_t kEvtHeaderSize = 12;
inline constexpr std::size_t kEvtRecordSize = 16;
inline constexpr std::uint16_t kEvtVersion = 1;

/**
 * A parsed EVT-B1 blob. The header is validated on construction; records are
 * decoded and validated lazily while iterating, so a malformed record surfaces
 * as an Error carrying its record index only when it is reached.
 */
class EventStream
{
public:
    explicit EventStream(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes))
    {
        ByteReader reader(bytes_);
        reader.expect_magic("NEVT");
        const auto version = reader.get<std::uint16_t>();
        if (version != kEvtVersion)
        {
            throw Error(ErrorCode::InvalidRecord, "unsupported EVT-B1 version " + std::to_string(version));
        }
        size_.width = reader.get<std::uint16_t>();
        size_.height = reader.get<std::uint16_t>();
        if (reader.get<std::uint16_t>() != 0)
        {
            throw Error(ErrorCode::InvalidRecord, "EVT-B1 reserved header field is not zero");
        }
        if (reader.remaining() % kEvtRecordSize != 0)
        {
            throw Error(ErrorCode::TruncatedPayload, "EVT-B1 body is not a whole number of 16-byte records",
                        reader.remaining() / kEvtRecordSize);
        }
        count_ = reader.remaining() / kEvtRecordSize;
    }

    SensorSize size() const noexcept { return size_; }
    std::size_t record_count() const noexcept { return count_; }

    class iterator
    {
    public:
        using iterator_category = std::input_iterator_tag;
        using value_type = Event;
        using difference_type = std::ptrdiff_t;
        using pointer = const Event*;
        using reference = const Event&;

        iterator() = default;

        reference operator*() const { return current_; }
        pointer operator->() const { return &current_; }

        iterator& operator++()
        {
            ++index_;
            load();
            return *this;
        }

        void operator++(int) { ++*this; }

        friend bool operator==(const iterator& a, const iterator& b) { return a.index_ == b.index_; }

    private:
        friend class EventStream;

        iterator(const EventStream* stream, std::size_t index) : stream_(stream), index_(index) { load(); }

        void load()
        {
            if (stream_ == nullptr || index_ >= stream_->count_)
            {
                return;
            }
            const Event e = stream_->decode(index_);
            if (index_ > 0 && e.t < previous_t_)
            {
                throw Error(ErrorCode::NonMonotonicTimestamp,
                            "timestamp " + std::to_string(e.t) + " precedes " + std::to_string(previous_t_), index_);
            }
            previous_t_ = e.t;
            current_ = e;
        }

        const EventStream* stream_ = nullptr;
        std::size_t index_ = 0;
        std::uint64_t previous_t_ = 0;
        Event current_{};
    };

    iterator begin() const { return iterator(this, 0); }
    iterator end() const { return iterator(this, count_); }

    /// Decodes and validates every record.
    std::vector<Event> read_all() const
    {
        std::vector<Event> out;
        out.reserve(count_);
        for (const Event& e : *this)
        {
            out.push_back(e);
        }
        return out;
    }

private:
    Event decode(std::size_t index) const
    {
        const std::uint8_t* p = bytes_.data() + kEvtHeaderSize + index * kEvtRecordSize;
        Event e;
        std::memcpy(&e.t, p, 8);
        std::memcpy(&e.x, p + 8, 2);
        std::memcpy(&e.y, p + 10, 2);
        e.polarity = p[12];
        if (e.x >= size_.width || e.y >= size_.height)
        {
            throw Error(ErrorCode::OutOfBounds,
                        "event at (" + std::to_string(e.x) + "," + std::to_string(e.y) + ") outside " +
                            std::to_string(size_.width) + "x" + std::to_string(size_.height),
                        index);
        }
        if (e.polarity > 1 || p[13] != 0 || p[14] != 0 || p[15] != 0)
        {
            throw Error(ErrorCode::InvalidRecord, "bad polarity or nonzero padding", index);
        }
        return e;
    }

    std::vector<std::uint8_t> bytes_;
    SensorSize size_;
    std::size_t count_ = 0;
};

/// Parses an in-memory EVT-B1 blob.
inline EventStream parse_event_stream(std::vector<std::uint8_t> bytes) { return EventStream(std::move(bytes)); }

inline EventStream load_event_stream(const std::filesystem::path& path) { return EventStream(read_file(path)); }

/**
 * Serializes events to EVT-B1. Events must lie inside the sensor, carry a 0/1
 * polarity and be ordered by non-decreasing timestamp.
 */
inline std::vector<std::uint8_t> encode_event_stream(std::span<const Event> events, SensorSize size)
{
    ByteWriter w;
    w.put_magic("NEVT");
    w.put<std::uint16_t>(kEvtVersion);
    w.put<std::uint16_t>(size.width);
    w.put<std::uint16_t>(size.height);
    w.put<std::uint16_t>(0);
    std::uint64_t previous = 0;
    for (std::size_t i = 0; i < events.size(); ++i)
    {
        const Event& e = events[i];
        if (e.x >= size.width || e.y >= size.height)
        {
            throw Error(ErrorCode::OutOfBounds, "event outside sensor", i);
        }
        if (e.polarity > 1)
        {
            throw Error(ErrorCode::InvalidRecord, "polarity must be 0 or 1", i);
        }
        if (i > 0 && e.t < previous)
        {
            throw Error(ErrorCode::NonMonotonicTimestamp, "events must be time ordered", i);
        }
        previous = e.t;
        w.put<std::uint64_t>(e.t);
        w.put<std::uint16_t>(e.x);
        w.put<std::uint16_t>(e.y);
        w.put<std::uint8_t>(e.polarity);
        w.put_zeros(3);
    }
    return w.release();
}

/// Writes an EVT-B1 file and returns the number of bytes written.
inline std::size_t write_event_stream(std::span<const Event> events, SensorSize size, const std::filesystem::path& path)
{
    return write_file(path, encode_event_stream(events, size));
}

/**
 * Reads the `t_us,x,y,p` CSV interchange format. Returns events in file order;
 * ordering and bounds are checked later by whoever consumes them.
 */
inline std::vector<Event> read_event_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
    {
        throw Error(ErrorCode::InvalidRecord, "empty CSV input");
    }
    if (!line.empty() && line.back() == '\r')
    {
        line.pop_back();
    }
    if (line != "t_us,x,y,p")
    {
        throw Error(ErrorCode::InvalidRecord, "CSV header must be 't_us,x,y,p'", 0);
    }
    std::vector<Event> out;
    std::size_t row = 0;
    while (std::getline(in, line))
    {
        ++row;
        if (line.empty() || line == "\r")
        {
            continue;
        }
        std::istringstream ss(line);
        unsigned long long t, x, y, p;
        char c1, c2, c3;
        if (!(ss >> t >> c1 >> x >> c2 >> y >> c3 >> p) || c1 != ',' || c2 != ',' || c3 != ',' || x > 0xffff ||
            y > 0xffff || p > 1)
        {
            throw Error(ErrorCode::InvalidRecord, "malformed CSV row '" + line + "'", row);
        }
        out.push_back(Event{t, static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y),
                            static_cast<std::uint8_t>(p)});
    }
    return out;
}

/**
 * Event counts accumulated over one window, laid out [polarity][y][x].
 * Counts saturate at 65535.
 */
struct EventFrame
{
    std::uint64_t window_start = 0;
    std::uint64_t window_len = 0;
    std::uint64_t span = 0; ///< equals window_len except for a flushed partial tail
    std::uint16_t width = 0;
    std::uint16_t height = 0;
    std::vector<std::uint16_t> counts;

    EventFrame() = default;
    EventFrame(std::uint64_t start, std::uint64_t len, SensorSize size)
        : window_start(start), window_len(len), span(len), width(size.width), height(size.height),
          counts(2 * std::size_t(size.width) * size.height, 0)
    {
    }

    std::size_t offset(int polarity, int x, int y) const
    {
        return (std::size_t(polarity) * height + std::size_t(y)) * width + std::size_t(x);
    }

    std::uint16_t count(int polarity, int x, int y) const { return counts[offset(polarity, x, y)]; }

    void add(const Event& e)
    {
        auto& c = counts[offset(e.polarity, e.x, e.y)];
        if (c != std::numeric_limits<std::uint16_t>::max())
        {
            ++c;
        }
    }

    std::uint64_t total() const
    {
        std::uint64_t s = 0;
        for (const auto c : counts)
        {
            s += c;
        }
        return s;
    }

    /// Sign of (positive - negative) per pixel, row-major: +1, -1 or 0.
    std::vector<std::int8_t> binarize() const
    {
        const std::size_t plane = std::size_t(width) * height;
        std::vector<std::int8_t> out(plane, 0);
        for (std::size_t i = 0; i < plane; ++i)
        {
            const int diff = int(counts[plane + i]) - int(counts[i]);
            out[i] = static_cast<std::int8_t>((diff > 0) - (diff < 0));
        }
        return out;
    }

    friend bool operator==(const EventFrame&, const EventFrame&) = default;
};

struct FrameSequence
{
    std::vector<EventFrame> frames;
    SensorSize size;
    std::uint64_t t0 = 0;
    std::uint64_t window_len = 0;

    std::size_t length() const noexcept { return frames.size(); }

    friend bool operator==(const FrameSequence&, const FrameSequence&) = default;
};

enum class TailPolicy
{
    drop_tail,
    flush_partial,
};

struct FrameOptions
{
    std::uint64_t window_len = 33'000; ///< Δt in microseconds
    std::optional<std::uint64_t> t0;   ///< defaults to the first event's timestamp
    /// Exclusive end of the recording. Defaults to one microsecond past the last event.
    std::optional<std::uint64_t> t_end;
    TailPolicy policy = TailPolicy::drop_tail;
};

/**
 * Accumulates events into contiguous half-open windows
 * [t0 + k*Δt, t0 + (k+1)*Δt). A window is complete when it ends at or before
 * the recording end; drop_tail discards the incomplete final window, while
 * flush_partial keeps it and records its shorter span.
 */
template <typename EventRange>
FrameSequence generate_frames(const EventRange& events, SensorSize size, const FrameOptions& options)
{
    if (options.window_len == 0)
    {
        throw Error(ErrorCode::ZeroWindow, "window length must be positive");
    }
    const std::uint64_t dt = options.window_len;
    FrameSequence seq;
    seq.size = size;
    seq.window_len = dt;

    std::optional<std::uint64_t> t0 = options.t0;
    std::optional<std::uint64_t> last_t;
    std::size_t index = 0;
    for (const Event& e : events)
    {
        if (!t0)
        {
            t0 = e.t;
        }
        if (e.t < *t0)
        {
            throw Error(ErrorCode::EventBeforeOrigin,
                        "event at " + std::to_string(e.t) + " precedes origin " + std::to_string(*t0), index);
        }
        if (last_t && e.t < *last_t)
        {
            throw Error(ErrorCode::NonMonotonicTimestamp, "events must be time ordered", index);
        }
        if (options.t_end && e.t >= *options.t_end)
        {
            throw Error(ErrorCode::InvalidArgument, "event lies beyond the recording end", index);
        }
        if (e.x >= size.width || e.y >= size.height)
        {
            throw Error(ErrorCode::OutOfBounds, "event outside sensor", index);
        }
        last_t = e.t;
        const std::uint64_t k = (e.t - *t0) / dt;
        while (seq.frames.size() <= k)
        {
            seq.frames.emplace_back(*t0 + seq.frames.size() * dt, dt, size);
        }
        seq.frames[k].add(e);
        ++index;
    }

    if (!t0 || (!last_t && !options.t_end))
    {
        seq.t0 = t0.value_or(0);
        return seq;
    }
    seq.t0 = *t0;
    const std::uint64_t t_end = options.t_end ? *options.t_end : *last_t + 1;
    if (t_end < *t0)
    {
        throw Error(ErrorCode::InvalidArgument, "recording end precedes origin");
    }
    const std::uint64_t full = (t_end - *t0) / dt;
    const bool has_partial = (t_end - *t0) % dt != 0;
    const std::uint64_t wanted = (options.policy == TailPolicy::flush_partial && has_partial) ? full + 1 : full;
    while (seq.frames.size() < wanted)
    {
        seq.frames.emplace_back(*t0 + seq.frames.size() * dt, dt, size);
    }
    seq.frames.resize(wanted);
    if (wanted > full)
    {
        auto& tail = seq.frames.back();
        tail.span = t_end - tail.window_start;
    }
    return seq;
}

inline FrameSequence generate_frames(const EventStream& stream, const FrameOptions& options)
{
    return generate_frames(stream, stream.size(), options);
}

} // namespace events
} // namespace morphic

#endif /* MORPHIC_EVENTS_HPP_ */
