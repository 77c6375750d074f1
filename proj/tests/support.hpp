/*
 * morphic - Cross-modal facial action unit supervision for event cameras.
 *
 * File: tests/support.hpp
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

#include "morphic/common.hpp"
#include "morphic/events.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace morphic::test {

/// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::path(MORPHIC_TEST_TMP) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// n random events with timestamps in [t_lo, t_hi), sorted by time.
inline std::vector<events::Event> random_events(Rng& rng, std::size_t n, events::SensorSize size, std::uint64_t t_lo,
                                                std::uint64_t t_hi)
{
    std::vector<events::Event> out(n);
    for (auto& e : out)
    {
        e.t = t_lo + rng.below(t_hi - t_lo);
        e.x = static_cast<std::uint16_t>(rng.below(size.width));
        e.y = static_cast<std::uint16_t>(rng.below(size.height));
        e.polarity = static_cast<std::uint8_t>(rng.below(2));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
    return out;
}

/// The morphic::Error thrown by fn, if any.
template <typename Fn>
std::optional<Error> caught(Fn&& fn)
{
    try
    {
        fn();
    }
    catch (const Error& e)
    {
        return e;
    }
    return std::nullopt;
}

} // namespace morphic::test
