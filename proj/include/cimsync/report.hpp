/*
 * Copyright 2026 The cimsync Authors
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

/**
 * @file report.hpp
 * @brief Derived metrics, the traffic table and architecture sweeps.
 */

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cimsync/arch.hpp"
#include "cimsync/fixtures.hpp"
#include "cimsync/simulator.hpp"

namespace cimsync {

/// Relative slack allowed above P_V before speedup() reports a bound
/// violation. Covers contention differences between the sequential baseline
/// and the parallel run.
inline constexpr double kSpeedupSlack = 0.01;

/// t_sequential / t_scheme. Throws UndefinedMetricError for a zero-cycle run,
/// ConsistencyError when the runs are not comparable or the ratio exceeds
/// P_V * (1 + kSpeedupSlack).
double speedup(const SimReport& scheme_run, const SimReport& sequential_run);

struct SyncMemory {
    std::uint64_t ours_bytes = 0;
    std::uint64_t baseline_bytes = 0;
    double savings_percent = 0.0;
};

/// One SEQ_NR register per core against a central attribute buffer.
/// Throws ConfigError if core_count < 1.
SyncMemory sync_memory_comparison(std::int64_t core_count, std::uint64_t bytes_per_register = 4,
                                  std::uint64_t baseline_attributes = 32768, std::uint64_t bytes_per_attribute = 1);

// ---------------------------------------------------------------------------
// Traffic table

struct TrafficCell {
    std::int64_t cores = 0;
    std::int64_t loads = 0;
    std::int64_t stores = 0;
    std::int64_t calls = 0;

    bool operator==(const TrafficCell&) const = default;
};

inline constexpr std::array<int, 3> kTableCrossbars{32, 64, 128};

/// Published counts for the seven Mobilenet layers, indexed [layer-1][crossbar].
const std::array<std::array<TrafficCell, 3>, 7>& published_traffic();

struct TrafficRow {
    int layer = 0;  // 1-based
    int crossbar = 0;
    TrafficCell published;
    TrafficCell computed;                // from the compiled program
    std::optional<TrafficCell> simulated;  // from a cyclic simulation
    std::uint64_t simulated_cycles = 0;

    bool matches() const { return computed == published && (!simulated || *simulated == published); }
};

/// Compiles every layer for every crossbar size. When `simulate` is set,
/// configurations with at most `max_simulated_cores` cores are also run.
std::vector<TrafficRow> reproduce_traffic_table(std::uint32_t seed, bool simulate, std::int64_t max_simulated_cores = 64,
                                                const ArchConfig& base = {});
std::string format_traffic_table(const std::vector<TrafficRow>& rows);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepSpec {
    std::vector<LayerSpec> layers;
    std::vector<int> crossbars{32, 64, 128};  // square M = N
    std::vector<int> bus_widths{4, 8, 16, 32, 64};
    std::vector<Scheme> schemes{Scheme::linear, Scheme::cyclic};
    std::uint32_t seed = fixtures::kDefaultSeed;  // IFM values
    ArchConfig base;
    unsigned jobs = 1;

    /// Throws ConfigError on empty lists or invalid values.
    void validate() const;
};

struct SweepRow {
    std::string layer;
    int m = 0;
    int n = 0;
    int bus_width = 0;
    Scheme scheme = Scheme::sequential;
    std::int64_t cores = 0;
    int pv = 0;
    std::uint64_t cycles = 0;
    double speedup = 0.0;
    double speedup_per_pv = 0.0;
    std::int64_t loads = 0;
    std::int64_t stores = 0;
    std::int64_t calls = 0;
    double overhead_percent = 0.0;
    std::string status = "ok";
};

/// Rows come out ordered by layer, crossbar, bus width, then sequential,
/// linear, cyclic. Sequential rows are always present. A failing point
/// becomes a row with a non-"ok" status.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Whitespace-separated blocks, one per (crossbar, bus width), of
/// "cores speedup/P_V layer" for one scheme; blocks are separated by two
/// blank lines for gnuplot's `index`.
std::string gnuplot_data(const std::vector<SweepRow>& rows, Scheme scheme);

}  // namespace cimsync
