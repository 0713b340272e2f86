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

#include "cimsync/report.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "cimsync/error.hpp"

namespace cimsync {

double speedup(const SimReport& scheme_run, const SimReport& sequential_run) {
    if (scheme_run.total_cycles == 0 || sequential_run.total_cycles == 0)
        throw UndefinedMetricError("speedup of a zero-cycle run is undefined");
    if (scheme_run.pv != sequential_run.pv || scheme_run.ph != sequential_run.ph ||
        !(scheme_run.ofm_shape == sequential_run.ofm_shape))
        throw ConsistencyError("speedup: runs come from different plans");
    if (sequential_run.scheme != Scheme::sequential)
        throw ConsistencyError("speedup: baseline run is not sequential");
    const double s = static_cast<double>(sequential_run.total_cycles) / static_cast<double>(scheme_run.total_cycles);
    if (s > scheme_run.pv * (1.0 + kSpeedupSlack)) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "speedup %.4f exceeds the bound P_V = %d", s, scheme_run.pv);
        throw ConsistencyError(buf);
    }
    return s;
}

SyncMemory sync_memory_comparison(std::int64_t core_count, std::uint64_t bytes_per_register,
                                  std::uint64_t baseline_attributes, std::uint64_t bytes_per_attribute) {
    if (core_count < 1) throw ConfigError("core count must be >= 1");
    SyncMemory m;
    m.ours_bytes = static_cast<std::uint64_t>(core_count) * bytes_per_register;
    m.baseline_bytes = baseline_attributes * bytes_per_attribute;
    if (m.baseline_bytes == 0) throw ConfigError("baseline memory must be non-zero");
    m.savings_percent = 100.0 * (1.0 - static_cast<double>(m.ours_bytes) / static_cast<double>(m.baseline_bytes));
    return m;
}

// ---------------------------------------------------------------------------
// Traffic table

const std::array<std::array<TrafficCell, 3>, 7>& published_traffic() {
    static const std::array<std::array<TrafficCell, 3>, 7> table{{
        {{{16, 2809856, 1605632, 37632}, {4, 1204224, 802816, 6272}, {1, 401408, 401408, 0}}},
        {{{32, 1404928, 802816, 18816}, {8, 602112, 401408, 3136}, {2, 200704, 200704, 0}}},
        {{{64, 3010560, 1605632, 43904}, {16, 1404928, 802816, 9408}, {4, 602112, 401408, 1568}}},
        {{{128, 1505280, 802816, 21952}, {32, 702464, 401408, 4704}, {8, 301056, 200704, 784}}},
        {{{256, 3110912, 1605632, 47040}, {64, 1505280, 802816, 10976}, {16, 702464, 401408, 2352}}},
        {{{512, 1555456, 802816, 23520}, {128, 752640, 401408, 5488}, {32, 351232, 200704, 1176}}},
        {{{1024, 3161088, 1605632, 48608}, {256, 1555456, 802816, 11760}, {64, 752640, 401408, 2744}}},
    }};
    return table;
}

std::vector<TrafficRow> reproduce_traffic_table(std::uint32_t seed, bool simulate, std::int64_t max_simulated_cores,
                                                const ArchConfig& base) {
    std::vector<TrafficRow> rows;
    const auto layers = fixtures::mobilenet_layers(seed);
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const auto& layer = layers[li];
        const auto ifm = simulate ? fixtures::random_ifm(layer.input, seed) : std::vector<std::int8_t>{};
        for (std::size_t xi = 0; xi < kTableCrossbars.size(); ++xi) {
            const int xb = kTableCrossbars[xi];
            TrafficRow row;
            row.layer = static_cast<int>(li) + 1;
            row.crossbar = xb;
            row.published = published_traffic()[li][xi];
            const auto plan = build_mapping_plan(layer, xb, xb);
            const auto program = compile_layer(plan, Scheme::cyclic);
            const auto counts = count_program(program);
            row.computed = {plan.partition.core_count(), counts.loads_values, counts.stores_values, counts.calls};
            if (simulate && plan.partition.core_count() <= max_simulated_cores) {
                ArchConfig arch = base;
                arch.xbar_rows = arch.xbar_cols = xb;
                const auto state = load_setup(plan, program, ifm, arch);
                const auto rep = run(state, arch);
                row.simulated = TrafficCell{static_cast<std::int64_t>(rep.cores.size()), rep.totals.loads_values,
                                            rep.totals.stores_values, rep.totals.calls};
                row.simulated_cycles = rep.total_cycles;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string format_traffic_table(const std::vector<TrafficRow>& rows) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-5s %-7s %6s %10s %10s %8s  %-9s %s\n", "layer", "xbar", "cores", "loads",
                  "stores", "calls", "simulated", "status");
    os << buf;
    for (const auto& r : rows) {
        const auto& c = r.computed;
        std::snprintf(buf, sizeof buf, "%-5d %3dx%-3d %6lld %10lld %10lld %8lld  %-9s %s\n", r.layer, r.crossbar,
                      r.crossbar, static_cast<long long>(c.cores), static_cast<long long>(c.loads),
                      static_cast<long long>(c.stores), static_cast<long long>(c.calls),
                      !r.simulated ? "-" : (*r.simulated == c ? "same" : "DIFFERS"), r.matches() ? "ok" : "MISMATCH");
        os << buf;
        if (!(r.computed == r.published)) {
            const auto& p = r.published;
            std::snprintf(buf, sizeof buf, "      expected %6lld %10lld %10lld %8lld\n", static_cast<long long>(p.cores),
                          static_cast<long long>(p.loads), static_cast<long long>(p.stores),
                          static_cast<long long>(p.calls));
            os << buf;
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Sweeps

void SweepSpec::validate() const {
    if (layers.empty()) throw ConfigError("sweep needs at least one layer");
    if (crossbars.empty() || bus_widths.empty()) throw ConfigError("sweep needs crossbar sizes and bus widths");
    for (const int x : crossbars)
        if (x < 1 || x > 65535) throw ConfigError("crossbar size " + std::to_string(x) + " out of range");
    for (const int w : bus_widths)
        if (w < 1) throw ConfigError("bus width must be >= 1");
    base.validate();
}

namespace {

std::string clean_status(std::string s) {
    for (auto& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ch == ',' ? ';' : ' ';
    return s;
}

std::vector<SweepRow> sweep_point(const SweepSpec& spec, const LayerSpec& layer, int xb) {
    std::vector<Scheme> schemes{Scheme::sequential};
    for (const auto s : {Scheme::linear, Scheme::cyclic})
        if (std::find(spec.schemes.begin(), spec.schemes.end(), s) != spec.schemes.end()) schemes.push_back(s);

    std::vector<SweepRow> rows;
    const auto base_row = [&](int bw, Scheme s) {
        SweepRow r;
        r.layer = layer.name;
        r.m = r.n = xb;
        r.bus_width = bw;
        r.scheme = s;
        return r;
    };

    std::optional<MappingPlan> plan;
    std::vector<MachineState> states;
    try {
        plan = build_mapping_plan(layer, xb, xb);
        const auto ifm = fixtures::random_ifm(layer.input, spec.seed);
        ArchConfig arch = spec.base;
        arch.xbar_rows = arch.xbar_cols = xb;
        for (const auto s : schemes) states.push_back(load_setup(*plan, compile_layer(*plan, s), ifm, arch));
    } catch (const std::exception& e) {
        for (const int bw : spec.bus_widths)
            for (const auto s : schemes) {
                auto r = base_row(bw, s);
                r.status = clean_status(std::string("error: ") + e.what());
                rows.push_back(std::move(r));
            }
        return rows;
    }

    for (const int bw : spec.bus_widths) {
        ArchConfig arch = spec.base;
        arch.xbar_rows = arch.xbar_cols = xb;
        arch.bus_width_bytes = bw;
        std::optional<SimReport> baseline;
        for (std::size_t i = 0; i < schemes.size(); ++i) {
            auto r = base_row(bw, schemes[i]);
            r.cores = plan->partition.core_count();
            r.pv = plan->partition.pv;
            try {
                const auto rep = run(states[i], arch);
                r.cycles = rep.total_cycles;
                r.loads = rep.totals.loads_values;
                r.stores = rep.totals.stores_values;
                r.calls = rep.totals.calls;
                StaticCounts counts;
                counts.loads_values = r.loads;
                counts.stores_values = r.stores;
                counts.calls = r.calls;
                r.overhead_percent = call_overhead_percent(counts, arch.bytes_per_call, arch.bytes_per_value_ifm);
                if (schemes[i] == Scheme::sequential) baseline = rep;
                if (!baseline) throw ExecutionError("sequential baseline failed");
                r.speedup = speedup(rep, *baseline);
                r.speedup_per_pv = r.speedup / r.pv;
            } catch (const std::exception& e) {
                r.status = clean_status(std::string("error: ") + e.what());
            }
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    spec.validate();
    struct Task {
        const LayerSpec* layer;
        int xb;
    };
    std::vector<Task> tasks;
    for (const auto& l : spec.layers)
        for (const int xb : spec.crossbars) tasks.push_back({&l, xb});

    std::vector<std::vector<SweepRow>> slots(tasks.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++)
            slots[i] = sweep_point(spec, *tasks[i].layer, tasks[i].xb);
    };
    const auto threads = std::max<std::size_t>(1, std::min<std::size_t>(spec.jobs, tasks.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<SweepRow> rows;
    for (auto& s : slots)
        for (auto& r : s) rows.push_back(std::move(r));
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "layer,M,N,bus_width,scheme,cores,P_V,cycles,speedup,speedup_per_pv,loads,stores,calls,overhead_pct,status\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%d,%d,%d,%s,%lld,%d,%llu,%.6f,%.6f,%lld,%lld,%lld,%.6f,%s\n",
                      r.layer.c_str(), r.m, r.n, r.bus_width, std::string(to_string(r.scheme)).c_str(),
                      static_cast<long long>(r.cores), r.pv, static_cast<unsigned long long>(r.cycles), r.speedup,
                      r.speedup_per_pv, static_cast<long long>(r.loads), static_cast<long long>(r.stores),
                      static_cast<long long>(r.calls), r.overhead_percent, r.status.c_str());
        os << buf;
    }
    return os.str();
}

std::string gnuplot_data(const std::vector<SweepRow>& rows, Scheme scheme) {
    std::vector<std::pair<int, int>> keys;
    for (const auto& r : rows)
        if (r.scheme == scheme && std::find(keys.begin(), keys.end(), std::pair{r.m, r.bus_width}) == keys.end())
            keys.emplace_back(r.m, r.bus_width);
    std::sort(keys.begin(), keys.end());

    std::ostringstream os;
    char buf[256];
    bool first = true;
    for (const auto& [m, bw] : keys) {
        if (!first) os << "\n\n";
        first = false;
        os << "# xbar " << m << "x" << m << " bus " << bw << " B, scheme " << to_string(scheme) << "\n";
        std::vector<const SweepRow*> block;
        for (const auto& r : rows)
            if (r.scheme == scheme && r.m == m && r.bus_width == bw && r.status == "ok") block.push_back(&r);
        std::stable_sort(block.begin(), block.end(), [](const auto* a, const auto* b) { return a->cores < b->cores; });
        for (const auto* r : block) {
            std::snprintf(buf, sizeof buf, "%lld %.6f %s\n", static_cast<long long>(r->cores), r->speedup_per_pv,
                          r->layer.c_str());
            os << buf;
        }
    }
    return os.str();
}

}  // namespace cimsync
