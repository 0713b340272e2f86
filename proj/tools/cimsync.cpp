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

// cimsync command-line driver.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 verification
// mismatch, 3 deadlock.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cimsync/arch.hpp"
#include "cimsync/codegen.hpp"
#include "cimsync/fixtures.hpp"
#include "cimsync/image.hpp"
#include "cimsync/mapping.hpp"
#include "cimsync/model_ir.hpp"
#include "cimsync/monitor.hpp"
#include "cimsync/oracle.hpp"
#include "cimsync/report.hpp"
#include "cimsync/simulator.hpp"

namespace fs = std::filesystem;
using namespace cimsync;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitMismatch = 2;
constexpr int kExitDeadlock = 3;

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
    const auto text = read_text(path);
    return {text.begin(), text.end()};
}

template <typename Bytes>
void write_file(const fs::path& path, const Bytes& data) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
}

/// Options shared by every subcommand that needs an architecture.
struct ArchOptions {
    std::string arch_path;
    std::string scheme;
    std::string xbar;
    std::string arbitration;
    int bus_width = 0;

    void add(CLI::App* app, bool with_scheme = true) {
        app->add_option("--arch", arch_path, "architecture file (key=value lines)");
        if (with_scheme) app->add_option("--scheme", scheme, "sequential, linear or cyclic");
        app->add_option("--xbar", xbar, "crossbar size MxN");
        app->add_option("--bus-width", bus_width, "bus width in bytes");
        app->add_option("--arbitration", arbitration, "fixed_priority or round_robin");
    }

    ArchConfig build() const {
        ArchConfig arch = arch_path.empty() ? ArchConfig{} : parse_arch_config(read_text(arch_path));
        if (!scheme.empty()) arch.scheme = parse_scheme(scheme);
        if (!xbar.empty()) std::tie(arch.xbar_rows, arch.xbar_cols) = parse_xbar(xbar);
        if (bus_width != 0) arch.bus_width_bytes = bus_width;
        if (!arbitration.empty()) arch.arbitration = parse_arbitration(arbitration);
        arch.validate();
        return arch;
    }
};

struct ModelOptions {
    std::string model_path;
    std::string weights_path;

    void add(CLI::App* app, bool required) {
        auto* opt = app->add_option("--model", model_path, "model description file");
        if (required) opt->required();
        app->add_option("--weights", weights_path, "weight blob (default: model path with .weights)");
    }

    std::vector<LayerSpec> load() const {
        auto blob_path = weights_path.empty() ? fs::path(model_path).replace_extension(".weights") : fs::path(weights_path);
        const auto text = read_text(model_path);
        std::vector<std::uint8_t> blob;
        if (fs::exists(blob_path)) blob = read_bytes(blob_path);
        else if (!weights_path.empty()) throw ConfigError("cannot read '" + blob_path.string() + "'");
        return parse_model(text, blob);
    }
};

std::vector<int> parse_int_list(const std::string& text, const char* what) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(std::string("bad ") + what + " list '" + text + "'");
        }
    }
    if (out.empty()) throw ConfigError(std::string("empty ") + what + " list");
    return out;
}

std::vector<Scheme> parse_scheme_list(const std::string& text) {
    std::vector<Scheme> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_scheme(item));
    if (out.empty()) throw ConfigError("empty scheme list");
    return out;
}

std::vector<LayerSpec> named_layers(const std::string& set, std::uint32_t seed) {
    if (set == "mobilenet") return fixtures::mobilenet_layers(seed);
    if (set == "resnet18") return fixtures::resnet18_layers(seed);
    if (set == "all") {
        auto layers = fixtures::mobilenet_layers(seed);
        for (auto& l : fixtures::resnet18_layers(seed)) layers.push_back(std::move(l));
        return layers;
    }
    throw ConfigError("unknown layer set '" + set + "', expected mobilenet, resnet18 or all");
}

void print_deadlock(const DeadlockError& e) {
    std::cerr << "deadlock: " << e.what() << "\n";
    for (const auto& c : e.cores())
        std::cerr << "  core " << c.core << " " << to_string(c.status) << " pc=" << c.pc << " seq_nr=" << c.seq_nr
                  << " wait=" << c.wait_value << "\n";
}

// ---------------------------------------------------------------------------

int cmd_compile(const ModelOptions& model, const ArchOptions& arch_opts, const std::string& out_dir) {
    const auto arch = arch_opts.build();
    const auto layers = model.load();
    if (layers.empty()) {
        std::cerr << "warning: model has no layers, nothing written\n";
        return kExitOk;
    }
    for (const auto& layer : layers) {
        const auto plan = build_mapping_plan(layer, arch.xbar_rows, arch.xbar_cols);
        const auto program = compile_layer(plan, arch.scheme);
        const auto bin = write_bin(program, arch.shared_mem_bytes);
        const auto cfg = write_cfg(plan, program);
        const auto base = fs::path(out_dir) / layer.name;
        write_file(fs::path(base).replace_extension(".bin"), bin);
        write_file(fs::path(base).replace_extension(".cfg"), cfg);
        std::printf("%s: P_V=%d P_H=%d cores=%lld scheme=%s instructions=%lld bin=%zu bytes\n", layer.name.c_str(),
                    plan.partition.pv, plan.partition.ph, static_cast<long long>(plan.partition.core_count()),
                    std::string(to_string(arch.scheme)).c_str(), static_cast<long long>(program.instruction_count()),
                    bin.size());
    }
    return kExitOk;
}

struct SimulateArgs {
    std::string bin, cfg, ifm, report, trace;
    std::uint32_t seed = fixtures::kDefaultSeed;
    int fault_core = -1;
    int fault_index = -1;
    bool monitor = false;
};

int cmd_simulate(const SimulateArgs& a, const ArchOptions& arch_opts) {
    const auto arch = arch_opts.build();
    auto bin = read_bytes(a.bin);
    const auto cfg = read_cfg(read_text(a.cfg));

    if (a.fault_core >= 0) {
        auto image = read_bin(bin);
        Program program{cfg.scheme, image.layout, std::move(image.cores)};
        inject_wait_fault(program, a.fault_core, a.fault_index);
        bin = write_bin(program, arch.shared_mem_bytes);
        std::cerr << "injected WAIT fault on core " << a.fault_core << "\n";
    }

    std::vector<std::int8_t> ifm;
    if (a.ifm.empty()) {
        ifm = fixtures::random_ifm(cfg.ifm, a.seed);
    } else {
        const auto raw = read_bytes(a.ifm);
        ifm.assign(raw.begin(), raw.end());
    }

    const auto state = load_setup(std::move(bin), cfg, ifm, arch);
    std::vector<TraceEvent> trace;
    RunOptions options;
    if (!a.trace.empty() || a.monitor) options.trace = &trace;

    SimReport rep;
    try {
        rep = run(state, arch, options);
    } catch (const DeadlockError& e) {
        if (!a.trace.empty()) {
            std::ofstream os(a.trace);
            write_trace_csv(os, trace);
        }
        print_deadlock(e);
        return kExitDeadlock;
    }
    if (!a.trace.empty()) {
        std::ofstream os(a.trace);
        write_trace_csv(os, trace);
        if (!os) throw ConfigError("cannot write '" + a.trace + "'");
    }
    if (!a.report.empty()) write_file(a.report, report_json(rep));

    std::printf("scheme=%s cores=%zu P_V=%d P_H=%d cycles=%llu loads=%lld stores=%lld calls=%lld waits=%lld\n",
                std::string(to_string(rep.scheme)).c_str(), rep.cores.size(), rep.pv, rep.ph,
                static_cast<unsigned long long>(rep.total_cycles), static_cast<long long>(rep.totals.loads_values),
                static_cast<long long>(rep.totals.stores_values), static_cast<long long>(rep.totals.calls),
                static_cast<long long>(rep.totals.waits));

    if (a.monitor) {
        const auto mon = check_protocol(state, trace);
        auto issues = mon.violations;
        for (auto& s : check_seq_nr(state, rep)) issues.push_back(std::move(s));
        for (const auto& v : issues) std::cerr << "protocol: " << v << "\n";
        if (!issues.empty()) return kExitMismatch;
        std::printf("protocol ok (%zu ownership intervals)\n", mon.intervals.size());
    }
    return kExitOk;
}

struct VerifyArgs {
    int random = 0;
    std::uint32_t seed = fixtures::kDefaultSeed;
    std::string layers;
};

/// Runs every scheme of one layer against the golden model. Returns the
/// number of failures and prints one line per layer.
int verify_layer(const LayerSpec& layer, const ArchConfig& base, const std::vector<Scheme>& schemes,
                 std::uint32_t seed) {
    const auto ifm = fixtures::random_ifm(layer.input, seed);
    const auto golden = oracle::golden_conv2d(layer, ifm);
    const auto plan = build_mapping_plan(layer, base.xbar_rows, base.xbar_cols);
    int failures = 0;
    std::string detail;
    for (const auto scheme : schemes) {
        ArchConfig arch = base;
        arch.scheme = scheme;
        const auto state = load_setup(plan, compile_layer(plan, scheme), ifm, arch);
        std::vector<TraceEvent> trace;
        const auto rep = run(state, arch, {&trace});
        auto issues = check_protocol(state, trace).violations;
        for (auto& s : check_seq_nr(state, rep)) issues.push_back(std::move(s));
        if (rep.ofm != golden) issues.push_back("OFM differs from the golden convolution");
        if (!issues.empty()) {
            ++failures;
            detail += "\n  " + std::string(to_string(scheme)) + ": " + issues.front();
        }
    }
    std::printf("%-16s P_V=%-3d P_H=%-3d %s%s\n", layer.name.c_str(), plan.partition.pv, plan.partition.ph,
                failures ? "FAIL" : "ok", detail.c_str());
    return failures;
}

int cmd_verify(const VerifyArgs& a, const ModelOptions& model, const ArchOptions& arch_opts) {
    const auto arch = arch_opts.build();
    std::vector<Scheme> schemes{Scheme::sequential, Scheme::linear, Scheme::cyclic};
    if (!arch_opts.scheme.empty()) schemes = {arch.scheme};

    std::vector<LayerSpec> layers;
    if (!model.model_path.empty()) layers = model.load();
    if (!a.layers.empty())
        for (auto& l : named_layers(a.layers, a.seed)) layers.push_back(std::move(l));
    for (int i = 0; i < a.random; ++i) {
        auto l = fixtures::random_layer(a.seed + static_cast<std::uint32_t>(i));
        l.name = "random_" + std::to_string(i);
        layers.push_back(std::move(l));
    }
    if (layers.empty()) throw ConfigError("nothing to verify: give --model, --layers or --random");

    int failures = 0;
    try {
        for (const auto& l : layers) failures += verify_layer(l, arch, schemes, a.seed);
    } catch (const DeadlockError& e) {
        print_deadlock(e);
        return kExitDeadlock;
    }
    std::printf("%zu layers, %d failing scheme runs\n", layers.size(), failures);
    return failures ? kExitMismatch : kExitOk;
}

struct SweepArgs {
    std::string layers = "mobilenet";
    std::string xbars = "32,64,128";
    std::string bus_widths = "4,8,16,32,64";
    std::string schemes = "linear,cyclic";
    std::string out;
    std::uint32_t seed = fixtures::kDefaultSeed;
    int jobs = 1;
};

int cmd_sweep(const SweepArgs& a, const ModelOptions& model, const ArchOptions& arch_opts) {
    SweepSpec spec;
    spec.base = arch_opts.build();
    spec.layers = model.model_path.empty() ? named_layers(a.layers, a.seed) : model.load();
    spec.crossbars = parse_int_list(a.xbars, "crossbar");
    spec.bus_widths = parse_int_list(a.bus_widths, "bus width");
    spec.schemes = parse_scheme_list(a.schemes);
    spec.seed = a.seed;
    if (a.jobs < 1) throw ConfigError("--jobs must be >= 1");
    spec.jobs = a.jobs;

    const auto rows = run_sweep(spec);
    const auto csv = sweep_csv(rows);
    if (a.out.empty()) {
        std::cout << csv;
    } else {
        const fs::path dir(a.out);
        write_file(dir / "sweep.csv", csv);
        for (const auto s : spec.schemes)
            write_file(dir / ("speedup_" + std::string(to_string(s)) + ".dat"), gnuplot_data(rows, s));
        std::printf("%zu rows written to %s\n", rows.size(), (dir / "sweep.csv").string().c_str());
    }
    for (const auto& r : rows)
        if (r.status != "ok") std::cerr << "sweep point failed: " << r.layer << " " << r.m << "x" << r.n << " bus "
                                        << r.bus_width << " " << to_string(r.scheme) << ": " << r.status << "\n";
    return kExitOk;
}

int cmd_plot_data(const std::string& csv_path, const std::string& out_dir) {
    // Re-reads a sweep CSV so plots can be regenerated without re-running.
    std::istringstream in(read_text(csv_path));
    std::string line;
    std::getline(in, line);
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 15) throw ConfigError("malformed sweep row: " + line);
        SweepRow r;
        r.layer = f[0];
        r.m = std::stoi(f[1]);
        r.n = std::stoi(f[2]);
        r.bus_width = std::stoi(f[3]);
        r.scheme = parse_scheme(f[4]);
        r.cores = std::stoll(f[5]);
        r.pv = std::stoi(f[6]);
        r.speedup = std::stod(f[8]);
        r.speedup_per_pv = std::stod(f[9]);
        r.status = f[14];
        rows.push_back(std::move(r));
    }
    for (const auto s : {Scheme::sequential, Scheme::linear, Scheme::cyclic})
        write_file(fs::path(out_dir) / ("speedup_" + std::string(to_string(s)) + ".dat"), gnuplot_data(rows, s));
    return kExitOk;
}

int cmd_table2(std::uint32_t seed, bool simulate, int max_cores, const ArchOptions& arch_opts) {
    const auto rows = reproduce_traffic_table(seed, simulate, max_cores, arch_opts.build());
    std::cout << format_traffic_table(rows);

    std::map<int, double> worst;
    for (const auto& r : rows) {
        StaticCounts c;
        c.loads_values = r.computed.loads;
        c.stores_values = r.computed.stores;
        c.calls = r.computed.calls;
        auto& w = worst[r.crossbar];
        w = std::max(w, call_overhead_percent(c));
    }
    std::cout << "\nlargest call overhead per crossbar size:\n";
    for (const auto& [xb, pct] : worst) std::printf("  %dx%d  %.2f%%\n", xb, xb, pct);

    int mismatches = 0;
    for (const auto& r : rows) mismatches += r.matches() ? 0 : 1;
    std::printf("\n%zu cells, %d mismatching\n", rows.size(), mismatches);
    return mismatches ? kExitMismatch : kExitOk;
}

int cmd_syncmem(std::int64_t cores) {
    const auto m = sync_memory_comparison(cores);
    std::printf("cores=%lld seq_nr registers=%llu B central buffer=%llu B savings=%.4f%%\n",
                static_cast<long long>(cores), static_cast<unsigned long long>(m.ours_bytes),
                static_cast<unsigned long long>(m.baseline_bytes), m.savings_percent);
    return kExitOk;
}

int cmd_plan(const ModelOptions& model, const std::string& layers, std::uint32_t seed, const ArchOptions& arch_opts) {
    const auto arch = arch_opts.build();
    const auto specs = model.model_path.empty() ? named_layers(layers, seed) : model.load();
    for (const auto& l : specs) std::cout << describe_plan(build_mapping_plan(l, arch.xbar_rows, arch.xbar_cols)) << "\n";
    return kExitOk;
}

int cmd_fixtures(const std::string& out_dir, std::uint32_t seed) {
    for (const auto* set : {"mobilenet", "resnet18"}) {
        const auto layers = named_layers(set, seed);
        const auto files = serialize_model(layers);
        const auto base = fs::path(out_dir) / set;
        write_file(fs::path(base).replace_extension(".model"), files.text);
        write_file(fs::path(base).replace_extension(".weights"), files.blob);
        for (const auto& l : layers)
            write_file(fs::path(out_dir) / (l.name + ".ifm"), fixtures::random_ifm(l.input, seed));
        std::printf("%s: %zu layers\n", set, layers.size());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cimsync: compiler and simulator for multi-core crossbar CIM"};
    app.require_subcommand(1);

    ArchOptions arch;
    ModelOptions model;
    std::string out = ".";
    std::uint32_t seed = fixtures::kDefaultSeed;

    auto* compile = app.add_subcommand("compile", "compile every layer of a model to bin/cfg files");
    model.add(compile, true);
    arch.add(compile);
    compile->add_option("--out", out, "output directory");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "run a compiled layer");
    simulate->add_option("--bin", sim.bin, "bin image")->required();
    simulate->add_option("--cfg", sim.cfg, "cfg file")->required();
    simulate->add_option("--ifm", sim.ifm, "raw int8 IFM (default: random from --seed)");
    simulate->add_option("--seed", sim.seed, "seed of the random IFM");
    simulate->add_option("--report", sim.report, "write a JSON report");
    simulate->add_option("--trace", sim.trace, "write the event trace as CSV");
    simulate->add_option("--inject-wait-fault", sim.fault_core, "raise a WAIT threshold of this core");
    simulate->add_option("--fault-wait-index", sim.fault_index, "which WAIT of the core (negative counts from the end)");
    simulate->add_flag("--monitor", sim.monitor, "check the protocol on the trace");
    arch.add(simulate, false);

    VerifyArgs ver;
    auto* verify = app.add_subcommand("verify", "check simulated OFMs against the golden convolution");
    model.add(verify, false);
    verify->add_option("--layers", ver.layers, "bundled layer set: mobilenet, resnet18 or all");
    verify->add_option("--random", ver.random, "number of random layers");
    verify->add_option("--seed", ver.seed, "seed for layers and IFMs");
    arch.add(verify);

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "speedup over crossbar sizes, bus widths and schemes");
    model.add(sweep, false);
    sweep->add_option("--layers", sw.layers, "bundled layer set when no --model is given");
    sweep->add_option("--xbars", sw.xbars, "square crossbar sizes, comma separated");
    sweep->add_option("--bus-widths", sw.bus_widths, "bus widths in bytes, comma separated");
    sweep->add_option("--schemes", sw.schemes, "schemes besides the sequential baseline");
    sweep->add_option("--seed", sw.seed, "fixture seed");
    sweep->add_option("--jobs", sw.jobs, "worker threads");
    sweep->add_option("--out", sw.out, "output directory (default: CSV on stdout)");
    arch.add(sweep, false);

    std::string csv_path;
    auto* plot = app.add_subcommand("plot-data", "gnuplot blocks from a sweep CSV");
    plot->add_option("csv", csv_path, "sweep CSV")->required();
    plot->add_option("--out", out, "output directory");

    bool t2_simulate = false;
    int t2_max_cores = 64;
    auto* table2 = app.add_subcommand("table2", "reproduce the Mobilenet traffic table");
    table2->add_option("--seed", seed, "fixture seed");
    table2->add_flag("--simulate", t2_simulate, "confirm the counters by simulation");
    table2->add_option("--max-cores", t2_max_cores, "largest configuration to simulate");
    arch.add(table2, false);

    std::int64_t sm_cores = 1024;
    auto* syncmem = app.add_subcommand("syncmem", "SEQ_NR registers against a central attribute buffer");
    syncmem->add_option("--cores", sm_cores, "core count");

    std::string plan_layers = "mobilenet";
    auto* plan = app.add_subcommand("plan", "print the core grid of each layer");
    model.add(plan, false);
    plan->add_option("--layers", plan_layers, "bundled layer set when no --model is given");
    plan->add_option("--seed", seed, "fixture seed");
    arch.add(plan, false);

    auto* fix = app.add_subcommand("fixtures", "write the bundled models, weights and IFMs");
    fix->add_option("--out", out, "output directory");
    fix->add_option("--seed", seed, "fixture seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*compile) return cmd_compile(model, arch, out);
        if (*simulate) return cmd_simulate(sim, arch);
        if (*verify) return cmd_verify(ver, model, arch);
        if (*sweep) return cmd_sweep(sw, model, arch);
        if (*plot) return cmd_plot_data(csv_path, out);
        if (*table2) return cmd_table2(seed, t2_simulate, t2_max_cores, arch);
        if (*syncmem) return cmd_syncmem(sm_cores);
        if (*plan) return cmd_plan(model, plan_layers, seed, arch);
        if (*fix) return cmd_fixtures(out, seed);
    } catch (const DeadlockError& e) {
        print_deadlock(e);
        return kExitDeadlock;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
