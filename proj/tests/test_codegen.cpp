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

#include <algorithm>
#include <set>

#include "cimsync/codegen.hpp"
#include "cimsync/error.hpp"
#include "cimsync/fixtures.hpp"
#include "doctest.h"

using namespace cimsync;

namespace {

/// Pointwise layer whose kernel matrix splits into `pv` single-column tiles.
MappingPlan ring_plan(int pv, int oy, int ox, int knum = 1) {
    const auto l = fixtures::make_conv("ring", {1, 1, pv, knum}, {oy, ox, pv}, {1, 1}, Padding::valid,
                                       Activation::relu, 11);
    return build_mapping_plan(l, knum, 1);
}

std::vector<Opcode> ops(const std::vector<Instruction>& s) {
    std::vector<Opcode> out;
    for (const auto& i : s) out.push_back(i.op);
    return out;
}

/// Non-padding input positions over all output vectors, by the conv definition.
std::int64_t loaded_inputs(const LayerSpec& l) {
    const auto ofm = infer_ofm_shape(l);
    const auto pad = pad_offsets(l);
    std::int64_t n = 0;
    for (int y = 0; y < ofm.oy; ++y)
        for (int x = 0; x < ofm.ox; ++x)
            for (int dy = 0; dy < l.kernel.ky; ++dy)
                for (int dx = 0; dx < l.kernel.kx; ++dx) {
                    const int iy = y * l.stride.y + dy - pad.top;
                    const int ix = x * l.stride.x + dx - pad.left;
                    if (iy >= 0 && iy < l.input.iy && ix >= 0 && ix < l.input.ix) n += l.kernel.kz;
                }
    return n;
}

}  // namespace

TEST_CASE("scheme names") {
    CHECK(parse_scheme("cyclic") == Scheme::cyclic);
    CHECK(to_string(Scheme::sequential) == "sequential");
    CHECK_THROWS_AS(parse_scheme("round"), ConfigError);
}

TEST_CASE("call count formulas") {
    CHECK(count_calls_analytic(Scheme::linear, 4, 4, 3136) == 37632);
    CHECK(count_calls_analytic(Scheme::linear, 1, 3, 10) == 20);
    CHECK(count_calls_analytic(Scheme::cyclic, 1, 3, 10) == 24);
    CHECK(count_calls_analytic(Scheme::cyclic, 1, 3, 12) == 24);
    CHECK(count_calls_analytic(Scheme::linear, 1, 3, 12) == 24);
    CHECK(count_calls_analytic(Scheme::cyclic, 16, 16, 196) == 49920);
    CHECK(count_calls_analytic(Scheme::sequential, 4, 4, 3136) == 0);
    for (const auto s : {Scheme::sequential, Scheme::linear, Scheme::cyclic}) {
        CHECK(count_calls_analytic(s, 7, 1, 100) == 0);
        CHECK(count_calls_analytic(s, 7, 5, 0) == 0);
    }
}

TEST_CASE("two-core linear schedule") {
    const auto plan = ring_plan(2, 1, 2);
    const auto prog = compile_layer(plan, Scheme::linear);
    REQUIRE(prog.cores.size() == 2);
    using O = Opcode;
    CHECK(ops(prog.cores[0]) == std::vector<O>{O::load, O::mvm, O::addb, O::store, O::call, O::load, O::mvm,
                                                O::addb, O::store, O::call, O::halt});
    CHECK(ops(prog.cores[1]) == std::vector<O>{O::load, O::mvm, O::wait, O::load, O::acc, O::act, O::store,
                                                O::load, O::mvm, O::wait, O::load, O::acc, O::act, O::store,
                                                O::halt});
    CHECK(prog.cores[0][4] == Instruction::call(1));
    CHECK(prog.cores[1][2] == Instruction::wait(1));
    CHECK(prog.cores[1][9] == Instruction::wait(2));
    // both cores touch the same OFM address for vector 0
    CHECK(prog.cores[0][3].addr == prog.cores[1][6].addr);
    CHECK(prog.cores[1][3].addr == prog.cores[1][6].addr);
}

TEST_CASE("cyclic ownership rotates over three cores") {
    const auto plan = ring_plan(3, 3, 4);
    REQUIRE(plan.ofm.vector_count() == 12);
    const auto prog = compile_layer(plan, Scheme::cyclic);
    const auto ofm0 = prog.layout.ofm.offset;

    for (int core = 0; core < 3; ++core) {
        int addb = 0, act = 0;
        for (const auto& i : prog.cores[static_cast<std::size_t>(core)]) {
            if (i.op == Opcode::addb) ++addb;
            if (i.op == Opcode::act) ++act;
            if (i.op == Opcode::call) CHECK(i.arg == static_cast<std::uint32_t>((core + 1) % 3));
        }
        CHECK(addb == 4);
        CHECK(act == 4);
    }
    // first owner of j sits at j mod 3: its stream has ADDB right before the STORE of j
    for (int core = 0; core < 3; ++core) {
        const auto& s = prog.cores[static_cast<std::size_t>(core)];
        for (std::size_t k = 0; k + 1 < s.size(); ++k) {
            if (s[k].op == Opcode::addb) {
                const auto j = (s[k + 1].addr - ofm0) / kOfmValueBytes;
                CHECK(static_cast<int>(j % 3) == core);
            }
            if (s[k].op == Opcode::act) {
                const auto j = (s[k + 1].addr - ofm0) / kOfmValueBytes;
                CHECK(static_cast<int>((j + 2) % 3) == core);
            }
        }
    }
}

TEST_CASE("vector order") {
    CHECK(vector_order(Scheme::linear, 2, 3, 5) == std::vector<std::int64_t>{0, 1, 2, 3, 4});
    CHECK(vector_order(Scheme::cyclic, 0, 3, 7) == std::vector<std::int64_t>{0, 2, 1, 3, 5, 4, 6});
    CHECK(vector_order(Scheme::cyclic, 2, 3, 7) == std::vector<std::int64_t>{2, 1, 0, 5, 4, 3, 6});
    for (int pv = 1; pv < 6; ++pv)
        for (int vg = 0; vg < pv; ++vg)
            for (std::int64_t n = 0; n < 13; ++n) {
                auto o = vector_order(Scheme::cyclic, vg, pv, n);
                std::sort(o.begin(), o.end());
                CHECK(o == vector_order(Scheme::linear, vg, pv, n));
            }
}

TEST_CASE("single vertical group has no synchronization") {
    const auto plan = build_mapping_plan(fixtures::mobilenet_layer(2), 64, 128);
    REQUIRE(plan.partition.pv == 1);
    for (const auto s : {Scheme::sequential, Scheme::linear, Scheme::cyclic}) {
        const auto c = count_program(compile_layer(plan, s));
        CHECK(c.calls == 0);
        CHECK(c.waits == 0);
    }
}

TEST_CASE("stream invariants on random layers") {
    for (std::uint32_t seed = 0; seed < 60; ++seed) {
        const auto l = fixtures::random_layer(seed);
        const auto plan = build_mapping_plan(l, static_cast<int>(seed % 5 + 2), static_cast<int>(seed % 9 + 2));
        const auto& p = plan.partition;
        CAPTURE(seed);

        std::multiset<std::pair<int, std::uint32_t>> work[3];
        for (const auto s : {Scheme::sequential, Scheme::linear, Scheme::cyclic}) {
            const auto prog = compile_layer(plan, s);
            const auto counts = count_program(prog);
            const auto analytic = count_traffic_analytic(plan, s);
            CHECK(counts == analytic);
            CHECK(count_calls_emitted(prog) == counts.calls);
            if (s != Scheme::sequential)
                CHECK(counts.calls == count_calls_analytic(Scheme::linear, p.ph, p.pv, plan.ofm.vector_count()));
            CHECK(counts.calls <= count_calls_analytic(s, p.ph, p.pv, plan.ofm.vector_count()));

            std::vector<int> received(prog.cores.size(), 0);
            for (std::size_t c = 0; c < prog.cores.size(); ++c) {
                const int hg = static_cast<int>(c) / p.pv;
                const int vg = static_cast<int>(c) % p.pv;
                std::uint32_t last_wait = 0;
                int addb = 0, act = 0;
                for (const auto& i : prog.cores[c]) {
                    if (i.op == Opcode::wait) {
                        CHECK(i.arg == last_wait + 1);
                        last_wait = i.arg;
                    }
                    if (i.op == Opcode::call) {
                        const int target = static_cast<int>(i.arg);
                        CHECK(target / p.pv == hg);
                        if (s == Scheme::linear) CHECK(target % p.pv == vg + 1);
                        if (s == Scheme::cyclic) CHECK(target % p.pv == (vg + 1) % p.pv);
                        ++received[static_cast<std::size_t>(target)];
                    }
                    addb += i.op == Opcode::addb;
                    act += i.op == Opcode::act;
                    if (i.op != Opcode::call && i.op != Opcode::wait) {
                        // addresses relative to their region; code size shifts the regions per scheme
                        std::uint32_t rel = 0;
                        if (i.op == Opcode::load || i.op == Opcode::store)
                            rel = i.addr >= prog.layout.ofm.offset ? (1u << 31) + (i.addr - prog.layout.ofm.offset)
                                                                   : i.addr - prog.layout.ifm.offset;
                        work[static_cast<int>(s)].insert({static_cast<int>(i.op), rel});
                    }
                }
                CHECK(prog.cores[c].back().op == Opcode::halt);
                if (s == Scheme::linear) {
                    CHECK(addb == (vg == 0 ? plan.ofm.vector_count() : 0));
                    CHECK(act == (vg == p.pv - 1 ? plan.ofm.vector_count() : 0));
                }
                if (s == Scheme::cyclic) {
                    const auto fair = plan.ofm.vector_count() / p.pv;
                    CHECK(addb >= fair);
                    CHECK(addb <= fair + 1);
                    CHECK(act >= fair);
                    CHECK(act <= fair + 1);
                }
            }
            for (std::size_t c = 0; c < prog.cores.size(); ++c) {
                std::uint32_t max_wait = 0;
                for (const auto& i : prog.cores[c])
                    if (i.op == Opcode::wait) max_wait = i.arg;
                CHECK(max_wait == static_cast<std::uint32_t>(received[c]));
            }
        }
        CHECK(work[0] == work[1]);
        CHECK(work[1] == work[2]);
    }
}

TEST_CASE("traffic formulas against direct counting") {
    for (std::uint32_t seed = 200; seed < 240; ++seed) {
        const auto l = fixtures::random_layer(seed);
        const auto plan = build_mapping_plan(l, 3, 5);
        const auto& p = plan.partition;
        const auto o = plan.ofm.vector_count();
        const auto c = count_traffic_analytic(plan);
        CHECK(c.loads_values == p.ph * loaded_inputs(l) + (p.pv - 1) * o * l.kernel.knum);
        CHECK(c.stores_values == p.pv * o * l.kernel.knum);
    }
}

TEST_CASE("mobilenet traffic") {
    const auto l1 = fixtures::mobilenet_layer(1);
    const auto at32 = count_traffic_analytic(build_mapping_plan(l1, 32, 32));
    CHECK(at32.loads_values == 2809856);
    CHECK(at32.stores_values == 1605632);
    CHECK(at32.calls == 37632);
    const auto at128 = count_traffic_analytic(build_mapping_plan(l1, 128, 128));
    CHECK(at128.loads_values == 401408);
    CHECK(at128.stores_values == 401408);
    CHECK(at128.calls == 0);

    const auto l7 = count_traffic_analytic(build_mapping_plan(fixtures::mobilenet_layer(7), 128, 128));
    CHECK(l7.loads_values == 752640);
    CHECK(l7.stores_values == 401408);

    const auto l5 = build_mapping_plan(fixtures::mobilenet_layer(5), 32, 32);
    CHECK(count_calls_emitted(compile_layer(l5, Scheme::cyclic)) == 47040);
    CHECK(count_calls_analytic(Scheme::cyclic, l5.partition.ph, l5.partition.pv, l5.ofm.vector_count()) == 49920);
    const auto l3 = build_mapping_plan(fixtures::mobilenet_layer(3), 128, 128);
    CHECK(count_calls_emitted(compile_layer(l3, Scheme::cyclic)) == 1568);
}

TEST_CASE("call overhead") {
    StaticCounts c;
    c.loads_values = 2809856;
    c.stores_values = 1605632;
    c.calls = 37632;
    CHECK(call_overhead_percent(c) == doctest::Approx(100.0 * 150528 / 4415488));
    CHECK(call_overhead_percent(c) == doctest::Approx(3.41).epsilon(0.001));
    c = {6272, 0, 1204224, 802816};
    CHECK(call_overhead_percent(c) == doctest::Approx(1.25));
    c.calls = 0;
    CHECK(call_overhead_percent(c) == 0.0);
    CHECK_THROWS_AS(call_overhead_percent(StaticCounts{}), UndefinedMetricError);
}

TEST_CASE("memory layout") {
    const auto plan = build_mapping_plan(fixtures::random_layer(3), 4, 4);
    const auto prog = compile_layer(plan, Scheme::cyclic);
    const auto& lay = prog.layout;
    CHECK(lay.ifm.length_values == plan.layer.input.element_count());
    CHECK(lay.ofm.length_values == plan.ofm.element_count());
    CHECK(lay.code_base >= bin_header_bytes(prog.cores.size()));
    std::uint32_t cursor = lay.code_base;
    for (std::size_t c = 0; c < prog.cores.size(); ++c) {
        CHECK(lay.sections[c].offset == cursor);
        CHECK(lay.sections[c].length_bytes == prog.cores[c].size() * kInstructionBytes);
        cursor += lay.sections[c].length_bytes;
    }
    CHECK(lay.ifm.offset >= cursor);
    CHECK(lay.ofm.offset >= lay.ifm.offset + lay.ifm.length_values);
    CHECK(lay.image_bytes() == lay.ofm.offset + lay.ofm.length_values * kOfmValueBytes);

    auto small = lay;
    small.ofm.length_values -= 1;
    CHECK_THROWS_AS(emit_program(plan, Scheme::cyclic, small), LayoutError);
    auto overlap = lay;
    overlap.ofm.offset = lay.ifm.offset;
    CHECK_THROWS_AS(emit_program(plan, Scheme::cyclic, overlap), LayoutError);
    auto into_code = lay;
    into_code.ifm.offset = lay.code_base;
    CHECK_THROWS_AS(emit_program(plan, Scheme::cyclic, into_code), LayoutError);
}

TEST_CASE("wait fault injection") {
    auto prog = compile_layer(ring_plan(3, 2, 2), Scheme::linear);
    inject_wait_fault(prog, 2, -1, 5);
    std::uint32_t last = 0;
    for (const auto& i : prog.cores[2])
        if (i.op == Opcode::wait) last = i.arg;
    CHECK(last == 9);
    CHECK_THROWS_AS(inject_wait_fault(prog, 0, 0), ConfigError);  // vg 0 never waits
    CHECK_THROWS_AS(inject_wait_fault(prog, 7, 0), ConfigError);
}
