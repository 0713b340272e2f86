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

#include "cimsync/arch.hpp"
#include "cimsync/error.hpp"
#include "doctest.h"

using namespace cimsync;

TEST_CASE("defaults") {
    const ArchConfig a;
    CHECK(a.xbar_rows == 128);
    CHECK(a.xbar_cols == 128);
    CHECK(a.t_gpeu_per_elem == 1);
    CHECK(a.t_bus_overhead == 2);
    CHECK(a.t_mem == 1);
    CHECK(a.bytes_per_value_ifm == 1);
    CHECK(a.bytes_per_value_ofm == 1);
    CHECK(a.bytes_per_call == 4);
    CHECK(a.arbitration == Arbitration::fixed_priority);
    CHECK_FALSE(a.charge_instruction_fetch);
    CHECK_NOTHROW(a.validate());
}

TEST_CASE("parse key=value text") {
    const auto a = parse_arch_config(R"(# small system
xbar=64x32
bus_width_bytes = 16   # narrow
t_mvm=100
scheme=linear
arbitration=round_robin
charge_instruction_fetch=true
)");
    CHECK(a.xbar_rows == 64);
    CHECK(a.xbar_cols == 32);
    CHECK(a.bus_width_bytes == 16);
    CHECK(a.t_mvm == 100);
    CHECK(a.scheme == Scheme::linear);
    CHECK(a.arbitration == Arbitration::round_robin);
    CHECK(a.charge_instruction_fetch);
    CHECK(a.t_mem == ArchConfig{}.t_mem);
}

TEST_CASE("text round trip") {
    ArchConfig a;
    a.xbar_rows = 7;
    a.bus_width_bytes = 3;
    a.t_mem = 0;
    a.scheme = Scheme::sequential;
    CHECK(parse_arch_config(to_text(a)) == a);
}

TEST_CASE("rejects bad configs") {
    CHECK_THROWS_AS(parse_arch_config("xbar=0x64\n"), ParseError);
    CHECK_THROWS_AS(parse_arch_config("xbar_rows=0\n"), ConfigError);
    CHECK_THROWS_AS(parse_arch_config("bus_width_bytes=0\n"), ConfigError);
    CHECK_THROWS_AS(parse_arch_config("t_mvm=-1\n"), ParseError);
    CHECK_THROWS_AS(parse_arch_config("colour=blue\n"), ParseError);
    CHECK_THROWS_AS(parse_arch_config("t_mem=1\nt_mem=2\n"), ParseError);
    CHECK_THROWS_AS(parse_arch_config("t_mem\n"), ParseError);
    CHECK_THROWS_AS(parse_arch_config("scheme=fast\n"), ParseError);
    CHECK_THROWS_AS(parse_arch_config("arbitration=lottery\n"), ParseError);
    try {
        parse_arch_config("\n\nbytes_per_call=x\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.field() == "bytes_per_call");
    }
}

TEST_CASE("crossbar sizes") {
    CHECK(parse_xbar("64x32") == std::pair{64, 32});
    CHECK(parse_xbar("128") == std::pair{128, 128});
    CHECK(parse_xbar("8X8") == std::pair{8, 8});
    CHECK_THROWS_AS(parse_xbar("0x0"), ConfigError);
    CHECK_THROWS_AS(parse_xbar("ax4"), ConfigError);
    CHECK_THROWS_AS(parse_xbar(""), ConfigError);
}
