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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cimsync/fixtures.hpp"
#include "cimsync/model_ir.hpp"
#include "cimsync/oracle.hpp"
#include "doctest.h"
#include "nlohmann/json.hpp"

namespace fs = std::filesystem;
using namespace cimsync;

namespace {

struct Result {
    int code = 0;
    std::string out;
};

Result cli(const std::string& args) {
    static int counter = 0;
    const auto log = fs::path("cli_out_" + std::to_string(counter++) + ".txt");
    const auto cmd = std::string(CIMSYNC_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
#ifdef WEXITSTATUS
    return {WEXITSTATUS(status), ss.str()};
#else
    return {status, ss.str()};
#endif
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes a two-layer model and returns its path.
fs::path small_model(const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<LayerSpec> layers{
        fixtures::make_conv("conv_a", {3, 3, 5, 6}, {7, 6, 5}, {1, 1}, Padding::same, Activation::relu, 11),
        fixtures::make_conv("conv_b", {1, 1, 9, 4}, {4, 4, 9}, {1, 1}, Padding::valid, Activation::leaky_relu, 12),
    };
    const auto files = serialize_model(layers);
    std::ofstream(dir / "small.model") << files.text;
    std::ofstream(dir / "small.weights", std::ios::binary)
        .write(reinterpret_cast<const char*>(files.blob.data()), static_cast<std::streamsize>(files.blob.size()));
    return dir / "small.model";
}

}  // namespace

TEST_CASE("compile and simulate") {
    const fs::path dir = "cli_compile";
    const auto model = small_model(dir);
    const auto c = cli("compile --model " + model.string() + " --xbar 8x8 --scheme cyclic --out " + dir.string());
    REQUIRE(c.code == 0);
    CHECK(c.out.find("conv_a: P_V=6 P_H=1 cores=6 scheme=cyclic") != std::string::npos);
    CHECK(c.out.find("conv_b: P_V=2 P_H=1 cores=2 scheme=cyclic") != std::string::npos);
    REQUIRE(fs::exists(dir / "conv_a.bin"));
    REQUIRE(fs::exists(dir / "conv_a.cfg"));

    // IFM from a file, checked against the golden model
    const auto layer = fixtures::make_conv("conv_a", {3, 3, 5, 6}, {7, 6, 5}, {1, 1}, Padding::same,
                                           Activation::relu, 11);
    const auto ifm = fixtures::random_ifm(layer.input, 77);
    std::ofstream(dir / "a.ifm", std::ios::binary)
        .write(reinterpret_cast<const char*>(ifm.data()), static_cast<std::streamsize>(ifm.size()));
    const auto s = cli("simulate --bin " + (dir / "conv_a.bin").string() + " --cfg " + (dir / "conv_a.cfg").string() +
                       " --ifm " + (dir / "a.ifm").string() + " --xbar 8x8 --report " + (dir / "r.json").string() +
                       " --trace " + (dir / "t.csv").string() + " --monitor");
    CHECK(s.code == 0);
    CHECK(s.out.find("protocol ok") != std::string::npos);

    const auto rep = nlohmann::json::parse(slurp(dir / "r.json"));
    CHECK(rep["scheme"] == "cyclic");
    CHECK(rep["completed"] == true);
    CHECK(rep["ofm"]["data"].get<std::vector<std::int32_t>>() == oracle::golden_conv2d(layer, ifm));
    CHECK(slurp(dir / "t.csv").rfind("cycle,core,event,address,length\n", 0) == 0);
}

TEST_CASE("injected WAIT fault is reported as a deadlock") {
    const fs::path dir = "cli_fault";
    const auto model = small_model(dir);
    REQUIRE(cli("compile --model " + model.string() + " --xbar 8x8 --out " + dir.string()).code == 0);
    const auto r = cli("simulate --bin " + (dir / "conv_a.bin").string() + " --cfg " + (dir / "conv_a.cfg").string() +
                       " --xbar 8x8 --inject-wait-fault 2");
    CHECK(r.code == 3);
    CHECK(r.out.find("deadlock") != std::string::npos);
    CHECK(r.out.find("core 2 waiting") != std::string::npos);
}

TEST_CASE("verify") {
    const auto r = cli("verify --random 5 --seed 3 --xbar 6x6");
    CHECK(r.code == 0);
    const auto m = cli("verify --model " + small_model("cli_verify").string() + " --xbar 4x4 --scheme linear");
    CHECK(m.code == 0);
}

TEST_CASE("table and sync memory") {
    const auto t = cli("table2");
    CHECK(t.code == 0);
    CHECK(t.out.find("MISMATCH") == std::string::npos);
    const auto s = cli("syncmem --cores 1024");
    CHECK(s.code == 0);
    CHECK(s.out.find("4096") != std::string::npos);
    CHECK(s.out.find("32768") != std::string::npos);
    CHECK(s.out.find("87.5") != std::string::npos);
}

TEST_CASE("sweep output is reproducible") {
    const auto model = small_model("cli_sweep").string();
    const auto a = cli("sweep --model " + model + " --xbars 4,8 --bus-widths 4,16 --jobs 2");
    const auto b = cli("sweep --model " + model + " --xbars 4,8 --bus-widths 4,16 --jobs 1");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("layer,M,N,bus_width,scheme", 0) == 0);

    REQUIRE(cli("sweep --model " + model + " --xbars 8 --bus-widths 8 --out cli_sweep/out").code == 0);
    CHECK(fs::exists("cli_sweep/out/sweep.csv"));
    CHECK(fs::exists("cli_sweep/out/speedup_cyclic.dat"));
    const auto p = cli("plot-data cli_sweep/out/sweep.csv --out cli_sweep/plot");
    CHECK(p.code == 0);
}

TEST_CASE("bad input exits with a message") {
    const auto x = cli("compile --model " + small_model("cli_bad").string() + " --xbar 0x0 --out cli_bad");
    CHECK(x.code == 1);
    CHECK(x.out.find("error:") != std::string::npos);
    CHECK(cli("simulate --bin missing.bin --cfg missing.cfg").code == 1);
    CHECK(cli("no-such-command").code == 1);
    CHECK(cli("sweep --layers mobilenet --schemes bogus").code == 1);
}
