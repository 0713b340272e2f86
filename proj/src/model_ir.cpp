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

#include "cimsync/model_ir.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <map>
#include <optional>
#include <sstream>

#include "cimsync/error.hpp"
#include "text_util.hpp"

namespace cimsync {

std::string_view to_string(LayerKind kind) {
    return kind == LayerKind::conv2d ? "conv2d" : "dense";
}

std::string_view to_string(Padding padding) {
    return padding == Padding::valid ? "valid" : "same";
}

std::string_view to_string(Activation act) {
    switch (act) {
        case Activation::none: return "none";
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
    }
    return "none";
}

void LayerSpec::validate() const {
    const auto where = [this] { return "layer '" + name + "': "; };
    if (kernel.ky < 1 || kernel.kx < 1 || kernel.kz < 1 || kernel.knum < 1)
        throw ShapeError(where() + "kernel dimensions must be >= 1");
    if (input.iy < 1 || input.ix < 1 || input.iz < 1)
        throw ShapeError(where() + "input dimensions must be >= 1");
    if (stride.y < 1 || stride.x < 1) throw ShapeError(where() + "strides must be >= 1");
    if (kernel.kz != input.iz)
        throw ShapeError(where() + "channel mismatch: kernel K_Z=" + std::to_string(kernel.kz) +
                         " but input has " + std::to_string(input.iz) + " channels");
    if (kind == LayerKind::dense &&
        (kernel.ky != 1 || kernel.kx != 1 || input.iy != 1 || input.ix != 1))
        throw ShapeError(where() + "dense layers require 1x1 kernel and 1x1 spatial input");
    if (static_cast<std::int64_t>(weights.size()) != kernel.element_count())
        throw ShapeError(where() + "expected " + std::to_string(kernel.element_count()) + " weights, got " +
                         std::to_string(weights.size()));
    if (static_cast<std::int64_t>(biases.size()) != kernel.knum)
        throw ShapeError(where() + "expected " + std::to_string(kernel.knum) + " biases, got " +
                         std::to_string(biases.size()));
}

OfmShape infer_ofm_shape(const LayerSpec& layer) {
    const auto& k = layer.kernel;
    const auto& in = layer.input;
    OfmShape out;
    out.oz = k.knum;
    if (layer.padding == Padding::valid) {
        if (k.kx > in.ix || k.ky > in.iy)
            throw ShapeError("layer '" + layer.name + "': kernel larger than input with valid padding, output is empty");
        out.oy = (in.iy - k.ky) / layer.stride.y + 1;
        out.ox = (in.ix - k.kx) / layer.stride.x + 1;
    } else {
        out.oy = (in.iy + layer.stride.y - 1) / layer.stride.y;
        out.ox = (in.ix + layer.stride.x - 1) / layer.stride.x;
    }
    return out;
}

PadOffsets pad_offsets(const LayerSpec& layer) {
    if (layer.padding == Padding::valid) return {};
    const auto ofm = infer_ofm_shape(layer);
    const int total_y = std::max((ofm.oy - 1) * layer.stride.y + layer.kernel.ky - layer.input.iy, 0);
    const int total_x = std::max((ofm.ox - 1) * layer.stride.x + layer.kernel.kx - layer.input.ix, 0);
    return {total_y / 2, total_x / 2};
}

LayerSpec make_dense(std::string name, int inputs, int units, Activation act,
                     std::vector<std::int8_t> weights, std::vector<std::int32_t> biases) {
    LayerSpec layer;
    layer.name = std::move(name);
    layer.kind = LayerKind::dense;
    layer.kernel = {1, 1, inputs, units};
    layer.input = {1, 1, inputs};
    layer.activation = act;
    layer.weights = std::move(weights);
    layer.biases = std::move(biases);
    layer.validate();
    return layer;
}

namespace {

struct PendingLayer {
    int line = 0;
    std::map<std::string, std::pair<std::string, int>> fields;  // key -> (value, line)
};

std::vector<long long> parse_ints(const std::string& value, std::size_t count, int line, const std::string& key) {
    std::vector<long long> out;
    for (const auto& tok : detail::split_ws(value)) {
        long long v = 0;
        if (!detail::parse_integer(tok, v)) throw ParseError(line, key, "'" + tok + "' is not an integer");
        out.push_back(v);
    }
    if (out.size() != count)
        throw ParseError(line, key, "expected " + std::to_string(count) + " integers, got " + std::to_string(out.size()));
    return out;
}

int to_dim(long long v, int line, const std::string& key) {
    if (v < 1 || v > (1 << 24)) throw ParseError(line, key, "dimension out of range: " + std::to_string(v));
    return static_cast<int>(v);
}

LayerSpec build_layer(const PendingLayer& p, std::span<const std::uint8_t> blob, std::int64_t& declared_bytes) {
    static const std::vector<std::string> known = {"name",   "kind",       "kernel",        "input",      "stride",
                                                   "padding", "activation", "weight_offset", "bias_offset"};
    for (const auto& [key, vl] : p.fields)
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ParseError(vl.second, key, "unknown field");

    const auto get = [&](const std::string& key) -> std::optional<std::pair<std::string, int>> {
        auto it = p.fields.find(key);
        if (it == p.fields.end()) return std::nullopt;
        return it->second;
    };
    const auto require = [&](const std::string& key) {
        auto v = get(key);
        if (!v) throw ParseError(p.line, key, "missing required field");
        return *v;
    };

    LayerSpec layer;
    if (auto name = get("name")) layer.name = name->first;

    const auto [kind, kind_line] = require("kind");
    if (kind == "conv2d") {
        layer.kind = LayerKind::conv2d;
    } else if (kind == "dense") {
        layer.kind = LayerKind::dense;
    } else {
        throw UnsupportedOpError("line " + std::to_string(kind_line) + ": unsupported layer kind '" + kind + "'");
    }

    const auto [kernel_s, kernel_line] = require("kernel");
    const auto k = parse_ints(kernel_s, 4, kernel_line, "kernel");
    layer.kernel = {to_dim(k[0], kernel_line, "kernel"), to_dim(k[1], kernel_line, "kernel"),
                    to_dim(k[2], kernel_line, "kernel"), to_dim(k[3], kernel_line, "kernel")};

    const auto [input_s, input_line] = require("input");
    const auto in = parse_ints(input_s, 3, input_line, "input");
    layer.input = {to_dim(in[0], input_line, "input"), to_dim(in[1], input_line, "input"),
                   to_dim(in[2], input_line, "input")};

    if (auto s = get("stride")) {
        const auto st = parse_ints(s->first, 2, s->second, "stride");
        layer.stride = {to_dim(st[0], s->second, "stride"), to_dim(st[1], s->second, "stride")};
    }
    if (auto pad = get("padding")) {
        if (pad->first == "valid") layer.padding = Padding::valid;
        else if (pad->first == "same") layer.padding = Padding::same;
        else throw ParseError(pad->second, "padding", "expected 'valid' or 'same'");
    }
    if (auto act = get("activation")) {
        if (act->first == "none") layer.activation = Activation::none;
        else if (act->first == "relu") layer.activation = Activation::relu;
        else if (act->first == "leaky_relu") layer.activation = Activation::leaky_relu;
        else throw ParseError(act->second, "activation", "expected none, relu or leaky_relu");
    }

    const auto [woff_s, woff_line] = require("weight_offset");
    const auto [boff_s, boff_line] = require("bias_offset");
    const auto woff = parse_ints(woff_s, 1, woff_line, "weight_offset")[0];
    const auto boff = parse_ints(boff_s, 1, boff_line, "bias_offset")[0];
    if (woff < 0) throw ParseError(woff_line, "weight_offset", "negative offset");
    if (boff < 0) throw ParseError(boff_line, "bias_offset", "negative offset");

    const auto where = "layer '" + layer.name + "' (line " + std::to_string(p.line) + ")";
    if (layer.kind == LayerKind::conv2d && layer.kernel.kz != layer.input.iz)
        throw ShapeError(where + ": channel mismatch: kernel K_Z=" + std::to_string(layer.kernel.kz) +
                         " but input has " + std::to_string(layer.input.iz) + " channels");

    const std::int64_t wbytes = layer.kernel.element_count();
    const std::int64_t bbytes = std::int64_t{layer.kernel.knum} * 4;
    const auto blob_size = static_cast<std::int64_t>(blob.size());
    if (woff + wbytes > blob_size)
        throw SizeError(where + ": weights [" + std::to_string(woff) + ", " + std::to_string(woff + wbytes) +
                        ") exceed weight blob of " + std::to_string(blob_size) + " bytes");
    if (boff + bbytes > blob_size)
        throw SizeError(where + ": biases [" + std::to_string(boff) + ", " + std::to_string(boff + bbytes) +
                        ") exceed weight blob of " + std::to_string(blob_size) + " bytes");
    declared_bytes += wbytes + bbytes;

    layer.weights.resize(static_cast<std::size_t>(wbytes));
    std::memcpy(layer.weights.data(), blob.data() + woff, static_cast<std::size_t>(wbytes));
    layer.biases.resize(static_cast<std::size_t>(layer.kernel.knum));
    for (std::size_t i = 0; i < layer.biases.size(); ++i)
        layer.biases[i] = static_cast<std::int32_t>(detail::load_le32(blob.data() + boff + 4 * i));

    layer.validate();
    return layer;
}

}  // namespace

std::vector<LayerSpec> parse_model(std::string_view model_text, std::span<const std::uint8_t> weight_blob) {
    std::vector<PendingLayer> pending;
    int line_no = 0;
    for (const auto& raw : detail::split_lines(model_text)) {
        ++line_no;
        const auto line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line != "[layer]") throw ParseError(line_no, line, "unknown section, expected [layer]");
            pending.push_back({line_no, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, line, "expected key=value");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        if (pending.empty()) throw ParseError(line_no, key, "field outside of a [layer] block");
        if (!pending.back().fields.emplace(key, std::make_pair(value, line_no)).second)
            throw ParseError(line_no, key, "duplicate field");
    }

    std::vector<LayerSpec> layers;
    std::int64_t declared = 0;
    for (const auto& p : pending) layers.push_back(build_layer(p, weight_blob, declared));
    if (declared != static_cast<std::int64_t>(weight_blob.size())) {
        const std::string last = layers.empty() ? std::string("<none>") : "'" + layers.back().name + "'";
        throw SizeError("weight blob has " + std::to_string(weight_blob.size()) + " bytes but layers declare " +
                        std::to_string(declared) + " (last layer " + last + ")");
    }
    return layers;
}

ModelFiles serialize_model(std::span<const LayerSpec> layers) {
    ModelFiles files;
    std::ostringstream os;
    os << "# cimsync model, " << layers.size() << " layer(s)\n";
    for (const auto& layer : layers) {
        layer.validate();
        const auto woff = files.blob.size();
        files.blob.insert(files.blob.end(), reinterpret_cast<const std::uint8_t*>(layer.weights.data()),
                          reinterpret_cast<const std::uint8_t*>(layer.weights.data()) + layer.weights.size());
        const auto boff = files.blob.size();
        for (const auto b : layer.biases) detail::append_le32(files.blob, static_cast<std::uint32_t>(b));

        os << "\n[layer]\n";
        if (!layer.name.empty()) os << "name=" << layer.name << "\n";
        os << "kind=" << to_string(layer.kind) << "\n"
           << "kernel=" << layer.kernel.ky << ' ' << layer.kernel.kx << ' ' << layer.kernel.kz << ' '
           << layer.kernel.knum << "\n"
           << "input=" << layer.input.iy << ' ' << layer.input.ix << ' ' << layer.input.iz << "\n"
           << "stride=" << layer.stride.y << ' ' << layer.stride.x << "\n"
           << "padding=" << to_string(layer.padding) << "\n"
           << "activation=" << to_string(layer.activation) << "\n"
           << "weight_offset=" << woff << "\n"
           << "bias_offset=" << boff << "\n";
    }
    files.text = os.str();
    return files;
}

}  // namespace cimsync
