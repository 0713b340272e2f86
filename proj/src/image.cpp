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

#include "cimsync/image.hpp"

#include <cctype>
#include <climits>
#include <cstring>
#include <sstream>

#include "cimsync/error.hpp"
#include "text_util.hpp"

namespace cimsync {

std::vector<std::uint8_t> write_bin(const Program& program, std::uint64_t capacity_bytes) {
    const auto& layout = program.layout;
    if (layout.sections.size() != program.cores.size())
        throw LayoutError("layout has " + std::to_string(layout.sections.size()) + " sections for " +
                          std::to_string(program.cores.size()) + " cores");
    if (program.cores.size() > 65535)
        throw CapacityError("bin format holds at most 65535 cores, program has " +
                            std::to_string(program.cores.size()));
    const auto size = layout.image_bytes();
    if (size > capacity_bytes)
        throw CapacityError("image of " + std::to_string(size) + " bytes exceeds shared memory of " +
                            std::to_string(capacity_bytes) + " bytes");

    std::vector<std::uint8_t> out;
    out.reserve(bin_header_bytes(program.cores.size()));
    out.insert(out.end(), {'C', 'I', 'M', 'B'});
    detail::append_le16(out, kBinVersion);
    detail::append_le16(out, static_cast<std::uint16_t>(program.cores.size()));
    for (const auto& s : layout.sections) {
        detail::append_le32(out, s.offset);
        detail::append_le32(out, s.length_bytes);
    }
    detail::append_le32(out, layout.ifm.offset);
    detail::append_le32(out, layout.ifm.length_values);
    detail::append_le32(out, layout.ofm.offset);
    detail::append_le32(out, layout.ofm.length_values);
    if (out.size() > layout.code_base && !program.cores.empty())
        throw LayoutError("instruction area overlaps the bin header");

    out.resize(static_cast<std::size_t>(size), 0);
    for (std::size_t c = 0; c < program.cores.size(); ++c) {
        const auto& s = layout.sections[c];
        if (s.length_bytes != program.cores[c].size() * kInstructionBytes)
            throw LayoutError("section length of core " + std::to_string(c) + " does not match its instruction count");
        auto* dst = out.data() + s.offset;
        for (const auto& instr : program.cores[c]) {
            const auto word = encode(instr);
            std::memcpy(dst, word.data(), word.size());
            dst += word.size();
        }
    }
    return out;
}

BinImage read_bin(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), "CIMB", 4) != 0) throw ConsistencyError("bin: bad magic");
    const auto version = detail::load_le16(bytes.data() + 4);
    if (version != kBinVersion) throw ConsistencyError("bin: unsupported version " + std::to_string(version));
    const std::size_t cores = detail::load_le16(bytes.data() + 6);
    if (bytes.size() < bin_header_bytes(cores)) throw ConsistencyError("bin: truncated header");

    BinImage image;
    const auto* p = bytes.data() + 8;
    for (std::size_t c = 0; c < cores; ++c, p += 8)
        image.layout.sections.push_back({detail::load_le32(p), detail::load_le32(p + 4)});
    image.layout.ifm = {detail::load_le32(p), detail::load_le32(p + 4)};
    image.layout.ofm = {detail::load_le32(p + 8), detail::load_le32(p + 12)};
    image.layout.code_base = image.layout.sections.empty() ? bin_header_bytes(0) : image.layout.sections.front().offset;

    if (image.layout.image_bytes() > bytes.size())
        throw ConsistencyError("bin: image declares " + std::to_string(image.layout.image_bytes()) +
                               " bytes but file has " + std::to_string(bytes.size()));
    for (std::size_t c = 0; c < cores; ++c) {
        const auto& s = image.layout.sections[c];
        if (s.length_bytes % kInstructionBytes != 0)
            throw ConsistencyError("bin: section of core " + std::to_string(c) + " is not a whole number of words");
        if (s.offset < bin_header_bytes(cores)) throw ConsistencyError("bin: section overlaps the header");
        std::vector<Instruction> stream;
        stream.reserve(s.length_bytes / kInstructionBytes);
        for (std::uint32_t off = 0; off < s.length_bytes; off += kInstructionBytes)
            stream.push_back(decode(std::span<const std::uint8_t, kInstructionBytes>(bytes.data() + s.offset + off,
                                                                                       kInstructionBytes)));
        image.cores.push_back(std::move(stream));
    }
    return image;
}

LayerConfig make_layer_config(const MappingPlan& plan, const Program& program) {
    if (program.cores.size() != plan.tiles.size())
        throw ConsistencyError("program and plan disagree on the core count");
    LayerConfig cfg;
    cfg.scheme = program.scheme;
    cfg.ifm = plan.layer.input;
    cfg.ofm = plan.ofm;
    for (std::size_t c = 0; c < plan.tiles.size(); ++c) {
        const auto& t = plan.tiles[c];
        CoreConfig core;
        core.core_id = static_cast<int>(c);
        core.hg = t.hg;
        core.vg = t.vg;
        core.rows = t.rows;
        core.cols = t.cols;
        core.weights = t.weights;
        core.biases = plan.bias_slices[static_cast<std::size_t>(t.hg)];
        core.instr_offset = program.layout.sections.at(c).offset;
        cfg.cores.push_back(std::move(core));
    }
    return cfg;
}

std::string write_cfg(const LayerConfig& cfg) {
    std::ostringstream os;
    os << "cimsync-cfg 1\n"
       << "scheme " << to_string(cfg.scheme) << "\n"
       << "ifm " << cfg.ifm.iy << ' ' << cfg.ifm.ix << ' ' << cfg.ifm.iz << "\n"
       << "ofm " << cfg.ofm.oy << ' ' << cfg.ofm.ox << ' ' << cfg.ofm.oz << "\n"
       << "cores " << cfg.cores.size() << "\n";
    for (const auto& c : cfg.cores) {
        os << "core " << c.core_id << "\nhg " << c.hg << "\nvg " << c.vg << "\nrows " << c.rows << "\ncols " << c.cols
           << "\nweights\n";
        for (int r = 0; r < c.rows; ++r) {
            for (int k = 0; k < c.cols; ++k) {
                if (k) os << ' ';
                os << static_cast<int>(c.weights[static_cast<std::size_t>(r) * c.cols + k]);
            }
            os << '\n';
        }
        os << "biases\n";
        for (int r = 0; r < c.rows; ++r) os << (r ? " " : "") << c.biases[static_cast<std::size_t>(r)];
        os << "\ninstr_offset " << c.instr_offset << "\nend\n";
    }
    return os.str();
}

std::string write_cfg(const MappingPlan& plan, const Program& program) {
    return write_cfg(make_layer_config(plan, program));
}

namespace {

/// Token stream over whitespace-separated text that remembers line numbers.
class Tokens {
public:
    explicit Tokens(std::string_view text) : text_(text) {}

    bool done() {
        skip();
        return pos_ >= text_.size();
    }

    std::string next(const std::string& field) {
        skip();
        if (pos_ >= text_.size()) throw ParseError(line_, field, "unexpected end of file");
        const auto start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        return std::string(text_.substr(start, pos_ - start));
    }

    void expect(const std::string& keyword) {
        const auto tok = next(keyword);
        if (tok != keyword) throw ParseError(line_, keyword, "expected '" + keyword + "', got '" + tok + "'");
    }

    template <typename Int>
    Int integer(const std::string& field, long long lo, long long hi) {
        const auto tok = next(field);
        long long v = 0;
        if (!detail::parse_integer(tok, v)) throw ParseError(line_, field, "'" + tok + "' is not an integer");
        if (v < lo || v > hi) throw ParseError(line_, field, "value " + tok + " out of range");
        return static_cast<Int>(v);
    }

    int line() const { return line_; }

private:
    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            if (text_[pos_] == '\n') ++line_;
            ++pos_;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

}  // namespace

LayerConfig read_cfg(std::string_view text) {
    constexpr long long kDimMax = 1 << 24;
    Tokens in(text);
    LayerConfig cfg;
    in.expect("cimsync-cfg");
    if (in.integer<int>("version", 0, 1000) != 1) throw ParseError(in.line(), "version", "unsupported cfg version");
    in.expect("scheme");
    try {
        cfg.scheme = parse_scheme(in.next("scheme"));
    } catch (const ConfigError& e) {
        throw ParseError(in.line(), "scheme", e.what());
    }
    in.expect("ifm");
    cfg.ifm.iy = in.integer<int>("ifm", 1, kDimMax);
    cfg.ifm.ix = in.integer<int>("ifm", 1, kDimMax);
    cfg.ifm.iz = in.integer<int>("ifm", 1, kDimMax);
    in.expect("ofm");
    cfg.ofm.oy = in.integer<int>("ofm", 1, kDimMax);
    cfg.ofm.ox = in.integer<int>("ofm", 1, kDimMax);
    cfg.ofm.oz = in.integer<int>("ofm", 1, kDimMax);
    in.expect("cores");
    const auto count = in.integer<std::size_t>("cores", 0, 65535);
    for (std::size_t i = 0; i < count; ++i) {
        CoreConfig c;
        in.expect("core");
        c.core_id = in.integer<int>("core", 0, 65535);
        in.expect("hg");
        c.hg = in.integer<int>("hg", 0, 65535);
        in.expect("vg");
        c.vg = in.integer<int>("vg", 0, 65535);
        in.expect("rows");
        c.rows = in.integer<int>("rows", 1, 65535);
        in.expect("cols");
        c.cols = in.integer<int>("cols", 1, 65535);
        in.expect("weights");
        c.weights.resize(static_cast<std::size_t>(c.rows) * c.cols);
        for (auto& w : c.weights) w = in.integer<std::int8_t>("weights", -128, 127);
        in.expect("biases");
        c.biases.resize(static_cast<std::size_t>(c.rows));
        for (auto& b : c.biases) b = in.integer<std::int32_t>("biases", INT32_MIN, INT32_MAX);
        in.expect("instr_offset");
        c.instr_offset = in.integer<std::uint32_t>("instr_offset", 0, UINT32_MAX);
        in.expect("end");
        cfg.cores.push_back(std::move(c));
    }
    if (!in.done()) throw ParseError(in.line(), "end", "trailing content after the last core block");
    return cfg;
}

}  // namespace cimsync
