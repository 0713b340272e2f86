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

#include "cimsync/mapping.hpp"

#include <algorithm>
#include <sstream>

#include "cimsync/error.hpp"

namespace cimsync {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

}  // namespace

Partition compute_partition(const KernelShape& kernel, int rows, int cols) {
    if (rows < 1 || cols < 1) throw ConfigError("crossbar dimensions must be >= 1");
    if (kernel.ky < 1 || kernel.kx < 1 || kernel.kz < 1 || kernel.knum < 1)
        throw ShapeError("kernel dimensions must be >= 1");

    const std::int64_t unrolled = kernel.unrolled_length();
    Partition p;
    p.rows = rows;
    p.cols = cols;
    p.pv = static_cast<int>(ceil_div(unrolled, cols));
    p.ph = static_cast<int>(ceil_div(kernel.knum, rows));
    for (int h = 0; h < p.ph; ++h) p.row_sizes.push_back(std::min(rows, kernel.knum - h * rows));
    for (int v = 0; v < p.pv; ++v)
        p.col_sizes.push_back(static_cast<int>(std::min<std::int64_t>(cols, unrolled - std::int64_t{v} * cols)));
    return p;
}

Matrix8 unroll_kernel_matrix(const LayerSpec& layer) {
    const auto& k = layer.kernel;
    Matrix8 m;
    m.rows = k.knum;
    m.cols = k.unrolled_length();
    m.data.resize(static_cast<std::size_t>(m.rows * m.cols));
    // HWIO storage is (y, x, z, k); a row of the matrix walks (y, x, z) for a fixed k.
    const std::int64_t cols = m.cols;
    for (std::int64_t c = 0; c < cols; ++c)
        for (int kk = 0; kk < k.knum; ++kk)
            m.data[static_cast<std::size_t>(kk * cols + c)] = layer.weights[static_cast<std::size_t>(c * k.knum + kk)];
    return m;
}

InputIndexMap::InputIndexMap(const LayerSpec& layer)
    : kernel_(layer.kernel),
      input_(layer.input),
      stride_(layer.stride),
      pad_(pad_offsets(layer)),
      ox_(infer_ofm_shape(layer).ox) {}

std::int64_t InputIndexMap::index(std::int64_t j, std::int64_t col) const {
    const auto y = static_cast<int>(j / ox_);
    const auto x = static_cast<int>(j % ox_);
    const auto z = static_cast<int>(col % kernel_.kz);
    const auto xy = col / kernel_.kz;
    const auto dx = static_cast<int>(xy % kernel_.kx);
    const auto dy = static_cast<int>(xy / kernel_.kx);
    const int iy = y * stride_.y + dy - pad_.top;
    const int ix = x * stride_.x + dx - pad_.left;
    if (iy < 0 || iy >= input_.iy || ix < 0 || ix >= input_.ix) return kPad;
    return (std::int64_t{iy} * input_.ix + ix) * input_.iz + z;
}

std::vector<std::int64_t> InputIndexMap::slice(std::int64_t j, int col_begin, int count) const {
    std::vector<std::int64_t> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = index(j, col_begin + i);
    return out;
}

std::vector<std::int8_t> unroll_input_vector(const LayerSpec& layer, std::span<const std::int8_t> ifm, int y, int x) {
    const auto ofm = infer_ofm_shape(layer);
    if (y < 0 || y >= ofm.oy || x < 0 || x >= ofm.ox) throw ShapeError("output position out of range");
    if (static_cast<std::int64_t>(ifm.size()) != layer.input.element_count())
        throw ShapeError("IFM size does not match the layer input shape");
    const InputIndexMap map(layer);
    const auto j = std::int64_t{y} * ofm.ox + x;
    const auto len = layer.kernel.unrolled_length();
    std::vector<std::int8_t> out(static_cast<std::size_t>(len), 0);
    for (std::int64_t c = 0; c < len; ++c) {
        const auto idx = map.index(j, c);
        if (idx != InputIndexMap::kPad) out[static_cast<std::size_t>(c)] = ifm[static_cast<std::size_t>(idx)];
    }
    return out;
}

MappingPlan build_mapping_plan(const LayerSpec& layer, int rows, int cols) {
    layer.validate();
    MappingPlan plan;
    plan.layer = layer;
    plan.ofm = infer_ofm_shape(layer);
    plan.partition = compute_partition(layer.kernel, rows, cols);
    plan.input_map = InputIndexMap(layer);

    const auto& p = plan.partition;
    const auto matrix = unroll_kernel_matrix(layer);
    plan.tiles.reserve(static_cast<std::size_t>(p.core_count()));
    for (int hg = 0; hg < p.ph; ++hg) {
        for (int vg = 0; vg < p.pv; ++vg) {
            Tile t;
            t.hg = hg;
            t.vg = vg;
            t.row_begin = p.row_begin(hg);
            t.col_begin = p.col_begin(vg);
            t.rows = p.row_sizes[static_cast<std::size_t>(hg)];
            t.cols = p.col_sizes[static_cast<std::size_t>(vg)];
            t.weights.resize(static_cast<std::size_t>(t.rows) * t.cols);
            for (int r = 0; r < t.rows; ++r)
                for (int c = 0; c < t.cols; ++c)
                    t.weights[static_cast<std::size_t>(r) * t.cols + c] = matrix.at(t.row_begin + r, t.col_begin + c);
            plan.tiles.push_back(std::move(t));
        }
        const auto begin = layer.biases.begin() + p.row_begin(hg);
        plan.bias_slices.emplace_back(begin, begin + p.row_sizes[static_cast<std::size_t>(hg)]);
    }
    return plan;
}

std::string describe_plan(const MappingPlan& plan) {
    const auto& p = plan.partition;
    std::ostringstream os;
    os << "layer '" << plan.layer.name << "' kernel " << plan.layer.kernel.ky << 'x' << plan.layer.kernel.kx << 'x'
       << plan.layer.kernel.kz << 'x' << plan.layer.kernel.knum << " matrix " << plan.layer.kernel.knum << 'x'
       << plan.layer.kernel.unrolled_length() << "\n"
       << "crossbar " << p.rows << 'x' << p.cols << ": P_V=" << p.pv << " P_H=" << p.ph << " cores=" << p.core_count()
       << " O_V_NUM=" << plan.ofm.vector_count() << "\n";
    for (const auto& t : plan.tiles) {
        os << "  core " << p.core_id(t.hg, t.vg) << " C(" << t.hg << ',' << t.vg << ") rows [" << t.row_begin << ", "
           << t.row_begin + t.rows << ") cols [" << t.col_begin << ", " << t.col_begin + t.cols << ")\n";
    }
    return os.str();
}

}  // namespace cimsync
