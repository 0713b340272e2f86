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
 * @file oracle.hpp
 * @brief Brute-force reference models for checking compiled layers.
 *
 * Nothing here reuses the mapping code; index arithmetic is written out
 * again so a transposition in either place shows up as a mismatch.
 */

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cimsync/model_ir.hpp"

namespace cimsync::oracle {

/// Integer activation with the ISA semantics (LeakyReLU slope 1/8).
std::int32_t activate(Activation act, std::int32_t v);

/// Direct convolution by nested loops. OFM is O_Y x O_X x K_NUM, int32.
std::vector<std::int32_t> golden_conv2d(const LayerSpec& layer, std::span<const std::int8_t> ifm);

/// Full (untiled) kernel matrix times every unrolled input vector.
std::vector<std::int32_t> golden_im2col_mvm(const LayerSpec& layer, std::span<const std::int8_t> ifm);

}  // namespace cimsync::oracle
