/*
 * Copyright 2026 The sadsp Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <span>

#include "sadsp/ndkit/graph.hpp"

namespace sadsp::nd {

// Lower clamp applied to every argument of log().
inline constexpr double kLogFloor = 1e-12;

Var matmul(const Var& a, const Var& b);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var neg(const Var& a);
Var relu(const Var& a);
Var sigmoid(const Var& a);
// log(max(x, kLogFloor)); the clamped region has zero gradient.
Var log(const Var& a);
Var square(const Var& a);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double offset);

// a[m x n] + bias[n] added to every row.
Var add_bias(const Var& a, const Var& bias);

// Softmax over the last dimension (per row), max-subtracted.
Var softmax(const Var& logits);

Var sum(const Var& a);
Var mean(const Var& a);

// out[i] = a[i, index[i]].
Var pick(const Var& a, std::span<const std::size_t> index);
// Columns [begin, end) of a matrix.
Var slice_cols(const Var& a, std::size_t begin, std::size_t end);
// Stacks b below a.
Var concat_rows(const Var& a, const Var& b);

// Constant copy of a's value with no path back to a.
Var detach(const Var& a);

// Value-only helpers shared by the ops and by callers that don't need a tape.
Tensor softmax_values(const Tensor& logits);
double sigmoid_value(double x);

}  // namespace sadsp::nd
