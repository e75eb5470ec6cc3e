/*
 * Copyright 2026 The wtfpad Authors.
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

#include <cstdint>

#include "wtfpad/trace.hpp"

namespace wtfpad {

struct BufloParams {
  double tau = 10.0;    // minimum padding duration (s)
  double rho = 0.020;   // inter-cell period (s)
  std::uint32_t cell_size = 1500;
};

struct TamarawParams {
  double rho_out = 0.053;  // seconds per outgoing cell
  double rho_in = 0.138;   // seconds per incoming cell
  std::uint32_t cell_size = 1500;
  std::uint32_t pad_multiple = 100;  // L, in cells
};

/// Constant-rate, fixed-size cells in both directions from the first real
/// event until all real bytes are sent and at least tau has passed. Real
/// bytes queue FIFO for the next free slot of their direction.
Trace buflo(const Trace& trace, const BufloParams& params);

/// Independent constant-rate streams per direction; each keeps sending
/// until its cell count is the smallest multiple of L covering its data.
Trace tamaraw(const Trace& trace, const TamarawParams& params);

}  // namespace wtfpad
