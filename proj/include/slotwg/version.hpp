// Copyright (c) slotwg contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace slotwg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace slotwg
