// Copyright (c) 2026 The bmk Authors. Licensed under the Apache 2.0 license. See LICENSE in the project root.
#pragma once

namespace bmk {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bmk
