// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

// The packaged benchmark_main archive is LTO-only; own main instead.
BENCHMARK_MAIN();
