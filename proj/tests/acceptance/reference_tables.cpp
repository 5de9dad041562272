// Copyright 2026 The clipdpo Authors
// SPDX-License-Identifier: Apache-2.0

#include "reference_tables.hpp"

namespace clipdpo::acceptance {

namespace {

constexpr AmberRow kAmber[] = {
    {"mPLUG-Owl", 21.6, 50.1, 76.1, 11.5, 40.1, 92.8, 10.5, 18.9, 48.7},
    {"LLaVA", 11.5, 51.0, 48.8, 5.5, 42.7, 74.1, 21.0, 32.7, 60.6},
    {"MiniGPT-4", 13.6, 63.0, 65.3, 11.3, 63.6, 90.5, 50.4, 64.7, 75.6},
    {"CogVLM", 5.6, 57.2, 23.6, 1.3, 69.0, 88.9, 60.9, 72.3, 83.4},
    {"mPLUG-Owl2", 10.6, 52.0, 39.9, 4.5, 75.6, 95.0, 66.9, 78.5, 84.0},
    {"InstructBLIP", 8.8, 52.2, 38.2, 4.4, 76.5, 84.5, 79.0, 81.7, 86.5},
    {"Qwen-VL", 5.5, 49.4, 23.6, 1.9, 81.2, 90.8, 79.7, 84.9, 89.7},
    {"GPT-4V", 4.6, 67.1, 30.7, 2.6, 83.4, 84.9, 90.1, 87.4, 91.4},
    {"LLaVA-1.5 7B", 7.8, 51.0, 36.4, 4.2, 72.0, 93.2, 62.4, 74.7, 83.5},
    {"LLaVA-1.5 7B + HA-DPO", 7.2, 33.6, 19.7, 2.6, 68.3, 68.1, 98.4, 80.5, 86.7},
    {"LLaVA-1.5 7B + clipdpo", 3.7, 47.8, 16.6, 1.3, 77.8, 84.4, 81.5, 82.9, 89.6},
    {"MobileVLM-v2 1.7B", 3.8, 39.6, 8.9, 0.5, 65.4, 92.6, 51.9, 66.5, 81.4},
    {"MobileVLM-v2 1.7B + clipdpo", 4.2, 38.9, 10.8, 0.5, 71.2, 88.7, 64.8, 74.9, 85.3},
    {"MobileVLM-v2 3B", 4.8, 38.7, 11.1, 0.7, 73.5, 92.1, 65.7, 76.7, 86.0},
    {"MobileVLM-v2 3B + clipdpo", 4.7, 41.5, 13.1, 0.5, 76.7, 91.0, 71.8, 80.3, 87.8},
    {"MobileVLM-v2 7B", 4.4, 38.9, 10.4, 0.6, 71.9, 95.0, 60.8, 74.1, 84.9},
    {"MobileVLM-v2 7B + clipdpo", 4.0, 38.0, 10.1, 0.5, 77.3, 93.4, 70.8, 80.5, 88.3},
};

// StanfordCars, OxfordPets, OxfordFlowers, ImageNet, Food-101, EuroSAT,
// Caltech-101, UCF-101, SUN397.
constexpr ZeroshotRow kZeroshot[] = {
    {"LLaVA-1.5", {23.2, 34.0, 7.3, 37.9, 45.3, 49.5, 82.7, 50.5, 43.1}, 40.0},
    {"LLaVA-1.5 + HA-DPO", {23.2, 33.4, 7.1, 36.9, 45.1, 49.4, 82.7, 50.3, 42.7}, 39.7},
    {"LLaVA-1.5 + clipdpo", {30.1, 44.8, 16.3, 42.2, 53.9, 52.1, 84.8, 53.1, 48.8}, 47.4},
    {"MobileVLM-v2 1.7B", {17.1, 15.2, 14.5, 32.6, 31.2, 49.3, 77.9, 45.5, 39.3}, 33.9},
    {"MobileVLM-v2 1.7B + clipdpo", {19.2, 32.6, 23.8, 41.3, 47.4, 48.9, 80.8, 50.2, 49.3}, 43.7},
    {"MobileVLM-v2 3B", {14.8, 23.5, 9.1, 35.7, 38.8, 53.2, 81.8, 48.6, 42.0}, 36.7},
    {"MobileVLM-v2 3B + clipdpo", {28.6, 40.9, 19.5, 44.3, 52.0, 56.4, 85.5, 52.3, 50.1}, 47.7},
    {"MobileVLM-v2 7B", {27.1, 32.5, 11.5, 37.7, 45.0, 43.1, 81.9, 49.0, 46.6}, 41.6},
    {"MobileVLM-v2 7B + clipdpo", {32.5, 51.3, 35.8, 50.1, 62.6, 59.3, 88.3, 56.2, 54.8}, 54.5},
};

}  // namespace

std::span<const AmberRow> amber_rows() { return kAmber; }
std::span<const ZeroshotRow> zeroshot_rows() { return kZeroshot; }

}  // namespace clipdpo::acceptance
