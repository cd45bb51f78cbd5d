// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "warmstart/error.hpp"

namespace warmstart::memplan {

enum class Precision { Full32, Half16, Brain16 };

std::uint64_t bytes_per_value(Precision p) noexcept;
std::string_view to_string(Precision p) noexcept;
/// Accepts fp32, fp16, bf16.
Precision parse_precision(std::string_view name);

/// Adam keeps two moments per parameter, each at full precision.
inline constexpr std::uint64_t kOptimizerStatesPerParam = 2;
inline constexpr std::uint64_t kOptimizerStateBytes = 4;

inline constexpr std::uint64_t kGB = 1'000'000'000;

struct ModelSpec {
  std::uint64_t param_count = 0;
};

struct HardwareSpec {
  std::uint32_t gpu_count = 1;
  std::uint64_t gpu_memory_bytes = 40 * kGB;
  std::uint64_t system_ram_bytes = 128 * kGB;
  bool nvlink_pairs = false;
  int pcie_generation = 4;
};

enum class Location { Gpu, Cpu };

struct FitCheck {
  std::uint32_t devices = 1;       // GPUs sharing the model under an even split
  std::uint64_t per_gpu_bytes = 0;
  std::uint64_t gpu_capacity_bytes = 0;
  bool gpu_fits = false;
  bool ram_fits = false;
  bool fits = false;
  double headroom_fraction = 0.0;  // (capacity - per_gpu) / capacity, negative when over
};

/// Weights, gradients and optimizer states only; activations are not modeled.
struct MemoryReport {
  std::uint64_t param_count = 0;
  Precision precision = Precision::Full32;
  bool offload = false;
  std::uint64_t weights_bytes = 0;
  std::uint64_t gradients_bytes = 0;
  std::uint64_t optimizer_bytes = 0;
  Location optimizer_location = Location::Gpu;
  std::uint64_t gpu_bytes = 0;  // charged to GPU memory, all devices together
  std::uint64_t cpu_bytes = 0;  // charged to system memory
  std::optional<FitCheck> fit;
  std::vector<std::string> notes;
};

MemoryReport estimate(const ModelSpec& model, Precision precision, bool offload);

/// Fills report.fit for `devices` GPUs of `hw` sharing the GPU charge evenly.
void check_fit(MemoryReport& report, const HardwareSpec& hw, std::uint32_t devices = 1);

struct InterconnectReport {
  bool applicable = false;  // false with a single GPU
  double pcie_gb_per_s = 0.0;
  std::string pcie_label;
  bool nvlink = false;
  double nvlink_min_gb_per_s = 0.0;
  double nvlink_max_gb_per_s = 0.0;
  double advantage_min = 0.0;  // NVLink over PCIe
  double advantage_max = 0.0;
  double gpu_to_gpu_gb_per_s = 0.0;  // worst path between GPUs
  std::string slower_path;
  std::vector<std::string> notes;
};

/// Link bandwidths between GPUs. With NVLink pairs, traffic between pairs still
/// crosses PCIe, which stays the slower path.
InterconnectReport interconnect_compare(const HardwareSpec& hw);

enum class Action { OffloadOptimizer, Use16Bit, ModelParallel, AddSystemMemory, AddGpuMemory };

struct Recommendation {
  Action action;
  std::string text;
};

struct Plan {
  std::vector<Recommendation> required;  // empty when the default setup already fits
  std::vector<std::string> notes;        // standing hardware guidance and caveats
  MemoryReport final_report;             // configuration after applying `required`
  bool feasible = false;
};

/// Rule chain starting from 32-bit with on-GPU optimizer on one GPU: offload
/// the optimizer, then 16-bit weights, then split evenly across all GPUs.
Plan recommend(const ModelSpec& model, const HardwareSpec& hw);

std::string render_text(const MemoryReport& report);
/// key=value lines for scripting.
std::string render_kv(const MemoryReport& report);

}  // namespace warmstart::memplan
