// Copyright (c) 2026, The warmstart Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "warmstart/memplan.hpp"

#include <fmt/format.h>

#include "warmstart/error.hpp"

namespace warmstart::memplan {

std::uint64_t bytes_per_value(Precision p) noexcept {
  return p == Precision::Full32 ? 4 : 2;
}

std::string_view to_string(Precision p) noexcept {
  switch (p) {
    case Precision::Full32: return "fp32";
    case Precision::Half16: return "fp16";
    case Precision::Brain16: return "bf16";
  }
  return "?";
}

Precision parse_precision(std::string_view name) {
  if (name == "fp32") return Precision::Full32;
  if (name == "fp16") return Precision::Half16;
  if (name == "bf16") return Precision::Brain16;
  throw Error(ErrorCode::InvalidArgument, "unknown precision \"" + std::string(name) + "\"");
}

MemoryReport estimate(const ModelSpec& model, Precision precision, bool offload) {
  const std::uint64_t P = model.param_count;
  if (P == 0) throw Error(ErrorCode::InvalidArgument, "parameter count must be positive");
  if (P > (UINT64_MAX / 64)) throw Error(ErrorCode::InvalidArgument, "parameter count too large");

  MemoryReport r;
  r.param_count = P;
  r.precision = precision;
  r.offload = offload;
  r.weights_bytes = P * bytes_per_value(precision);
  r.gradients_bytes = P * bytes_per_value(precision);
  r.optimizer_bytes = kOptimizerStatesPerParam * P * kOptimizerStateBytes;
  r.optimizer_location = offload ? Location::Cpu : Location::Gpu;
  r.gpu_bytes = r.weights_bytes + r.gradients_bytes + (offload ? 0 : r.optimizer_bytes);
  r.cpu_bytes = offload ? r.optimizer_bytes : 0;

  r.notes.push_back("activation memory is not included; leave room for activations and workspace");
  r.notes.push_back(
      "optimizer overhead counted as two extra 4-byte values per parameter (Adam moments), "
      "not as twice the weight bytes");
  if (precision != Precision::Full32) {
    r.notes.push_back("optimizer moments assumed to stay at 32-bit precision");
  }
  return r;
}

void check_fit(MemoryReport& report, const HardwareSpec& hw, std::uint32_t devices) {
  if (devices == 0 || devices > hw.gpu_count) {
    throw Error(ErrorCode::InvalidArgument, "cannot split across " + std::to_string(devices) +
                                                " of " + std::to_string(hw.gpu_count) + " GPUs");
  }
  FitCheck fit;
  fit.devices = devices;
  fit.per_gpu_bytes = (report.gpu_bytes + devices - 1) / devices;
  fit.gpu_capacity_bytes = hw.gpu_memory_bytes;
  fit.gpu_fits = fit.per_gpu_bytes <= hw.gpu_memory_bytes;
  fit.ram_fits = report.cpu_bytes <= hw.system_ram_bytes;
  fit.fits = fit.gpu_fits && fit.ram_fits;
  fit.headroom_fraction =
      hw.gpu_memory_bytes == 0
          ? 0.0
          : (static_cast<double>(hw.gpu_memory_bytes) - static_cast<double>(fit.per_gpu_bytes)) /
                static_cast<double>(hw.gpu_memory_bytes);
  report.fit = fit;
}

InterconnectReport interconnect_compare(const HardwareSpec& hw) {
  InterconnectReport r;
  switch (hw.pcie_generation) {
    case 3: r.pcie_gb_per_s = 15.75; break;
    case 4: r.pcie_gb_per_s = 31.5; break;
    case 5: r.pcie_gb_per_s = 63.0; break;
    default:
      throw Error(ErrorCode::InvalidArgument,
                  "unsupported PCIe generation " + std::to_string(hw.pcie_generation));
  }
  r.pcie_label = fmt::format("PCIe {}.0", hw.pcie_generation);
  if (hw.gpu_count < 2) {
    r.notes.push_back("single GPU: no GPU-to-GPU traffic, interconnect not applicable");
    return r;
  }
  r.applicable = true;
  r.nvlink = hw.nvlink_pairs;
  r.gpu_to_gpu_gb_per_s = r.pcie_gb_per_s;
  r.slower_path = r.pcie_label;
  if (hw.nvlink_pairs) {
    r.nvlink_min_gb_per_s = 50.0;
    r.nvlink_max_gb_per_s = 100.0;
    r.advantage_min = r.nvlink_min_gb_per_s / r.pcie_gb_per_s;
    r.advantage_max = r.nvlink_max_gb_per_s / r.pcie_gb_per_s;
    r.notes.push_back(fmt::format("NVLink bridges: 50-100 GB/s within each bridged pair vs {} GB/s for {}",
                                  r.pcie_gb_per_s, r.pcie_label));
    if (hw.gpu_count > 2) {
      r.notes.push_back(fmt::format("traffic between different pairs still crosses {} ({} GB/s)",
                                    r.pcie_label, r.pcie_gb_per_s));
    }
  } else {
    r.notes.push_back(fmt::format("GPU-to-GPU traffic goes over {} at {} GB/s; NVLink bridges offer 50-100 GB/s",
                                  r.pcie_label, r.pcie_gb_per_s));
  }
  return r;
}

namespace {

std::string gb(std::uint64_t bytes) {
  return fmt::format("{:.2f} GB", static_cast<double>(bytes) / static_cast<double>(kGB));
}

}  // namespace

Plan recommend(const ModelSpec& model, const HardwareSpec& hw) {
  Plan plan;

  MemoryReport r = estimate(model, Precision::Full32, false);
  check_fit(r, hw, 1);
  if (!r.fit->gpu_fits) {
    plan.required.push_back({Action::OffloadOptimizer,
                             fmt::format("offload optimizer states to system memory: {} on one GPU exceeds {}",
                                         gb(r.gpu_bytes), gb(hw.gpu_memory_bytes))});
    r = estimate(model, Precision::Full32, true);
    check_fit(r, hw, 1);
  }
  if (!r.fit->gpu_fits) {
    plan.required.push_back({Action::Use16Bit,
                             fmt::format("use 16-bit weights and gradients (bf16 where supported, else fp16): "
                                         "{} of 32-bit weights and gradients still exceeds {}",
                                         gb(r.gpu_bytes), gb(hw.gpu_memory_bytes))});
    r = estimate(model, Precision::Brain16, true);
    check_fit(r, hw, 1);
  }
  if (!r.fit->gpu_fits) {
    if (hw.gpu_count > 1) {
      check_fit(r, hw, hw.gpu_count);
      plan.required.push_back({Action::ModelParallel,
                               fmt::format("split the model evenly across {} GPUs: {} per GPU",
                                           hw.gpu_count, gb(r.fit->per_gpu_bytes))});
    }
    if (!r.fit->gpu_fits) {
      plan.required.push_back({Action::AddGpuMemory,
                               fmt::format("does not fit: {} per GPU exceeds {}; more GPU memory is needed",
                                           gb(r.fit->per_gpu_bytes), gb(hw.gpu_memory_bytes))});
    }
  }
  if (!r.fit->ram_fits) {
    plan.required.push_back({Action::AddSystemMemory,
                             fmt::format("offloaded optimizer states need {} of system memory but only {} is installed",
                                         gb(r.cpu_bytes), gb(hw.system_ram_bytes))});
  }
  plan.feasible = r.fit->fits;
  plan.final_report = r;

  plan.notes = r.notes;
  plan.notes.push_back("favour GPU memory capacity over raw compute speed");
  auto link = interconnect_compare(hw);
  if (link.applicable && !hw.nvlink_pairs) {
    plan.notes.push_back("install NVLink bridges between GPU pairs (50-100 GB/s vs 31.5 GB/s for PCIe 4.0)");
  }
  plan.notes.insert(plan.notes.end(), link.notes.begin(), link.notes.end());
  plan.notes.push_back("prefer GPUs with float16 and bfloat16 support");
  if (hw.system_ram_bytes < 512 * kGB) {
    plan.notes.push_back(fmt::format("plan for at least 512 GB of system memory (installed: {})",
                                     gb(hw.system_ram_bytes)));
  } else {
    plan.notes.push_back("system memory meets the 512 GB guideline");
  }
  plan.notes.push_back("keep spare PCIe slots so GPUs can be added later");
  return plan;
}

std::string render_text(const MemoryReport& r) {
  std::string out;
  out += fmt::format("parameters:        {}\n", r.param_count);
  out += fmt::format("precision:         {}{}\n", to_string(r.precision), r.offload ? " (optimizer offloaded)" : "");
  out += fmt::format("weights:           {} B ({})\n", r.weights_bytes, gb(r.weights_bytes));
  out += fmt::format("gradients:         {} B ({})\n", r.gradients_bytes, gb(r.gradients_bytes));
  out += fmt::format("optimizer states:  {} B ({}) on {}\n", r.optimizer_bytes, gb(r.optimizer_bytes),
                     r.optimizer_location == Location::Gpu ? "GPU" : "CPU");
  out += fmt::format("GPU total:         {} B ({})\n", r.gpu_bytes, gb(r.gpu_bytes));
  out += fmt::format("CPU total:         {} B ({})\n", r.cpu_bytes, gb(r.cpu_bytes));
  if (r.fit) {
    out += fmt::format("per GPU ({} dev):   {} B of {} B, headroom {:.1f}%\n", r.fit->devices,
                       r.fit->per_gpu_bytes, r.fit->gpu_capacity_bytes, 100.0 * r.fit->headroom_fraction);
    out += fmt::format("fits:              {}\n", r.fit->fits ? "yes" : "no");
  }
  for (const auto& note : r.notes) out += "note: " + note + "\n";
  return out;
}

std::string render_kv(const MemoryReport& r) {
  std::string out;
  out += fmt::format("param_count={}\n", r.param_count);
  out += fmt::format("precision={}\n", to_string(r.precision));
  out += fmt::format("offload={}\n", r.offload ? 1 : 0);
  out += fmt::format("weights_bytes={}\n", r.weights_bytes);
  out += fmt::format("gradients_bytes={}\n", r.gradients_bytes);
  out += fmt::format("optimizer_bytes={}\n", r.optimizer_bytes);
  out += fmt::format("optimizer_location={}\n", r.optimizer_location == Location::Gpu ? "GPU" : "CPU");
  out += fmt::format("gpu_bytes={}\n", r.gpu_bytes);
  out += fmt::format("cpu_bytes={}\n", r.cpu_bytes);
  if (r.fit) {
    out += fmt::format("devices={}\n", r.fit->devices);
    out += fmt::format("per_gpu_bytes={}\n", r.fit->per_gpu_bytes);
    out += fmt::format("fits={}\n", r.fit->fits ? 1 : 0);
    out += fmt::format("headroom_fraction={:.6f}\n", r.fit->headroom_fraction);
  }
  return out;
}

}  // namespace warmstart::memplan
