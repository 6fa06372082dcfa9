#pragma once

// On-disk formats. All multi-byte values are little-endian; every file ends
// with an FNV-1a 64 checksum of the preceding bytes.
//
// Dataset (.fedata):
//   "FEOCDSET" u32 version u32 problem
//   u32 task_kind u32 len f64[len] target u32 n_obst {f64 A, cx, cy, sigma}*
//   f64 terminal_weight
//   u64 M u32 n u32 m f64 T u32 n_steps u64 seed
//   u64 n_traj {u64 offset, f64 objective}*
//   M records of f64[n] x, f64 t, f64[m] u
//   u64 checksum
//
// Checkpoint (.feckpt):
//   "FEOCCKPT" u32 version u32 payload (0 basis, 1 operator)
//   architecture: u32 problem u32 n_widths u32[n_widths] u32 activation
//     u32 head_count u32 head_dim u32 k f64[k] shift f64[k] scale f64 lambda_tik
//     u64 bound_basis_checksum u32 eta_dim f64[eta_dim] lo f64[eta_dim] hi
//   parameters: u64 count f64[count]
//   provenance: u64 config_hash u64 seed u64 steps
//   u64 model checksum (architecture + parameters)
//   u64 checksum

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "feoc/dataset.hpp"
#include "feoc/function_encoder.hpp"
#include "feoc/operator_net.hpp"

namespace feoc {

inline constexpr std::uint32_t kFormatVersion = 1;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

void save_dataset(const TaskDataset& dataset, const std::filesystem::path& path);
/// Fails closed: TruncatedFile, ChecksumFailure or FormatVersionMismatch
/// (bad magic, version, or dimensions inconsistent with the problem).
TaskDataset load_dataset(const std::filesystem::path& path);

std::string encode_dataset(const TaskDataset& dataset);
TaskDataset decode_dataset(std::string_view bytes);

struct Provenance {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
};

struct BasisCheckpoint {
  BasisSet basis;
  Provenance provenance;
};

struct OperatorCheckpoint {
  OperatorNet net;
  Provenance provenance;
};

/// Checksum over the basis architecture and parameters.
std::uint64_t basis_checksum(const BasisSet& basis);

void save_basis(const BasisSet& basis, const Provenance& prov, const std::filesystem::path& path);
BasisCheckpoint load_basis(const std::filesystem::path& path);
void save_operator(const OperatorNet& net, const Provenance& prov,
                   const std::filesystem::path& path);
OperatorCheckpoint load_operator(const std::filesystem::path& path);

std::string encode_basis(const BasisSet& basis, const Provenance& prov);
std::string encode_operator(const OperatorNet& net, const Provenance& prov);

/// Whole-file helpers; write goes through a temporary and a rename.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace feoc
