#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mca/ensemble.hpp"

namespace mca::io {

// Lossless, locale-independent float formatting used by every writer, so
// that repeated runs produce byte-identical files.
std::string format_double(double v);

// Headerless CSV, row i = series i. Optional sidecar: key=value lines with
// '#' comments; keys dt, grid_w, grid_h, coords (path to a CSV of
// series_index,row,col, resolved relative to the sidecar).
Ensemble load_ensemble(const std::filesystem::path &csv,
                       const std::filesystem::path &sidecar = {});
void save_ensemble(const Ensemble &e, const std::filesystem::path &csv,
                   const std::filesystem::path &sidecar = {});

// Region mask CSV: series_index,region_name.
std::vector<RegionMask> load_region_masks(const std::filesystem::path &path);
void save_region_masks(const std::vector<RegionMask> &masks,
                       const std::filesystem::path &path);

// Dense square matrix, row-major.
void save_matrix_csv(const std::vector<double> &values, std::size_t n,
                     const std::filesystem::path &path);
std::pair<std::vector<double>, std::size_t>
load_matrix_csv(const std::filesystem::path &path);

// Binary: magic "MCA1", uint32 LE n, then n*n float64 LE row-major.
void save_matrix_binary(const std::vector<double> &values, std::size_t n,
                        const std::filesystem::path &path);
std::pair<std::vector<double>, std::size_t>
load_matrix_binary(const std::filesystem::path &path);

// Flat key=value config / manifest files ('#' comments, blank lines ok).
std::map<std::string, std::string>
load_keyvalue(const std::filesystem::path &path);
void save_keyvalue(const std::map<std::string, std::string> &kv,
                   const std::filesystem::path &path);

// FNV-1a 64-bit digest of a file's bytes, as fixed-width hex.
std::string file_digest(const std::filesystem::path &path);

} // namespace mca::io
