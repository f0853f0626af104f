#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kh/dmd.hpp"
#include "kh/field.hpp"
#include "kh/pod.hpp"

namespace kh::io {

// KHSNAP01 snapshot container, all little-endian:
//   offset  0  8 bytes  magic "KHSNAP01"
//   offset  8  u32      nx
//   offset 12  u32      ny
//   offset 16  u32      n_snapshots
//   offset 20  f64      dt_snap
//   offset 28  n_snapshots * nx * ny f64, one field after another, each in
//              flatten() order (row-major, row = y index).
// A matrix without a grid is stored with nx = M, ny = 1.
inline constexpr char kSnapshotMagic[8] = {'K', 'H', 'S', 'N', 'A', 'P', '0', '1'};
inline constexpr std::size_t kSnapshotHeaderBytes = 28;

struct SnapshotFileHeader {
  std::uint32_t nx = 0;
  std::uint32_t ny = 0;
  std::uint32_t n_snapshots = 0;
  double dt_snap = 0.0;
};

std::vector<unsigned char> encode_snapshots(const SnapshotMatrix& s);
// Throws FormatError naming the byte offset of the first problem.
SnapshotMatrix decode_snapshots(std::span<const unsigned char> bytes);

void write_snapshots(const std::filesystem::path& path, const SnapshotMatrix& s);
SnapshotMatrix read_snapshots(const std::filesystem::path& path);

// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

// Shortest round-trip decimal form, independent of the global locale.
std::string format_double(double v);

// 8-bit binary PGM (P5), width = height = n, row r of the image = grid row r.
// Values are min-max scaled to 0..255 (rounded); a constant field maps to 128.
std::vector<unsigned char> encode_pgm(std::span<const double> values, const Grid2D& grid);
void export_mode_image(std::span<const double> values, const Grid2D& grid,
                       const std::filesystem::path& path);
// Writes <base>_re.pgm and <base>_im.pgm; returns both paths.
std::pair<std::filesystem::path, std::filesystem::path> export_complex_mode_image(
    std::span<const std::complex<double>> values, const Grid2D& grid,
    const std::filesystem::path& base);

// index,mu_re,mu_im,mu_abs,lambda_re,lambda_im,stability ; also writes
// <stem>_unit_circle.csv next to it (theta,x,y; 361 points).
std::string spectrum_csv(const dmd::DmdResult& result);
void export_spectrum_csv(const dmd::DmdResult& result, const std::filesystem::path& path);
std::filesystem::path unit_circle_path(const std::filesystem::path& spectrum_path);

// rank,by_amplitude,amplitude,by_frequency,frequency
std::string dmd_order_csv(const dmd::DmdResult& result);

// index,eigenvalue,energy_fraction,cumulative_fraction,degenerate
std::string pod_eigenvalues_csv(const pod::PodResult& result);

// snapshot,t,a_1..a_k ; k is clipped to N (with a warning on stderr).
std::string time_coefficients_csv(const pod::PodResult& result, std::size_t k);

struct ModePair {
  std::size_t first;   // 1-based mode numbers
  std::size_t second;
};

// mode_i,mode_j,lag,correlation ; one row per lag, plus the best lag of
// each pair marked in a trailing best column (0/1).
std::string lag_correlation_csv(const pod::PodResult& result, std::span<const ModePair> pairs,
                                long max_lag);

// Writes the coefficient table to `path` and, when pairs is non-empty, the
// lag diagnostic to <stem>_lag.csv. Returns the clipped k.
std::size_t export_time_coefficients_csv(const pod::PodResult& result,
                                         const std::filesystem::path& path, std::size_t k,
                                         std::span<const ModePair> pairs = {},
                                         long max_lag = 10);

}  // namespace kh::io
