#include "kh/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <system_error>

namespace kh::io {

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

std::uint32_t get_u32(std::span<const unsigned char> b, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[off + i]) << (8 * i);
  return v;
}

double get_f64(std::span<const unsigned char> b, std::size_t off) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[off + i]) << (8 * i);
  return std::bit_cast<double>(v);
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffu) throw DimensionError(std::string("KHSNAP01: ") + what + " exceeds 32 bits");
  return static_cast<std::uint32_t>(v);
}

std::string csv_join(std::initializer_list<std::string> cells) {
  std::string line;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) line += ',';
    line += c;
    first = false;
  }
  line += '\n';
  return line;
}

}  // namespace

std::vector<unsigned char> encode_snapshots(const SnapshotMatrix& s) {
  std::uint32_t nx = 0;
  std::uint32_t ny = 0;
  if (s.grid) {
    nx = checked_u32(s.grid->n(), "nx");
    ny = nx;
  } else {
    nx = checked_u32(s.rows(), "row count");
    ny = 1;
  }
  std::vector<unsigned char> out;
  out.reserve(kSnapshotHeaderBytes + s.data.data().size() * 8);
  for (char c : kSnapshotMagic) out.push_back(static_cast<unsigned char>(c));
  put_u32(out, nx);
  put_u32(out, ny);
  put_u32(out, checked_u32(s.cols(), "snapshot count"));
  put_f64(out, s.dt_snap);
  // Column-major storage already lays the fields out one after another.
  for (double v : s.data.data()) put_f64(out, v);
  return out;
}

SnapshotMatrix decode_snapshots(std::span<const unsigned char> b) {
  if (b.size() < sizeof(kSnapshotMagic))
    throw FormatError("KHSNAP01: truncated header", b.size());
  if (!std::equal(std::begin(kSnapshotMagic), std::end(kSnapshotMagic), b.begin()))
    throw FormatError("KHSNAP01: bad magic", 0);
  if (b.size() < kSnapshotHeaderBytes) throw FormatError("KHSNAP01: truncated header", b.size());

  SnapshotFileHeader h{get_u32(b, 8), get_u32(b, 12), get_u32(b, 16), get_f64(b, 20)};
  if (h.nx == 0 || h.ny == 0) throw FormatError("KHSNAP01: zero field dimension", 8);
  if (h.n_snapshots == 0) throw FormatError("KHSNAP01: no snapshots", 16);
  if (!(h.dt_snap > 0.0) || !std::isfinite(h.dt_snap))
    throw FormatError("KHSNAP01: dt_snap must be positive and finite", 20);

  const std::uint64_t points = std::uint64_t{h.nx} * h.ny;
  const std::uint64_t field_bytes = points * 8;
  const std::uint64_t payload = field_bytes * h.n_snapshots;
  const std::uint64_t expected = kSnapshotHeaderBytes + payload;
  if (b.size() < expected) {
    std::ostringstream msg;
    msg << "KHSNAP01: truncated payload, header claims " << h.n_snapshots
        << " snapshots but only " << (b.size() - kSnapshotHeaderBytes) / field_bytes
        << " complete ones are present";
    throw FormatError(msg.str(), b.size());
  }
  if (b.size() > expected)
    throw FormatError("KHSNAP01: size mismatch, trailing bytes after payload",
                      static_cast<std::size_t>(expected));

  linalg::Matrix data(static_cast<std::size_t>(points), h.n_snapshots);
  auto flat = data.data();
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const std::size_t off = kSnapshotHeaderBytes + 8 * i;
    flat[i] = get_f64(b, off);
    if (!std::isfinite(flat[i])) throw FormatError("KHSNAP01: non-finite sample", off);
  }

  std::optional<Grid2D> grid;
  if (h.nx == h.ny && h.nx >= 2 && std::has_single_bit(h.nx)) grid = Grid2D(h.nx);
  return SnapshotMatrix(std::move(data), h.dt_snap, grid);
}

void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const unsigned char*>(text.data()),
                                    text.size()));
}

void write_snapshots(const std::filesystem::path& path, const SnapshotMatrix& s) {
  write_file_atomic(path, encode_snapshots(s));
}

SnapshotMatrix read_snapshots(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                         std::istreambuf_iterator<char>());
  return decode_snapshots(bytes);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

std::vector<unsigned char> encode_pgm(std::span<const double> values, const Grid2D& grid) {
  if (values.size() != grid.points())
    throw DimensionError("encode_pgm: " + std::to_string(values.size()) +
                         " values for a grid of " + std::to_string(grid.points()));
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi))
    throw ContractError("encode_pgm: non-finite value");

  const std::string header = "P5\n" + std::to_string(grid.n()) + " " +
                             std::to_string(grid.n()) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(header.size() + values.size());
  const double range = hi - lo;
  for (double v : values) {
    if (range == 0.0) {
      out.push_back(128);
      continue;
    }
    const double scaled = std::round(255.0 * (v - lo) / range);
    out.push_back(static_cast<unsigned char>(std::clamp(scaled, 0.0, 255.0)));
  }
  return out;
}

void export_mode_image(std::span<const double> values, const Grid2D& grid,
                       const std::filesystem::path& path) {
  write_file_atomic(path, encode_pgm(values, grid));
}

std::pair<std::filesystem::path, std::filesystem::path> export_complex_mode_image(
    std::span<const std::complex<double>> values, const Grid2D& grid,
    const std::filesystem::path& base) {
  std::vector<double> re(values.size());
  std::vector<double> im(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    re[i] = values[i].real();
    im[i] = values[i].imag();
  }
  std::filesystem::path re_path = base;
  re_path += "_re.pgm";
  std::filesystem::path im_path = base;
  im_path += "_im.pgm";
  export_mode_image(re, grid, re_path);
  export_mode_image(im, grid, im_path);
  return {re_path, im_path};
}

std::string spectrum_csv(const dmd::DmdResult& r) {
  std::string out = "index,mu_re,mu_im,mu_abs,lambda_re,lambda_im,stability\n";
  for (std::size_t j = 0; j < r.count(); ++j) {
    const auto mu = r.eigenvalues_mu[j];
    const auto lambda = r.spectrum_lambda[j];
    out += csv_join({std::to_string(j + 1), format_double(mu.real()), format_double(mu.imag()),
                     format_double(std::abs(mu)), format_double(lambda.real()),
                     format_double(lambda.imag()), std::string(dmd::to_string(r.stability[j]))});
  }
  return out;
}

std::filesystem::path unit_circle_path(const std::filesystem::path& spectrum_path) {
  std::filesystem::path p = spectrum_path.parent_path() / spectrum_path.stem();
  p += "_unit_circle.csv";
  return p;
}

void export_spectrum_csv(const dmd::DmdResult& result, const std::filesystem::path& path) {
  if (result.count() == 0) throw ContractError("export_spectrum_csv: empty DMD result");
  write_text_atomic(path, spectrum_csv(result));
  std::string circle = "theta,x,y\n";
  for (int i = 0; i <= 360; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / 360.0;
    circle += csv_join({format_double(theta), format_double(std::cos(theta)),
                        format_double(std::sin(theta))});
  }
  write_text_atomic(unit_circle_path(path), circle);
}

std::string dmd_order_csv(const dmd::DmdResult& r) {
  const auto by_amp = dmd::order_by_amplitude(r);
  const auto by_freq = dmd::order_by_frequency(r);
  std::string out = "rank,by_amplitude,amplitude,by_frequency,frequency\n";
  for (std::size_t k = 0; k < r.count(); ++k)
    out += csv_join({std::to_string(k + 1), std::to_string(by_amp[k] + 1),
                     format_double(r.amplitudes[by_amp[k]]), std::to_string(by_freq[k] + 1),
                     format_double(std::abs(r.spectrum_lambda[by_freq[k]].imag()))});
  return out;
}

std::string pod_eigenvalues_csv(const pod::PodResult& r) {
  std::string out = "index,eigenvalue,energy_fraction,cumulative_fraction,degenerate\n";
  double cumulative = 0.0;
  for (std::size_t i = 0; i < r.count(); ++i) {
    cumulative += r.energy_fractions[i];
    out += csv_join({std::to_string(i + 1), format_double(r.eigenvalues[i]),
                     format_double(r.energy_fractions[i]), format_double(cumulative),
                     r.degenerate[i] ? "1" : "0"});
  }
  return out;
}

std::string time_coefficients_csv(const pod::PodResult& r, std::size_t k) {
  const std::size_t n = r.count();
  k = std::min(k, n);
  std::string out = "snapshot,t";
  for (std::size_t i = 0; i < k; ++i) out += ",a_" + std::to_string(i + 1);
  out += '\n';
  for (std::size_t t = 0; t < n; ++t) {
    out += std::to_string(t) + "," + format_double(static_cast<double>(t) * r.dt_snap);
    for (std::size_t i = 0; i < k; ++i) out += "," + format_double(r.time_coefficients(i, t));
    out += '\n';
  }
  return out;
}

std::string lag_correlation_csv(const pod::PodResult& r, std::span<const ModePair> pairs,
                                long max_lag) {
  const std::size_t n = r.count();
  std::string out = "mode_i,mode_j,lag,correlation,best\n";
  for (const auto& p : pairs) {
    if (p.first < 1 || p.first > n || p.second < 1 || p.second > n)
      throw ContractError("lag_correlation_csv: mode pair (" + std::to_string(p.first) + "," +
                          std::to_string(p.second) + ") outside 1.." + std::to_string(n));
    std::vector<double> x(n), y(n);
    for (std::size_t t = 0; t < n; ++t) {
      x[t] = r.time_coefficients(p.first - 1, t);
      y[t] = r.time_coefficients(p.second - 1, t);
    }
    const auto lc = pod::lag_correlation(x, y, max_lag);
    for (std::size_t i = 0; i < lc.lags.size(); ++i)
      out += csv_join({std::to_string(p.first), std::to_string(p.second),
                       std::to_string(lc.lags[i]), format_double(lc.values[i]),
                       lc.lags[i] == lc.best_lag ? "1" : "0"});
  }
  return out;
}

std::size_t export_time_coefficients_csv(const pod::PodResult& result,
                                         const std::filesystem::path& path, std::size_t k,
                                         std::span<const ModePair> pairs, long max_lag) {
  if (k > result.count()) {
    std::cerr << "warning: requested " << k << " time coefficients, only "
              << result.count() << " modes exist; clipping\n";
    k = result.count();
  }
  write_text_atomic(path, time_coefficients_csv(result, k));
  if (!pairs.empty()) {
    std::filesystem::path lag = path.parent_path() / path.stem();
    lag += "_lag.csv";
    write_text_atomic(lag, lag_correlation_csv(result, pairs, max_lag));
  }
  return k;
}

}  // namespace kh::io
