#include "kh/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <vector>

#include "kh/diagnostics.hpp"
#include "kh/dmd.hpp"
#include "kh/error.hpp"
#include "kh/io.hpp"
#include "kh/jet.hpp"
#include "kh/pod.hpp"
#include "kh/solver.hpp"

namespace kh::cli {

namespace fs = std::filesystem;

namespace {

struct SimulateOptions {
  int case_id = 1;
  std::uint64_t seed = 0;
  std::size_t n = kDefaultGrid;
  long steps = kDefaultSteps;
  std::optional<double> re;
  std::optional<double> dt;
  std::optional<long> snapshot_interval;
  std::optional<long> collect_count;
  std::optional<bool> dealias;
  std::optional<double> schmidt;
};

void apply_config_file(const fs::path& path, SimulateOptions& o) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("config " + path.string() + ": " + e.what(), e.byte);
  }
  if (!j.is_object()) throw FormatError("config " + path.string() + ": expected an object", 0);
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "case") o.case_id = value.get<int>();
      else if (key == "seed") o.seed = value.get<std::uint64_t>();
      else if (key == "n") o.n = value.get<std::size_t>();
      else if (key == "steps") o.steps = value.get<long>();
      else if (key == "re") o.re = value.get<double>();
      else if (key == "dt") o.dt = value.get<double>();
      else if (key == "snapshot_interval") o.snapshot_interval = value.get<long>();
      else if (key == "collect_count") o.collect_count = value.get<long>();
      else if (key == "dealias") o.dealias = value.get<bool>();
      else if (key == "schmidt") o.schmidt = value.get<double>();
      else throw ContractError("config " + path.string() + ": unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::type_error& e) {
    throw ContractError("config " + path.string() + ": " + e.what());
  }
}

JetConfig jet_config(int case_id, std::uint64_t seed, std::size_t n) {
  JetConfig jet = preset(case_id);
  jet.rng_seed = seed;
  jet.n = n;
  jet.validate();
  return jet;
}

SimConfig sim_config(const SimulateOptions& o, const JetConfig& jet) {
  SimConfig cfg = default_sim_config(jet, o.steps);
  if (o.re) cfg.re = *o.re;
  if (o.dt) cfg.dt = *o.dt;
  if (o.snapshot_interval) cfg.snapshot_interval = *o.snapshot_interval;
  if (o.collect_count) cfg.collect_count = *o.collect_count;
  if (o.dealias) cfg.dealias = *o.dealias;
  if (o.schmidt) cfg.schmidt = *o.schmidt;
  cfg.validate();
  return cfg;
}

JetFields read_initial_conditions(const fs::path& path) {
  const SnapshotMatrix s = io::read_snapshots(path);
  if (!s.grid) throw DimensionError(path.string() + ": initial conditions need a square grid");
  if (s.cols() != 3)
    throw DimensionError(path.string() + ": expected 3 fields (U, V, PS), found " +
                         std::to_string(s.cols()));
  return {unflatten(s.data.col(0), *s.grid), unflatten(s.data.col(1), *s.grid),
          unflatten(s.data.col(2), *s.grid)};
}

int run_gen_ic(int case_id, std::uint64_t seed, std::size_t n, const fs::path& out_path,
               std::ostream& out) {
  const JetFields ic = build_initial_conditions(jet_config(case_id, seed, n));
  const std::vector<ScalarField> fields{ic.u, ic.v, ic.scalar};
  io::write_snapshots(out_path, assemble_snapshots(fields, 1.0));
  out << "wrote " << out_path.string() << " (U, V, PS on " << n << "x" << n << ")\n";
  return kExitOk;
}

int run_simulate(const SimulateOptions& o, const std::optional<fs::path>& ic_path,
                 const fs::path& out_path, const std::optional<fs::path>& means_path,
                 std::ostream& out) {
  const JetConfig jet = jet_config(o.case_id, o.seed, o.n);
  const SimConfig cfg = sim_config(o, jet);
  const JetFields ic = ic_path ? read_initial_conditions(*ic_path) : build_initial_conditions(jet);
  const FlowSolver solver(ic.u.grid(), cfg);
  const RunResult run = solver.run_collect(solver.init_state(ic.u, ic.v, ic.scalar));
  io::write_snapshots(out_path, run.scalar);
  if (means_path) {
    const std::vector<ScalarField> means{run.mean_u, run.mean_v};
    io::write_snapshots(*means_path, assemble_snapshots(means, run.scalar.dt_snap));
  }
  out << "wrote " << out_path.string() << ": " << run.scalar.cols() << " snapshots, dt_snap "
      << io::format_double(run.scalar.dt_snap) << ", t = " << io::format_double(run.times.front())
      << " .. " << io::format_double(run.times.back()) << "\n";
  return kExitOk;
}

int run_pod(const fs::path& in, const fs::path& dir, std::ostream& out) {
  const SnapshotMatrix s = io::read_snapshots(in);
  const pod::PodResult r = pod::decompose(s);
  fs::create_directories(dir);
  io::write_text_atomic(dir / "pod_eigenvalues.csv", io::pod_eigenvalues_csv(r));
  std::vector<io::ModePair> pairs;
  if (r.count() >= 4) pairs.push_back({3, 4});
  io::export_time_coefficients_csv(r, dir / "pod_time_coefficients.csv", r.count(), pairs);
  io::write_snapshots(dir / "pod_modes.khsnap", SnapshotMatrix(r.modes, s.dt_snap, s.grid));
  if (s.grid) io::export_mode_image(r.mean, *s.grid, dir / "pod_mean.pgm");
  out << "pod: " << r.count() << " modes, " << r.nondegenerate_count() << " nondegenerate, "
      << "mode 1 energy " << io::format_double(r.energy_fractions.front()) << "\n";
  return kExitOk;
}

int run_dmd(const fs::path& in, const fs::path& dir, double rank_tol, double stability_tol,
            std::ostream& out) {
  const SnapshotMatrix s = io::read_snapshots(in);
  const dmd::DmdResult r = dmd::decompose(s, rank_tol, stability_tol);
  fs::create_directories(dir);
  io::export_spectrum_csv(r, dir / "dmd_spectrum.csv");
  io::write_text_atomic(dir / "dmd_order.csv", io::dmd_order_csv(r));
  linalg::Matrix re(r.modes.rows(), r.modes.cols());
  linalg::Matrix im(r.modes.rows(), r.modes.cols());
  for (std::size_t j = 0; j < r.modes.cols(); ++j)
    for (std::size_t i = 0; i < r.modes.rows(); ++i) {
      re(i, j) = r.modes(i, j).real();
      im(i, j) = r.modes(i, j).imag();
    }
  io::write_snapshots(dir / "dmd_modes_re.khsnap", SnapshotMatrix(std::move(re), s.dt_snap, s.grid));
  io::write_snapshots(dir / "dmd_modes_im.khsnap", SnapshotMatrix(std::move(im), s.dt_snap, s.grid));
  std::size_t counts[3] = {0, 0, 0};
  for (const auto st : r.stability) ++counts[static_cast<int>(st)];
  out << "dmd: " << r.count() << " eigenvalues (" << counts[0] << " stable, " << counts[1]
      << " neutral, " << counts[2] << " unstable)\n";
  return kExitOk;
}

int run_mean_profile(const fs::path& in, const fs::path& out_path, std::ostream& out) {
  const MeanProfile p = mean_profile(io::read_snapshots(in));
  std::string csv = "y,mean_scalar\n";
  for (std::size_t r = 0; r < p.y.size(); ++r)
    csv += io::format_double(p.y[r]) + "," + io::format_double(p.profile[r]) + "\n";
  io::write_text_atomic(out_path, csv);
  fs::path image = out_path;
  image.replace_extension(".pgm");
  io::export_mode_image(p.mean_field.values(), p.mean_field.grid(), image);
  out << "wrote " << out_path.string() << " and " << image.string() << "\n";
  return kExitOk;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Column `col` (0-based) of a CSV with a header line, as 1-based indices.
std::vector<std::size_t> csv_index_column(const fs::path& path, std::size_t col) {
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  std::vector<std::size_t> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    for (std::size_t c = 0; c <= col; ++c)
      if (!std::getline(fields, cell, ','))
        throw FormatError(path.string() + ": short row '" + line + "'", 0);
    try {
      out.push_back(std::stoul(cell));
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": bad index '" + cell + "'", 0);
    }
  }
  return out;
}

std::size_t clip_count(std::size_t count, std::size_t available, std::ostream& err) {
  if (count > available) {
    err << "warning: requested " << count << " modes, only " << available << " available\n";
    return available;
  }
  return count;
}

void copy_if_distinct(const fs::path& from, const fs::path& to) {
  if (fs::exists(to) && fs::equivalent(from, to)) return;
  const std::string text = read_text(from);
  io::write_text_atomic(to, text);
}

int run_export(const std::string& kind, std::size_t count, const fs::path& in_dir,
               const fs::path& dir, const std::string& order, std::ostream& out,
               std::ostream& err) {
  fs::create_directories(dir);
  std::size_t written = 0;
  if (kind == "pod") {
    const SnapshotMatrix modes = io::read_snapshots(in_dir / "pod_modes.khsnap");
    if (!modes.grid) throw DimensionError("pod modes carry no grid; cannot export images");
    count = clip_count(count, modes.cols(), err);
    for (std::size_t k = 0; k < count; ++k, ++written)
      io::export_mode_image(modes.data.col(k), *modes.grid,
                            dir / ("pod_mode_" + std::to_string(k + 1) + ".pgm"));
    copy_if_distinct(in_dir / "pod_eigenvalues.csv", dir / "pod_eigenvalues.csv");
  } else {
    const SnapshotMatrix re = io::read_snapshots(in_dir / "dmd_modes_re.khsnap");
    const SnapshotMatrix im = io::read_snapshots(in_dir / "dmd_modes_im.khsnap");
    if (!re.grid || !im.grid || re.cols() != im.cols() || re.rows() != im.rows())
      throw DimensionError("dmd mode files are inconsistent or carry no grid");
    const auto ranking = csv_index_column(in_dir / "dmd_order.csv", order == "frequency" ? 3 : 1);
    count = clip_count(count, std::min(ranking.size(), re.cols()), err);
    std::vector<std::complex<double>> mode(re.rows());
    for (std::size_t k = 0; k < count; ++k, ++written) {
      const std::size_t j = ranking[k];
      if (j < 1 || j > re.cols()) throw FormatError("dmd_order.csv: index out of range", 0);
      for (std::size_t i = 0; i < mode.size(); ++i) mode[i] = {re.data(i, j - 1), im.data(i, j - 1)};
      io::export_complex_mode_image(mode, *re.grid, dir / ("dmd_mode_" + std::to_string(k + 1)));
    }
    copy_if_distinct(in_dir / "dmd_spectrum.csv", dir / "dmd_spectrum.csv");
    copy_if_distinct(io::unit_circle_path(in_dir / "dmd_spectrum.csv"),
                     io::unit_circle_path(dir / "dmd_spectrum.csv"));
  }
  out << "exported " << written << " " << kind << " mode" << (written == 1 ? "" : "s") << " to "
      << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kelvin-Helmholtz jet simulation with POD and DMD analysis", "khmodes"};
  app.require_subcommand(1);

  int case_id = 1;
  std::uint64_t seed = 0;
  std::size_t n = kDefaultGrid;
  std::string out_file;
  auto* gen = app.add_subcommand("gen-ic", "Write jet initial conditions (U, V, PS)");
  gen->add_option("--case", case_id, "Jet spacing preset")->check(CLI::Range(1, 2))->capture_default_str();
  gen->add_option("--seed", seed, "Noise seed")->capture_default_str();
  gen->add_option("--n", n, "Grid points per side")->capture_default_str();
  gen->add_option("--out", out_file, "Output KHSNAP01 file")->required();

  SimulateOptions sim;
  std::string config_file, ic_file, means_file;
  double sim_re = 0.0, sim_dt = 0.0, sim_schmidt = 0.0;
  long sim_interval = 0, sim_count = 0;
  bool sim_no_dealias = false;
  auto* simulate = app.add_subcommand("simulate", "Run the flow solver and collect scalar snapshots");
  simulate->add_option("--config", config_file, "JSON run configuration");
  auto* o_case = simulate->add_option("--case", sim.case_id, "Jet spacing preset")->check(CLI::Range(1, 2));
  auto* o_seed = simulate->add_option("--seed", sim.seed, "Noise seed");
  auto* o_n = simulate->add_option("--n", sim.n, "Grid points per side");
  auto* o_steps = simulate->add_option("--steps", sim.steps, "Total time steps");
  auto* o_re = simulate->add_option("--re", sim_re, "Reynolds number");
  auto* o_dt = simulate->add_option("--dt", sim_dt, "Time step (default: CFL 0.5 at u_max)");
  auto* o_interval = simulate->add_option("--snapshot-interval", sim_interval, "Steps between snapshots");
  auto* o_count = simulate->add_option("--collect-count", sim_count, "Snapshots to keep");
  auto* o_schmidt = simulate->add_option("--schmidt", sim_schmidt, "Schmidt number");
  auto* o_nodealias = simulate->add_flag("--no-dealias", sim_no_dealias, "Disable 2/3 dealiasing");
  simulate->add_option("--ic", ic_file, "Initial conditions from gen-ic (overrides case/seed/n)");
  simulate->add_option("--out", out_file, "Output KHSNAP01 file")->required();
  simulate->add_option("--means", means_file, "Also write time-mean U and V");

  std::string in_file, out_dir;
  auto* pod_cmd = app.add_subcommand("pod", "Proper orthogonal decomposition of a snapshot file");
  pod_cmd->add_option("--in", in_file, "Input KHSNAP01 file")->required();
  pod_cmd->add_option("--out-dir", out_dir, "Output directory")->required();

  double rank_tol = linalg::kDefaultRankTol;
  double stability_tol = dmd::kDefaultStabilityTol;
  auto* dmd_cmd = app.add_subcommand("dmd", "Dynamic mode decomposition of a snapshot file");
  dmd_cmd->add_option("--in", in_file, "Input KHSNAP01 file")->required();
  dmd_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
  dmd_cmd->add_option("--rank-tol", rank_tol, "Relative rank tolerance of the QR solve")
      ->capture_default_str();
  dmd_cmd->add_option("--stability-tol", stability_tol, "Unit-circle band half-width")
      ->capture_default_str();

  auto* mean_cmd = app.add_subcommand("mean-profile", "Time-mean scalar field and its y-profile");
  mean_cmd->add_option("--in", in_file, "Input KHSNAP01 file")->required();
  mean_cmd->add_option("--out", out_file, "Output CSV (a .pgm is written alongside)")->required();

  std::string kind, in_dir, order = "amplitude";
  std::size_t count = 5;
  auto* export_cmd = app.add_subcommand("export", "Write mode images from pod/dmd output");
  export_cmd->add_option("--modes", kind, "Mode family")
      ->required()
      ->check(CLI::IsMember({"pod", "dmd"}));
  export_cmd->add_option("--count", count, "Number of modes")->capture_default_str();
  export_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
  export_cmd->add_option("--in-dir", in_dir, "Directory holding pod/dmd output (default: out-dir)");
  export_cmd->add_option("--order", order, "DMD mode ranking")
      ->check(CLI::IsMember({"amplitude", "frequency"}))
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return run_gen_ic(case_id, seed, n, out_file, out);
    if (simulate->parsed()) {
      SimulateOptions o;
      if (!config_file.empty()) apply_config_file(config_file, o);
      if (o_case->count()) o.case_id = sim.case_id;
      if (o_seed->count()) o.seed = sim.seed;
      if (o_n->count()) o.n = sim.n;
      if (o_steps->count()) o.steps = sim.steps;
      if (o_re->count()) o.re = sim_re;
      if (o_dt->count()) o.dt = sim_dt;
      if (o_interval->count()) o.snapshot_interval = sim_interval;
      if (o_count->count()) o.collect_count = sim_count;
      if (o_schmidt->count()) o.schmidt = sim_schmidt;
      if (o_nodealias->count()) o.dealias = !sim_no_dealias;
      std::optional<fs::path> ic, means;
      if (!ic_file.empty()) {
        ic = fs::path(ic_file);
        if (!o_n->count()) o.n = io::read_snapshots(*ic).grid.value_or(Grid2D(o.n)).n();
      }
      if (!means_file.empty()) means = fs::path(means_file);
      return run_simulate(o, ic, out_file, means, out);
    }
    if (pod_cmd->parsed()) return run_pod(in_file, out_dir, out);
    if (dmd_cmd->parsed()) return run_dmd(in_file, out_dir, rank_tol, stability_tol, out);
    if (mean_cmd->parsed()) return run_mean_profile(in_file, out_file, out);
    if (export_cmd->parsed())
      return run_export(kind, count, in_dir.empty() ? out_dir : in_dir, out_dir, order, out, err);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const InsufficientDataError& e) {
    err << "insufficient data: " << e.what() << "\n";
    return kExitData;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace kh::cli
