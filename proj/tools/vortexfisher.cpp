#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "vortex/estimation.hpp"
#include "vortex/fisher_classical.hpp"
#include "vortex/fisher_quantum.hpp"
#include "vortex/state_spec.hpp"
#include "vortex/version.hpp"

using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonOptions {
  std::string mode_spec;
  std::string superpose_spec;
  std::string out_file;
  std::string manifest_file;
  std::uint64_t seed = 42;
  int quad_radial = 256;
  int quad_azimuthal = 256;
  double tol = 1e-6;
  double w0 = 0.0;         // physical output units when both are set
  double wavelength = 0.0;
};

// The library runs dimensionless; this geometry makes z_R exactly 1.
const vortex::BeamGeometry kCanonical{1.0, 2.0};

std::string format_double(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

vortex::ModeSuperposition parse_state(const CommonOptions& opt) {
  const bool has_mode = !opt.mode_spec.empty();
  const bool has_superpose = !opt.superpose_spec.empty();
  if (has_mode == has_superpose)
    throw std::invalid_argument("exactly one of --mode or --superpose is required");
  const auto parsed = vortex::parse_state_spec(has_mode ? opt.mode_spec : opt.superpose_spec);
  if (has_mode && parsed.state.size() != 1)
    throw std::invalid_argument("--mode takes a single LG term; use --superpose for sums");
  if (parsed.renormalized)
    std::cerr << "warning: state coefficients were not unit norm; normalized\n";
  return parsed.state;
}

vortex::QuadratureConfig quadrature_config(const CommonOptions& opt) {
  vortex::QuadratureConfig cfg;
  cfg.n_radial = opt.quad_radial;
  cfg.n_azimuthal = opt.quad_azimuthal;
  cfg.refine_tolerance = opt.tol;
  cfg.validate();
  return cfg;
}

// Output scale factors; identity unless both physical flags are given.
struct UnitScale {
  double z = 1.0;       // multiply z_R-unit lengths
  double fisher = 1.0;  // multiply 1/z_R^2 informations
};

UnitScale unit_scale(const CommonOptions& opt) {
  if (opt.w0 == 0.0 && opt.wavelength == 0.0) return {};
  if (opt.w0 <= 0.0 || opt.wavelength <= 0.0)
    throw std::invalid_argument("--w0 and --wavelength must be given together and positive");
  const double zr = std::numbers::pi * opt.w0 * opt.w0 / opt.wavelength;
  return {zr, 1.0 / (zr * zr)};
}

// Closed-form QFI reference where one exists for the state: the pure-mode
// expression, or the two-mode expression for an equal-weight p=0 pair.
std::optional<vortex::FisherValue> printed_reference(const vortex::ModeSuperposition& state) {
  if (state.size() == 1) return vortex::qfi_pure(state.terms()[0].idx);
  if (state.size() == 2) {
    const auto& a = state.terms()[0];
    const auto& b = state.terms()[1];
    if (a.idx.p == 0 && b.idx.p == 0 && a.idx.l != b.idx.l &&
        std::abs(std::abs(a.coeff) - std::abs(b.coeff)) < 1e-12)
      return vortex::qfi_two_mode_printed(a.idx.l, b.idx.l);
  }
  return std::nullopt;
}

void emit(const CommonOptions& opt, const std::string& command, const ordered_json& params,
          const std::string& payload) {
  if (opt.out_file.empty()) {
    std::fwrite(payload.data(), 1, payload.size(), stdout);
  } else {
    std::ofstream f(opt.out_file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file " + opt.out_file);
    f.write(payload.data(), std::streamsize(payload.size()));
  }
  if (!opt.manifest_file.empty()) {
    ordered_json manifest;
    manifest["command"] = command;
    manifest["parameters"] = params;
    manifest["library_version"] = vortex::kVersion;
    manifest["seed"] = opt.seed;
    manifest["timestamp"] = utc_timestamp();
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(payload)));
    manifest["output_checksum_fnv1a64"] = hex;
    std::ofstream f(opt.manifest_file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open manifest file " + opt.manifest_file);
    const std::string text = manifest.dump(2) + "\n";
    f.write(text.data(), std::streamsize(text.size()));
  }
}

ordered_json base_params(const CommonOptions& opt) {
  ordered_json p;
  if (!opt.mode_spec.empty()) p["mode"] = opt.mode_spec;
  if (!opt.superpose_spec.empty()) p["superpose"] = opt.superpose_spec;
  p["quad_radial"] = opt.quad_radial;
  p["quad_azimuthal"] = opt.quad_azimuthal;
  p["tol"] = opt.tol;
  if (opt.w0 > 0.0) {
    p["w0"] = opt.w0;
    p["wavelength"] = opt.wavelength;
  }
  return p;
}

int run_qfi(const CommonOptions& opt, double hl_theta, double hl_phi, bool hl_set) {
  const auto state = parse_state(opt);
  std::string text;
  const auto line = [&text](const std::string& name, double value, bool fisher_units = true) {
    text += name + " = " + format_double(value) + (fisher_units ? " (1/z_R^2)" : "") + "\n";
  };

  if (hl_set) {
    if (state.size() != 1)
      throw std::invalid_argument("--hl-theta applies to a single --mode term");
    const vortex::FockState f = vortex::fock_state_of(state.terms()[0].idx);
    const vortex::HLIndex hl{f.n_plus, f.n_minus, hl_theta, hl_phi};
    const double printed = vortex::qfi_hl_printed(hl).value;
    const double oracle = vortex::qfi_oracle(vortex::hl_expand(hl)).value;
    line("qfi_hl_printed", printed);
    line("qfi_oracle", oracle);
    line("printed_over_oracle", printed / oracle, false);
  } else {
    const double oracle = vortex::qfi_oracle(state).value;
    if (state.size() == 1) line("qfi_pure", vortex::qfi_pure(state.terms()[0].idx).value);
    if (const auto printed = printed_reference(state);
        printed && printed->source == vortex::FisherSource::closed_form_superposition)
      line("qfi_two_mode_printed", printed->value);
    line("qfi_oracle", oracle);
    if (const auto printed = printed_reference(state))
      line("printed_over_oracle", printed->value / oracle, false);
  }

  ordered_json params = base_params(opt);
  if (hl_set) {
    params["hl_theta"] = hl_theta;
    params["hl_phi"] = hl_phi;
  }
  emit(opt, "qfi", params, text);
  return 0;
}

int run_scan(const CommonOptions& opt, double z_min, double z_max, int points) {
  if (points < 2) throw std::invalid_argument("--points must be >= 2");
  if (!(z_min >= 0.0) || !(z_max > z_min))
    throw std::invalid_argument("need 0 <= z-min < z-max");
  const auto state = parse_state(opt);
  const auto cfg = quadrature_config(opt);
  const UnitScale scale = unit_scale(opt);

  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i)
    grid[i] = z_min + (z_max - z_min) * i / (points - 1);
  const vortex::FisherReport report = vortex::scan_report(state, kCanonical, grid, cfg);

  const double q_oracle = report.qfi_reference.value;
  const auto printed = printed_reference(state);
  const double q_printed = printed ? printed->value : std::nan("");

  std::string csv =
      "z_over_zR,f_total,f_radial,f_azimuthal,q_oracle,q_printed,ratio_oracle,"
      "ratio_printed,converged\n";
  for (int i = 0; i < points; ++i) {
    const double f = report.f_total[i];
    csv += format_double(report.z_grid[i] * scale.z) + ",";
    csv += format_double(f * scale.fisher) + ",";
    csv += format_double(report.f_radial[i] * scale.fisher) + ",";
    csv += format_double(report.f_azimuthal[i] * scale.fisher) + ",";
    csv += format_double(q_oracle * scale.fisher) + ",";
    csv += format_double(q_printed * scale.fisher) + ",";
    csv += format_double(f / q_oracle) + ",";
    csv += format_double(f / q_printed) + ",";
    csv += report.converged[i] ? "1" : "0";
    csv += "\n";
  }

  ordered_json params = base_params(opt);
  params["z_min"] = z_min;
  params["z_max"] = z_max;
  params["points"] = points;
  emit(opt, "scan", params, csv);
  return 0;
}

int run_optimal_plane(const CommonOptions& opt, double z_min, double z_max) {
  const auto state = parse_state(opt);
  const auto cfg = quadrature_config(opt);
  const UnitScale scale = unit_scale(opt);

  const vortex::OptimalPlane plane =
      vortex::find_optimal_plane(state, kCanonical, {z_min, z_max}, cfg);
  const double q = vortex::qfi_oracle(state).value;

  ordered_json result;
  result["z_opt"] = plane.z_opt * scale.z;
  result["f_max"] = plane.f_max * scale.fisher;
  result["q"] = q * scale.fisher;
  result["ratio"] = plane.f_max / q;

  ordered_json params = base_params(opt);
  params["z_min"] = z_min;
  params["z_max"] = z_max;
  emit(opt, "optimal-plane", params, result.dump(2) + "\n");
  return 0;
}

int run_crb_sim(const CommonOptions& opt, double photons, int trials, double z_true,
                double range_min, double range_max) {
  const auto state = parse_state(opt);
  const UnitScale scale = unit_scale(opt);

  vortex::EstimationConfig cfg;
  cfg.n_photons = photons;
  cfg.n_trials = trials;
  cfg.z_true = z_true;
  cfg.search_range = {range_min, range_max};
  cfg.seed = opt.seed;
  const vortex::EstimationRun run = vortex::crb_study(cfg, state, kCanonical);

  const double var_scale = scale.z * scale.z;
  ordered_json result;
  result["n_photons"] = photons;
  result["n_trials"] = trials;
  result["z_true"] = z_true * scale.z;
  result["search_range"] = {range_min * scale.z, range_max * scale.z};
  result["seed"] = opt.seed;
  result["mean_estimate"] = run.mean_estimate * scale.z;
  result["empirical_variance"] = run.empirical_variance * var_scale;
  result["variance_defined"] = run.variance_defined;
  result["crb_classical"] = run.crb_classical * var_scale;
  result["crb_quantum"] = run.crb_quantum * var_scale;
  result["efficiency"] = run.efficiency;
  result["n_boundary_flags"] = run.n_boundary_flags;
  result["reliable"] = run.reliable;

  ordered_json params = base_params(opt);
  params["photons"] = photons;
  params["trials"] = trials;
  params["z_true"] = z_true;
  params["range_min"] = range_min;
  params["range_max"] = range_max;
  emit(opt, "crb-sim", params, result.dump(2) + "\n");
  return 0;
}

void add_common(CLI::App* cmd, CommonOptions& opt, bool with_state = true) {
  if (with_state) {
    cmd->add_option("--mode", opt.mode_spec, "single LG mode, e.g. p0l2");
    cmd->add_option("--superpose", opt.superpose_spec,
                    "superposition, e.g. p0l2,p0l0 or p0l2*0.8+0.6i,p0l0");
  }
  cmd->add_option("--out", opt.out_file, "write output to FILE instead of stdout");
  cmd->add_option("--manifest", opt.manifest_file, "write a run manifest to FILE");
  cmd->add_option("--seed", opt.seed, "random seed (crb-sim)");
  cmd->add_option("--quad-radial", opt.quad_radial, "radial quadrature points");
  cmd->add_option("--quad-azimuthal", opt.quad_azimuthal, "azimuthal quadrature points");
  cmd->add_option("--tol", opt.tol, "quadrature refinement tolerance");
  cmd->add_option("--w0", opt.w0, "waist radius; with --wavelength, outputs use physical units");
  cmd->add_option("--wavelength", opt.wavelength, "wavelength, same length unit as --w0");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Axial Fisher-information toolkit for Laguerre-Gauss vortex beams"};
  app.require_subcommand(1);

  CommonOptions qfi_opt;
  double hl_theta = 0.0;
  double hl_phi = 0.0;
  auto* qfi_cmd = app.add_subcommand("qfi", "quantum Fisher information of a state");
  add_common(qfi_cmd, qfi_opt);
  auto* hl_theta_opt = qfi_cmd->add_option("--hl-theta", hl_theta,
                                           "Hermite-Laguerre sphere polar angle");
  qfi_cmd->add_option("--hl-phi", hl_phi, "Hermite-Laguerre sphere azimuth");

  CommonOptions scan_opt;
  double scan_zmin = 0.05;
  double scan_zmax = 3.0;
  int scan_points = 60;
  auto* scan_cmd = app.add_subcommand("scan", "CFI/QFI scan over detection planes (CSV)");
  add_common(scan_cmd, scan_opt);
  scan_cmd->add_option("--z-min", scan_zmin, "first plane, z_R units");
  scan_cmd->add_option("--z-max", scan_zmax, "last plane, z_R units");
  scan_cmd->add_option("--points", scan_points, "number of planes");

  CommonOptions plane_opt;
  double plane_zmin = 0.05;
  double plane_zmax = 3.0;
  auto* plane_cmd = app.add_subcommand("optimal-plane",
                                       "detection plane maximizing the intensity CFI (JSON)");
  add_common(plane_cmd, plane_opt);
  plane_cmd->add_option("--z-min", plane_zmin, "search lower bound, z_R units");
  plane_cmd->add_option("--z-max", plane_zmax, "search upper bound, z_R units");

  CommonOptions crb_opt;
  double crb_photons = 1e4;
  int crb_trials = 500;
  double crb_ztrue = 1.0;
  double crb_range_min = 1e-3;
  double crb_range_max = 4.0;
  auto* crb_cmd = app.add_subcommand("crb-sim",
                                     "Poisson Monte Carlo against the Cramer-Rao bounds (JSON)");
  add_common(crb_cmd, crb_opt);
  crb_cmd->add_option("--photons", crb_photons, "expected photons per frame");
  crb_cmd->add_option("--trials", crb_trials, "number of trials");
  crb_cmd->add_option("--z-true", crb_ztrue, "true plane position, z_R units");
  crb_cmd->add_option("--range-min", crb_range_min, "search range lower bound, z_R units");
  crb_cmd->add_option("--range-max", crb_range_max, "search range upper bound, z_R units");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (qfi_cmd->parsed())
      return run_qfi(qfi_opt, hl_theta, hl_phi, hl_theta_opt->count() > 0);
    if (scan_cmd->parsed()) return run_scan(scan_opt, scan_zmin, scan_zmax, scan_points);
    if (plane_cmd->parsed()) return run_optimal_plane(plane_opt, plane_zmin, plane_zmax);
    if (crb_cmd->parsed())
      return run_crb_sim(crb_opt, crb_photons, crb_trials, crb_ztrue, crb_range_min,
                         crb_range_max);
  } catch (const vortex::StateSpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const vortex::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
