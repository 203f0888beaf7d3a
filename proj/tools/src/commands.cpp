#include "commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "hsl/analysis.hpp"
#include "hsl/faddeev.hpp"
#include "hsl/field_io.hpp"
#include "hsl/rng.hpp"

namespace hsl::cli {

namespace fs = std::filesystem;

namespace {

// Shortest text that reads back to the same double, so reruns are byte-identical.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header) : path_(path), out_(path) {
    if (!out_) throw ConfigError("cannot write '" + path + "'");
    out_ << header << '\n';
  }
  template <class... T>
  void row(const T&... cols) {
    std::string line;
    ((line += cell(cols) + ","), ...);
    line.pop_back();
    out_ << line << '\n';
  }
  const std::string& path() const { return path_; }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::string path_;
  std::ofstream out_;
};

std::string prepare(const std::string& dir, const std::string& file) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
  return (fs::path(dir) / file).string();
}

ForwardOptions forward_options(const Scenario& s) {
  ForwardOptions fo;
  fo.n = s.forward_n;
  fo.tol = s.tol;
  fo.omega_radius = s.rho_omega;
  return fo;
}

MeasurementSphere sphere_of(const Scenario& s) { return MeasurementSphere(s.rho_omega, s.n_theta, s.n_phi); }

}  // namespace

// ----------------------------------------------------------------------------- Cauchy CSV

void write_cauchy_csv(const std::string& path, const CauchyData& d) {
  CsvWriter w(path, "theta,phi,re_u,im_u,re_dnu,im_dnu,weight");
  for (std::size_t i = 0; i < d.sphere.size(); ++i)
    w.row(d.sphere.theta(i), d.sphere.phi(i), d.u[i].real(), d.u[i].imag(), d.dnu[i].real(), d.dnu[i].imag(),
          d.sphere.weights()[i]);
}

CauchyData read_cauchy_csv(const std::string& path, double radius) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open Cauchy data '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "theta,phi,re_u,im_u,re_dnu,im_dnu,weight")
    throw ConfigError(path + ": unexpected header");
  std::vector<std::array<double, 7>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 7> r{};
    std::istringstream ss(line);
    std::string cell;
    for (int c = 0; c < 7; ++c) {
      if (!std::getline(ss, cell, ',')) throw ConfigError(path + ": short row");
      char* end = nullptr;
      r[c] = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw ConfigError(path + ": bad number '" + cell + "'");
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw ConfigError(path + ": no data rows");
  int n_phi = 0;
  while (n_phi < static_cast<int>(rows.size()) && rows[n_phi][0] == rows[0][0]) ++n_phi;
  if (rows.size() % n_phi != 0) throw ConfigError(path + ": rows do not form a theta x phi grid");
  const MeasurementSphere sphere(radius, static_cast<int>(rows.size() / n_phi), n_phi);
  CauchyData d(sphere);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (std::abs(r[0] - sphere.theta(i)) > 1e-12 || std::abs(r[1] - sphere.phi(i)) > 1e-12 ||
        std::abs(r[6] - sphere.weights()[i]) > 1e-12 * std::max(1.0, std::abs(r[6])))
      throw ConfigError(path + ": nodes do not match a sphere of radius " + num(radius) + " (check rho_omega)");
    d.u[i] = cplx(r[2], r[3]);
    d.dnu[i] = cplx(r[4], r[5]);
  }
  return d;
}

// ----------------------------------------------------------------------------- verbs

std::string write_forward(const Scenario& s, const std::string& out_dir) {
  const FieldSolution sol = solve_forward(s.sources, s.medium, s.k, forward_options(s));
  const std::string path = prepare(out_dir, "cauchy.csv");
  write_cauchy_csv(path, extract_cauchy(sol, sphere_of(s)));
  return path;
}

std::string write_cgo(const Scenario& s, const std::string& out_dir) {
  const CubeGrid grid(s.R0, s.cgo_n);
  const double C_L = s.C_L > 0.0 ? s.C_L : estimate_CL(grid, s.seed, 50).value;
  const Mat3 T = triad_from(s.cgo_direction);
  CsvWriter w(prepare(out_dir, "cgo.csv"), "t1,t2,k,norm_kind,measured,bound,pass");
  for (double t : s.cgo_t) {
    const CgoParameter xi(T.col(0), T.col(1), T.col(2), t, 0.0, s.k);
    const CgoSolution sol = build_cgo(s.medium, xi, grid);
    for (const auto& e : certify_decay(sol, C_L).entries)
      w.row(xi.t1, xi.t2, s.k, e.kind, e.measured, e.bound, e.pass ? 1 : 0);
  }
  return w.path();
}

std::string write_invert(const Scenario& s, const std::string& out_dir) {
  if (s.data.empty()) throw ConfigError("invert needs 'data = <cauchy.csv>' in the config or --data");
  const CauchyData data = read_cauchy_csv(s.data, s.rho_omega);
  std::vector<SourceFit> fits;
  double residual = 0.0;
  if (s.mode == "single") {
    RecoveryOptions ro = s.recovery.fit;
    ro.max_radius = s.rho_omega;
    Vec3 init = s.init;
    if (init.isZero()) {
      const HeatMap map = imaging_functional(data, s.k, s.recovery.search, s.recovery.n_directions);
      init = map.points[map.argmax];
    }
    const SingleSourceFit fit = recover_single_source(data, s.medium, s.k, init, ro);
    fits.push_back({fit.amplitude, fit.location});
    residual = fit.residual;
  } else {
    const RecoveryResult r = recover_multi_source(data, s.medium, s.k, s.sources.eta, s.recovery);
    fits = r.fits;
    residual = r.residual;
  }
  // Opened only after recovery succeeded, so a failed run leaves no partial table behind.
  CsvWriter w(prepare(out_dir, "sources.csv"), "a_re,a_im,z1,z2,z3,residual");
  for (const auto& f : fits)
    w.row(f.amplitude.real(), f.amplitude.imag(), f.location.x(), f.location.y(), f.location.z(), residual);
  return w.path();
}

std::string write_stability(const Scenario& s, const std::string& out_dir) {
  if (s.sources.empty()) throw ConfigError("stability needs a non-empty 'sources' list");
  StabilityOptions o;
  o.eps = s.eps;
  o.seeds = s.seeds;
  o.seed = s.seed;
  o.omega_radius = s.rho_omega;
  o.n_theta = s.n_theta;
  o.n_phi = s.n_phi;
  o.forward_n = s.forward_n;
  o.single_source = s.mode == "single";
  o.recovery = s.recovery;
  o.lattice_n = s.lattice_n;
  o.R0 = s.R0;
  const StabilityTable t = cauchy_stability_experiment(s.sources, s.medium, s.k, s.sources.eta, o);
  CsvWriter w(prepare(out_dir, "stability.csv"), "eps,err_a,err_z,bound,theta");
  const double nan = std::nan("");
  for (const auto& r : t.rows) {
    if (!r.failure.empty())
      w.row(r.eps, nan, nan, nan, t.theta);
    else
      w.row(r.eps, r.err_a, r.err_z, s.lattice_n > 0 ? r.bound : nan, t.theta);
  }
  return w.path();
}

std::string write_carleman(const Scenario& s, const std::string& out_dir) {
  const ExcludedBall ball{Vec3::Zero(), s.carleman_eps};
  const AnnularDomain om(s.carleman_outer, {ball}, {s.carleman_radial, s.carleman_angular, 2 * s.carleman_angular});
  const auto norms = s.medium.norms();
  const double t0 = tau0(s.k, norms.c0, norms.grad_c0, s.carleman_eps);
  std::vector<double> taus;
  for (int i = 0; i < s.carleman_taus; ++i)
    taus.push_back(s.carleman_taus == 1 ? t0 : t0 * std::pow(4.0, static_cast<double>(i) / (s.carleman_taus - 1)));
  CsvWriter w(prepare(out_dir, "carleman.csv"), "tau,lhs,rhs,c_emp");
  for (const auto& f : carleman_test_fields(s.carleman_fields, s.seed, s.k, ball))
    for (const auto& row : carleman_check(f, om, Vec3::Zero(), s.k, s.medium, taus, s.carleman_eps, s.R0).rows)
      w.row(row.tau, row.lhs, row.rhs, row.c_emp);
  return w.path();
}

std::vector<std::string> write_dump(const Scenario& s, const std::string& out_dir) {
  const CubeGrid grid(s.R0, s.cgo_n);
  const SpectralField q = project_medium(s.medium, grid);
  const std::string a = prepare(out_dir, "medium_spectral.field"), b = prepare(out_dir, "medium.field");
  write_field(a, q);
  write_field(b, from_spectral(q));
  return {a, b};
}

// ----------------------------------------------------------------------------- selftest

std::vector<SelftestLine> selftest(bool quick) {
  std::vector<SelftestLine> lines;
  auto check = [&](const std::string& name, auto&& body) {
    SelftestLine l{name, false, ""};
    try {
      l.pass = body(l.detail);
    } catch (const std::exception& e) {
      l.detail = e.what();
    }
    lines.push_back(l);
  };
  check("tau0_zero_medium", [](std::string& d) {
    const double t = tau0(1.0, 0.0, 0.0, 1.0);
    d = num(t);
    return t == 2.0;
  });
  check("holder_theta", [](std::string& d) {
    const double t = holder_theta(0.1, 2.0);
    d = num(t);
    return std::abs(t - 8.389e-3) < 5e-7;
  });
  check("holder_fit_exact_slope", [](std::string& d) {
    std::vector<double> e{1e-5, 1e-4, 1e-3, 1e-2}, r;
    for (double x : e) r.push_back(std::sqrt(x));
    const double s = holder_fit(e, r).slope;
    d = num(s);
    return std::abs(s - 0.5) < 1e-12;
  });
  check("cutoff_plateaus", [](std::string& d) {
    const MollifiedCutoff c(Vec3::Zero(), 0.1);
    const double a = c.eval(Vec3(0.1, 0, 0)).value, b = c.eval(Vec3(0, 0.2, 0)).value;
    d = num(a) + " " + num(b);
    return a == 0.0 && b == 1.0;
  });
  check("faddeev_inverse", [](std::string& d) {
    const CubeGrid g(kPi, 8);
    SpectralField F(g);
    CounterRng rng(7);
    for (auto& c : F.coeffs) c = cplx(rng.normal(), rng.normal());
    const FaddeevParameter xi(1.0, 5.0);
    const SpectralField back = apply_faddeev_operator(apply_G(F, xi), xi);
    double err = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < F.coeffs.size(); ++i) {
      err = std::max(err, std::abs(back.coeffs[i] - F.coeffs[i]));
      ref = std::max(ref, std::abs(F.coeffs[i]));
    }
    d = num(err / ref);
    return err <= 1e-12 * ref;
  });
  check("config_roundtrip", [](std::string& d) {
    const Scenario s = make_scenario(Config::parse("k = 3\nsources = [[1, 0.1, 0, 0]]\neps = [1e-3, 1e-2]\n"));
    d = num(s.k);
    return s.k == 3.0 && s.sources.size() == 1 && s.eps.size() == 2;
  });
  check("epsilon0_decreasing", [](std::string& d) {
    const double a = epsilon0(1.0, 2.0, 0.1, 1.0), b = epsilon0(2.0, 2.0, 0.1, 1.0);
    d = num(a) + " " + num(b);
    return a > b && b > 0.0;
  });
  if (!quick) {
    check("reciprocity_plane_wave", [](std::string& d) {
      PointSourceSet S;
      S.sources = {{0.8, Vec3(0.2, -0.1, 0.3)}};
      ForwardOptions fo;
      fo.omega_radius = 0.95;
      const CauchyData data = extract_cauchy(solve_forward(S, Medium(), 2.0, fo), MeasurementSphere(0.95, 24, 48));
      const CgoParameter xi = plane_wave_parameter(Vec3::UnitX(), 2.0);
      const cplx P = boundary_pairing(data, TestSolution::plane_wave(xi)).value;
      const double err = std::abs(P - 0.8 * std::exp(kI * 2.0 * 0.2));
      d = num(err);
      return err < 1e-6;
    });
    check("single_source_round_trip", [](std::string& d) {
      PointSourceSet S;
      S.sources = {{0.8, Vec3(-0.35, 0.1, 0.05)}};
      ForwardOptions fo;
      fo.omega_radius = 0.95;
      const CauchyData data = extract_cauchy(solve_forward(S, Medium(), 2.0, fo), MeasurementSphere(0.95, 24, 48));
      RecoveryOptions ro;
      ro.max_radius = 0.95;
      const SingleSourceFit f = recover_single_source(data, Medium(), 2.0, Vec3(-0.3, 0.0, 0.0), ro);
      const double err = std::max(std::abs(f.amplitude - 0.8), (f.location - S.sources[0].location).norm());
      d = num(err);
      return err < 1e-6;
    });
  }
  return lines;
}

// ----------------------------------------------------------------------------- entry

const std::string* builtin_scenario(const std::string& name) {
  static const std::map<std::string, std::string> table{
      {"demo",
       "# two well-separated sources in a homogeneous medium\n"
       "k = 10\neta = 0.06\nrho_omega = 0.95\n"
       "sources = [[1.0, -0.3, 0.05, 0.0], [0.7, 0.3, 0.05, 0.0]]\n"
       "n_theta = 32\nn_phi = 64\neps = [1e-4, 1e-3, 1e-2]\nseeds = 2\nlattice_n = 16\n"},
      {"bump",
       "# one source next to a smooth bump\n"
       "k = 2\neta = 0.04\nrho_omega = 0.95\nR0 = 2\n"
       "sources = [[0.8, -0.35, 0.1, 0.05]]\nmedium = [[0.3, 0.3, 0.0, 0.0, 0.55]]\n"
       "mode = single\ncgo_n = 32\n"},
  };
  const auto it = table.find(name);
  return it == table.end() ? nullptr : &it->second;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Helmholtz point-source laboratory", "hsl"};
  app.require_subcommand(1);
  std::string config, out_dir = ".", field_path, data_path;
  std::uint64_t seed = 0;
  int grid = 0;
  bool quick = false;
  bool seed_given = false;

  const std::vector<std::pair<std::string, std::string>> verbs{
      {"forward", "solve the forward problem and write cauchy.csv"},
      {"cgo", "build CGO solutions and write their certificates to cgo.csv"},
      {"invert", "recover sources from a Cauchy data CSV into sources.csv"},
      {"stability", "noise sweep of the multi-source recovery into stability.csv"},
      {"carleman", "Carleman inequality sweep into carleman.csv"},
      {"dump", "write the projected medium as binary field dumps"},
      {"load", "read a binary field dump and print a summary"},
      {"selftest", "run the built-in checks"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : verbs) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "scenario file or built-in name (demo, bump)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "master seed")->each([&](const std::string&) { seed_given = true; });
    sub->add_option("--grid", grid, "lattice nodes per axis for the forward and CGO grids");
    sub->add_flag("--quick", quick, "smaller discretizations");
    subs[name] = sub;
  }
  subs["load"]->add_option("file", field_path, "field dump")->required();
  subs["invert"]->add_option("--data", data_path, "Cauchy data CSV (overrides the config's 'data')");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "hsl: " << e.what() << "\n" << app.help();
    return kUsage;
  }
  const std::string verb = app.get_subcommands().front()->get_name();

  try {
    if (verb == "selftest") {
      bool ok = true;
      for (const auto& l : selftest(quick)) {
        out << (l.pass ? "PASS " : "FAIL ") << l.name << " " << l.detail << "\n";
        ok = ok && l.pass;
      }
      return ok ? kOk : kCheckFailed;
    }
    if (verb == "load") {
      const AnyField f = read_field(field_path);
      std::visit(
          [&](const auto& fld) {
            using T = std::decay_t<decltype(fld)>;
            const auto& v = [&]() -> const std::vector<cplx>& {
              if constexpr (std::is_same_v<T, ScalarField>) return fld.values;
              else return fld.coeffs;
            }();
            double l2 = 0.0, mx = 0.0;
            for (const cplx& c : v) {
              l2 += std::norm(c);
              mx = std::max(mx, std::abs(c));
            }
            out << "kind=" << (std::is_same_v<T, ScalarField> ? "spatial" : "spectral") << " R0=" << num(fld.grid.R0())
                << " n=" << fld.grid.n() << " l2=" << num(std::sqrt(l2)) << " max=" << num(mx) << "\n";
          },
          f);
      return kOk;
    }

    Config cfg;
    if (!config.empty()) {
      if (fs::is_regular_file(config))
        cfg = Config::load(config);
      else if (const std::string* text = builtin_scenario(config))
        cfg = Config::parse(*text, config);
      else
        throw ConfigError("config file not found: '" + config + "'");
    }
    Scenario s = make_scenario(cfg);
    if (seed_given) s.seed = seed;
    if (!data_path.empty()) s.data = data_path;
    if (grid > 0) s.forward_n = s.cgo_n = grid;
    if (quick) apply_quick(s);

    std::vector<std::string> written;
    if (verb == "forward") written.push_back(write_forward(s, out_dir));
    if (verb == "cgo") written.push_back(write_cgo(s, out_dir));
    if (verb == "invert") written.push_back(write_invert(s, out_dir));
    if (verb == "stability") written.push_back(write_stability(s, out_dir));
    if (verb == "carleman") written.push_back(write_carleman(s, out_dir));
    if (verb == "dump") written = write_dump(s, out_dir);
    for (const auto& p : written) out << p << "\n";
    return kOk;
  } catch (const ConfigError& e) {
    err << "hsl " << verb << ": " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "hsl " << verb << ": " << e.what() << "\n";
    return kConfigError;
  } catch (const DegenerateInputError& e) {
    err << "hsl " << verb << ": " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "hsl " << verb << ": " << e.what() << "\n";
    return kSolverFailure;
  }
}

}  // namespace hsl::cli
