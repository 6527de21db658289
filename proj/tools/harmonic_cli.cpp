#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "harmonic/harmonic.hpp"

namespace {

using namespace harmonic;

struct RunConfig {
  std::size_t trunc = 32;
  double tol = 1e-9;
  std::size_t n_max = 1000;
  double escape_radius = 1e6;
  std::uint64_t seed = 20240611;
  std::string output;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  const json j = [&] {
    try {
      return json::parse(read_file(path));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::SchemaError, path + ": " + e.what());
    }
  }();
  if (!j.is_object()) throw Error(ErrorKind::SchemaError, path + ": expected a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "trunc") cfg.trunc = value.get<std::size_t>();
      else if (key == "tol") cfg.tol = value.get<double>();
      else if (key == "n_max") cfg.n_max = value.get<std::size_t>();
      else if (key == "escape_radius") cfg.escape_radius = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "output") cfg.output = value.get<std::string>();
      else throw Error(ErrorKind::SchemaError, path + ": unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, path + ": " + e.what());
  }
}

void validate(const RunConfig& cfg) {
  if (cfg.trunc < 1) throw Error(ErrorKind::InvalidArgument, "trunc must be >= 1");
  if (!(cfg.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be > 0");
  if (!(cfg.escape_radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "escape_radius must be > 0");
}

void emit(const RunConfig& cfg, const std::string& bytes) {
  if (cfg.output.empty() || cfg.output == "-") {
    std::cout.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    std::cout.flush();
    return;
  }
  std::ofstream out(cfg.output, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + cfg.output);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void emit(const RunConfig& cfg, const json& j) { emit(cfg, j.dump(2) + "\n"); }

HarmonicMap parse_map(const std::string& text, const RunConfig& cfg) { return parse_harmonic(text, {cfg.trunc}); }

/// An analytic symbol: an expression without conj(...) summands.
TaylorSeries parse_symbol(const std::string& text, const RunConfig& cfg, const char* name) {
  const HarmonicMap f = parse_map(text, cfg);
  if (!is_series(f.g) || !std::get<TaylorSeries>(f.g).is_zero())
    throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be analytic (no conj(...) terms)");
  return as_series(f.h, cfg.trunc);
}

OrbitOptions orbit_options(const RunConfig& cfg) {
  OrbitOptions o;
  o.n_max = cfg.n_max;
  o.tol = cfg.tol;
  o.escape_radius = cfg.escape_radius;
  return o;
}

std::pair<double, double> parse_pair(const std::string& a, const std::string& b) { return {std::stod(a), std::stod(b)}; }

struct Coefficients {
  std::string alpha = "1", beta = "1", gamma = "0", delta = "0";

  void add_to(CLI::App* app) {
    app->add_option("--alpha", alpha, "alpha coefficient (complex)")->capture_default_str();
    app->add_option("--beta", beta, "beta coefficient (complex)")->capture_default_str();
    app->add_option("--gamma", gamma, "gamma coefficient (complex)")->capture_default_str();
    app->add_option("--delta", delta, "delta coefficient (complex)")->capture_default_str();
  }
};

struct OperatorSource {
  std::string phi, pi, file;
  Coefficients coef;
  double perturb = 0.0;

  void add_to(CLI::App* app) {
    app->add_option("--phi", phi, "analytic symbol phi");
    app->add_option("--pi", pi, "analytic symbol pi");
    app->add_option("--operator", file, "operator JSON file {trunc, A, B}");
    coef.add_to(app);
    app->add_option("--perturb", perturb, "add a seeded random perturbation of this size to A and B");
  }

  BlockOperator load(const RunConfig& cfg) const {
    BlockOperator L;
    if (!file.empty()) {
      L = deserialize_operator(read_file(file));
    } else {
      if (phi.empty() || pi.empty()) throw Error(ErrorKind::InvalidArgument, "give --phi and --pi, or --operator");
      L = general_comp_op(parse_symbol(phi, cfg, "phi"), parse_symbol(pi, cfg, "pi"), parse_complex(coef.alpha),
                          parse_complex(coef.beta), parse_complex(coef.gamma), parse_complex(coef.delta), cfg.trunc);
    }
    if (perturb != 0.0) {
      std::mt19937_64 rng(cfg.seed);
      for (CMatrix* M : {&L.A, &L.B})
        for (Eigen::Index i = 0; i < M->rows(); ++i)
          for (Eigen::Index j = 0; j < M->cols(); ++j) (*M)(i, j) += perturb * selftest_detail::gaussian(rng);
    }
    return L;
  }
};

json symbols_json(const std::optional<Symbols>& s) {
  if (!s) return nullptr;
  return {{"phi", io_detail::complex_list(s->phi.coeffs())}, {"pi", io_detail::complex_list(s->pi.coeffs())}};
}

int run(int argc, char** argv) {
  CLI::App app{"Harmonic function composition, dynamics and HH2 composition operators"};
  app.require_subcommand(1);
  // global options may also follow the subcommand
  app.fallthrough();

  RunConfig cfg;
  std::string config_path;
  app.add_option("--config", config_path, "JSON file overriding the run defaults");
  auto* o_trunc = app.add_option("--trunc,-N", cfg.trunc, "series truncation order N")->capture_default_str();
  auto* o_tol = app.add_option("--tol", cfg.tol, "tolerance")->capture_default_str();
  auto* o_nmax = app.add_option("--n-max", cfg.n_max, "maximum iterations")->capture_default_str();
  auto* o_esc = app.add_option("--escape-radius", cfg.escape_radius, "escape radius")->capture_default_str();
  auto* o_seed = app.add_option("--seed", cfg.seed, "seed for randomized checks")->capture_default_str();
  auto* o_out = app.add_option("--output,-o", cfg.output, "output file (default stdout)");

  // compose
  auto* compose = app.add_subcommand("compose", "compose two harmonic maps");
  std::string law = "direct", f1, f2;
  Coefficients blend;
  compose->add_option("--law", law, "direct | crossed | blend")
      ->check(CLI::IsMember({"direct", "crossed", "blend"}))
      ->capture_default_str();
  blend.add_to(compose);
  compose->add_option("f1", f1, "outer map")->required();
  compose->add_option("f2", f2, "inner map")->required();

  // iterate
  auto* iterate = app.add_subcommand("iterate", "orbit of z0 as CSV (n,re,im)");
  std::string it_law, it_f, it_z0;
  std::size_t it_n = 0;
  iterate->add_option("law", it_law, "direct | crossed")->required()->check(CLI::IsMember({"direct", "crossed"}));
  iterate->add_option("f", it_f, "harmonic map")->required();
  iterate->add_option("z0", it_z0, "starting point (complex)")->required();
  iterate->add_option("n", it_n, "number of iterations")->required();

  // fixed points / Moebius classification
  auto* fixed = app.add_subcommand("fixed-points", "induced h-fixed points with multipliers");
  std::string fp_f;
  fixed->add_option("f", fp_f, "harmonic map")->required();

  auto* classify = app.add_subcommand("classify-mobius", "fixed-point taxonomy of T_A + conj(T_B)");
  std::string cm_f;
  std::vector<std::string> cm_at;
  classify->add_option("f", cm_f, "Moebius harmonic map")->required();
  classify->add_option("--at", cm_at, "points whose orbit limit should be predicted");

  // linearization
  auto* koenigs = app.add_subcommand("koenigs", "Koenigs linearization at the fixed point 0");
  std::string kf;
  koenigs->add_option("f", kf, "harmonic map")->required();
  auto* boettcher = app.add_subcommand("boettcher", "Boettcher linearization at the fixed point 0");
  std::string bf;
  boettcher->add_option("f", bf, "harmonic map")->required();

  // basin
  auto* basin = app.add_subcommand("basin", "basins of the induced fixed points as PPM");
  std::string bs_f, bs_size = "256x256";
  std::vector<double> bs_bounds{-2.0, 2.0, -2.0, 2.0};
  unsigned bs_threads = 0;
  basin->add_option("f", bs_f, "harmonic map")->required();
  basin->add_option("--size", bs_size, "WIDTHxHEIGHT")->capture_default_str();
  basin->add_option("--bounds", bs_bounds, "re_min re_max im_min im_max")->expected(4)->delimiter(',');
  basin->add_option("--threads", bs_threads, "worker threads (0 = hardware)");

  // operators
  auto* op = app.add_subcommand("op", "composition operators on HH2");
  op->require_subcommand(1);
  auto* op_matrix = op->add_subcommand("matrix", "write the block operator");
  OperatorSource src_matrix;
  std::string matrix_format = "json";
  src_matrix.add_to(op_matrix);
  op_matrix->add_option("--format", matrix_format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  auto* op_norm_cmd = op->add_subcommand("norm", "operator norm max(||A||, ||B||)");
  OperatorSource src_norm;
  src_norm.add_to(op_norm_cmd);
  auto* op_kernel = op->add_subcommand("adjoint-kernel", "adjoint of C_phi + conj(C_pi) applied to a kernel");
  std::string ak_phi, ak_pi, ak_lambda;
  op_kernel->add_option("--phi", ak_phi, "analytic symbol phi")->required();
  op_kernel->add_option("--pi", ak_pi, "analytic symbol pi")->required();
  op_kernel->add_option("--lambda", ak_lambda, "kernel point in the disk")->required();
  auto* op_simple = op->add_subcommand("simple-check", "is the operator a simple composition operator?");
  OperatorSource src_simple;
  src_simple.add_to(op_simple);
  auto* op_normal = op->add_subcommand("normal-check", "is the operator normal?");
  OperatorSource src_normal;
  src_normal.add_to(op_normal);

  auto* selftest = app.add_subcommand("selftest", "run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  // defaults < config file < explicit flags
  if (!config_path.empty()) {
    const RunConfig flags = cfg;
    apply_config_file(cfg, config_path);
    if (o_trunc->count()) cfg.trunc = flags.trunc;
    if (o_tol->count()) cfg.tol = flags.tol;
    if (o_nmax->count()) cfg.n_max = flags.n_max;
    if (o_esc->count()) cfg.escape_radius = flags.escape_radius;
    if (o_seed->count()) cfg.seed = flags.seed;
    if (o_out->count()) cfg.output = flags.output;
  }
  validate(cfg);

  if (*compose) {
    const HarmonicMap a = parse_map(f1, cfg), b = parse_map(f2, cfg);
    HarmonicMap r;
    if (law == "direct") r = compose_direct(a, b);
    else if (law == "crossed") r = compose_crossed(a, b);
    else
      r = compose_blend(a, b, parse_complex(blend.alpha), parse_complex(blend.beta), parse_complex(blend.gamma),
                        parse_complex(blend.delta));
    emit(cfg, serialize_map(r));
  } else if (*iterate) {
    const HarmonicMap f = parse_map(it_f, cfg);
    OrbitOptions oo = orbit_options(cfg);
    oo.n_max = it_n;
    oo.stop_when_converged = false;
    const cplx z0 = parse_complex(it_z0);
    const Orbit o = it_law == "direct" ? orbit_direct(f, z0, oo) : orbit_crossed(f, z0, oo);
    emit(cfg, orbit_to_csv(o));
    std::cerr << "status: " << to_string(o.status) << "\n";
  } else if (*fixed) {
    emit(cfg, to_json(induced_fixed_points(parse_map(fp_f, cfg))));
  } else if (*classify) {
    const MoebiusTaxonomy t = classify_mobius_harmonic(parse_map(cm_f, cfg));
    json j = to_json(t);
    if (!cm_at.empty()) {
      json preds = json::array();
      for (const auto& s : cm_at) {
        const cplx z = parse_complex(s);
        const MoebiusPrediction p = t.predict(z);
        json e = {{"z", to_json(z)}, {"outcome", to_string(p.outcome)}};
        if (p.limit) e["limit"] = to_json(*p.limit);
        preds.push_back(std::move(e));
      }
      j["predictions"] = std::move(preds);
    }
    emit(cfg, j);
  } else if (*koenigs) {
    emit(cfg, to_json(harmonic_koenigs(parse_map(kf, cfg), cfg.trunc)));
  } else if (*boettcher) {
    const HarmonicMap f = parse_map(bf, cfg);
    const TaylorSeries g = as_series(f.g, cfg.trunc);
    // both parts superattracting: Boettcher on each side
    const bool both = std::abs(g[1]) <= 1e-14;
    emit(cfg, to_json(both ? harmonic_linearize(f, cfg.trunc) : harmonic_boettcher(f, cfg.trunc)));
  } else if (*basin) {
    std::size_t w = 0, h = 0;
    if (std::sscanf(bs_size.c_str(), "%zux%zu", &w, &h) != 2 || w == 0 || h == 0)
      throw Error(ErrorKind::InvalidArgument, "--size must look like 256x256");
    if (!(bs_bounds[0] < bs_bounds[1] && bs_bounds[2] < bs_bounds[3]))
      throw Error(ErrorKind::InvalidArgument, "--bounds must be re_min < re_max, im_min < im_max");
    BasinOptions bo;
    bo.orbit = orbit_options(cfg);
    bo.threads = bs_threads;
    const BasinGrid g = basin_render(parse_map(bs_f, cfg), w, h, {bs_bounds[0], bs_bounds[1]},
                                     {bs_bounds[2], bs_bounds[3]}, bo);
    emit(cfg, basin_to_ppm(g));
  } else if (*op_matrix) {
    const BlockOperator L = src_matrix.load(cfg);
    if (matrix_format == "csv") emit(cfg, operator_to_csv(L));
    else emit(cfg, to_json(L));
  } else if (*op_norm_cmd) {
    const OperatorNorm n = op_norm_parts(src_norm.load(cfg));
    emit(cfg, json{{"norm", n.norm}, {"norm_A", n.norm_A}, {"norm_B", n.norm_B}});
  } else if (*op_kernel) {
    const KernelImage k = adjoint_kernel_image(parse_symbol(ak_phi, cfg, "phi"), parse_symbol(ak_pi, cfg, "pi"),
                                               parse_complex(ak_lambda), cfg.trunc);
    emit(cfg, json{{"actual", to_json(k.actual)},
                   {"predicted", to_json(k.predicted)},
                   {"error", hh_norm(k.actual - k.predicted)},
                   {"tail_tolerance", k.tail_tolerance}});
  } else if (*op_simple) {
    const BlockOperator L = src_simple.load(cfg);
    const auto sym = is_simple_composition(L, cfg.tol, L.order());
    const auto pairs = monomial_pairs(L.order());
    const double mult = multiplicativity_residual(L, pairs);
    std::vector<cplx> lambdas{0.0};
    for (int k = 0; k < 8; ++k) lambdas.push_back(std::polar(0.1, 2.0 * std::numbers::pi * k / 8.0));
    const double kern = kernel_mapping_residual(L, lambdas);
    const bool verdict = sym.has_value() && mult < cfg.tol && kern < cfg.tol;
    emit(cfg, json{{"simple", verdict},
                   {"monomial", sym.has_value()},
                   {"multiplicativity", mult < cfg.tol},
                   {"multiplicativity_residual", mult},
                   {"kernel_mapping", kern < cfg.tol},
                   {"kernel_mapping_residual", kern},
                   {"symbols", symbols_json(sym)}});
  } else if (*op_normal) {
    const double c = commutator_norm(src_normal.load(cfg));
    emit(cfg, json{{"normal", c < cfg.tol}, {"commutator_norm", c}});
  } else if (*selftest) {
    SelftestOptions so;
    so.seed = cfg.seed;
    std::string report;
    bool all = true;
    for (const auto& r : run_selftest(so)) {
      report += format_result(r) + "\n";
      all = all && r.pass;
    }
    report += all ? "selftest: all criteria pass\n" : "selftest: FAILED\n";
    emit(cfg, report);
    return all ? 0 : 5;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const harmonic::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return harmonic::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
