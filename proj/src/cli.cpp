#include "negdep/cli.hpp"

#include "negdep/json_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace negdep::cli {
namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitVerdictNegative = 2;

json config_to_json(const RunConfig& cfg) {
  json j{{"command", cfg.command},
         {"inputs", cfg.inputs},
         {"number_mode", cfg.number_mode},
         {"caps",
          {{"grid_cap", cfg.grid_cap},
           {"nsd_grid_cap", cfg.nsd_grid_cap},
           {"upper_set_cap", cfg.upper_set_cap},
           {"lp_variable_cap", cfg.lp_variable_cap}}},
         {"output", cfg.output}};
  if (cfg.seed_set) j["seed"] = cfg.seed;
  return j;
}

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid JSON in '") + path + "': " + e.what());
  }
  return j;
}

void emit(const RunConfig& cfg, const json& report, std::ostream& out) {
  json envelope = report;
  envelope["config"] = config_to_json(cfg);
  envelope["timestamp"] = timestamp_now();
  const std::string text = envelope.dump(2) + "\n";
  if (cfg.output.empty()) {
    out << text;
  } else {
    std::ofstream f(cfg.output);
    if (!f) throw Error(ErrorCode::Usage, "cannot write '" + cfg.output + "'");
    f << text;
  }
}

/// --mode overrides NEGDEP_NUM_MODE overrides the file's number_mode.
std::string resolve_mode(const std::string& flag_mode, const std::string& file_mode) {
  if (!flag_mode.empty()) return flag_mode;
  if (const char* env = std::getenv("NEGDEP_NUM_MODE")) {
    const std::string e = env;
    if (e == "float" || e == "rational") return e;
  }
  return file_mode.empty() ? "float" : file_mode;
}

CheckOptions check_options(const RunConfig& cfg) {
  CheckOptions opts;
  opts.grid_cap = cfg.grid_cap;
  opts.nsd_grid_cap = cfg.nsd_grid_cap;
  opts.upper_set_cap = cfg.upper_set_cap;
  return opts;
}

template <class Scalar>
int run_check(const RunConfig& cfg, const json& input, std::ostream& out) {
  const auto d = io::joint_from_json<Scalar>(input);
  const auto chain = check_chain(d, check_options(cfg));
  json report{{"result", io::chain_to_json(chain)}};
  const auto& r = chain.report;
  const bool violation = r.ct.fails() || r.na.fails() || r.nsd.fails() || r.nod.fails() ||
                         r.nuod.fails() || r.nlod.fails() || r.ncd.fails() || !chain.consistent();
  report["status"] = violation ? "verdict-negative" : "ok";
  emit(cfg, report, out);
  return violation ? kExitVerdictNegative : kExitOk;
}

template <class Scalar>
int run_theorem1(const RunConfig& cfg, const json& input, std::ostream& out) {
  const auto d = io::joint_from_json<Scalar>(input);
  const auto rep = check_theorem1(d, scalar_traits<Scalar>::sum_tolerance(), check_options(cfg));
  const bool applies = rep.outcome == Theorem1Report<Scalar>::Outcome::Applies;
  json report{{"result", io::theorem1_to_json(rep)},
              {"status", applies ? "ok" : "verdict-negative"}};
  emit(cfg, report, out);
  return applies ? kExitOk : kExitVerdictNegative;
}

template <class Scalar>
int run_decompose(const RunConfig& cfg, const json& input, std::ostream& out) {
  const auto d = io::joint_from_json<Scalar>(input);
  const auto dec = binary_multinomial_decompose(d);
  const auto back = recompose(dec);
  if (!back.approx_equal(d, scalar_traits<Scalar>::sum_tolerance()))
    throw Error(ErrorCode::InconsistentComponents, "recomposition check failed");
  json report{{"result", io::decomposition_to_json(dec)}, {"status", "ok"}};
  emit(cfg, report, out);
  return kExitOk;
}

template <class Scalar>
int run_orbit_mixture(const RunConfig& cfg, const json& input, std::ostream& out) {
  const auto d = io::joint_from_json<Scalar>(input);
  const auto mix = orbit_mixture_decompose(d);
  json report{{"result", io::orbit_mixture_to_json(mix)}, {"status", "ok"}};
  emit(cfg, report, out);
  return kExitOk;
}

template <class Scalar>
int run_symmetrize(const RunConfig& cfg, const json& input, std::ostream& out) {
  const auto d = io::joint_from_json<Scalar>(input);
  json report{{"result", io::joint_to_json(symmetrize(d))}, {"status", "ok"}};
  emit(cfg, report, out);
  return kExitOk;
}

template <class Scalar>
int run_jm_feasible(const RunConfig& cfg, const json& input, std::ostream& out) {
  const auto marginals = io::marginals_from_json<Scalar>(input);
  TransportCaps caps;
  caps.lp_variable_cap = cfg.lp_variable_cap;
  const auto res = solve_jm_feasibility(marginals, caps);
  json result{{"jointly_mixable", res.jointly_mixable},
              {"center", io::scalar_to_json(res.center)},
              {"constant_sum_support_size", res.support_size}};
  if (res.coupling) result["coupling"] = io::joint_to_json(*res.coupling);
  json report{{"result", std::move(result)},
              {"status", res.jointly_mixable ? "ok" : "verdict-negative"}};
  emit(cfg, report, out);
  return res.jointly_mixable ? kExitOk : kExitVerdictNegative;
}

template <class Scalar>
int run_ot_solve(const RunConfig& cfg, const json& input, const std::string& uncertainty,
                 const std::string& cost_name, std::ostream& out) {
  const auto marginals = io::marginals_from_json<Scalar>(input);
  const auto n = static_cast<Eigen::Index>(marginals.size());

  UncertaintySpec<Scalar> unc = UncertaintySpec<Scalar>::all_subsets(n);
  if (uncertainty == "all") {
    // default
  } else if (uncertainty.rfind("card:", 0) == 0) {
    unc = UncertaintySpec<Scalar>::fixed_cardinality(n, std::stoi(uncertainty.substr(5)));
  } else {
    unc = io::uncertainty_from_json<Scalar>(load_json(uncertainty), n);
  }

  CostSpec<Scalar> cost = CostSpec<Scalar>::quadratic();
  if (cost_name == "var")
    cost = CostSpec<Scalar>::variance();
  else if (cost_name == "harmonic")
    cost = CostSpec<Scalar>::repulsive_harmonic();
  else if (cost_name != "quad")
    throw Error(ErrorCode::Usage, "unknown cost '" + cost_name + "'");

  TransportCaps caps;
  caps.lp_variable_cap = cfg.lp_variable_cap;
  const auto sol = solve_minimax(marginals, unc, cost, caps);
  json report{{"result", io::transport_solution_to_json(sol, n)}, {"status", "ok"}};
  emit(cfg, report, out);
  return kExitOk;
}

int run_construct(const RunConfig& cfg, const std::vector<double>& variances, std::ostream& out) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(variances.size()));
  for (std::size_t i = 0; i < variances.size(); ++i) v[static_cast<Eigen::Index>(i)] = variances[i];
  const auto trace = construct_na_gaussian_cov(v);
  json report{{"result", io::construction_to_json(trace)}, {"status", "ok"}};
  emit(cfg, report, out);
  return kExitOk;
}

int run_jm_cov3(const RunConfig& cfg, const std::vector<double>& variances, std::ostream& out) {
  if (variances.size() != 3) throw Error(ErrorCode::Usage, "jm-cov3 needs exactly 3 variances");
  const auto r = jm_cov_n3(Eigen::Vector3d(variances[0], variances[1], variances[2]));
  json report{{"result",
               {{"cov", io::matrix_to_json(r.cov)},
                {"psd", r.psd},
                {"min_eigenvalue", r.min_eigenvalue}}},
              {"status", r.psd ? "ok" : "verdict-negative"}};
  emit(cfg, report, out);
  return r.psd ? kExitOk : kExitVerdictNegative;
}

int run_sample(const RunConfig& cfg, const json& input, Eigen::Index count, bool emit_draws,
               std::ostream& out) {
  const auto spec = io::elliptical_from_json(input);
  const auto draws = sample(spec, count, cfg.seed);
  const Eigen::RowVectorXd mean = draws.colwise().mean();
  const Eigen::MatrixXd centered = draws.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / std::max<double>(1.0, draws.rows() - 1);
  Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(cov.rows(), cov.cols());
  for (Eigen::Index i = 0; i < cov.rows(); ++i)
    for (Eigen::Index j = 0; j < cov.cols(); ++j)
      if (cov(i, i) > 0 && cov(j, j) > 0) corr(i, j) = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
  json result{{"count", count},
              {"empirical_mean", io::vector_to_json(Eigen::VectorXd(mean.transpose()))},
              {"empirical_cov", io::matrix_to_json(cov)},
              {"empirical_corr", io::matrix_to_json(corr)},
              {"max_abs_component_sum", draws.rowwise().sum().cwiseAbs().maxCoeff()}};
  if (emit_draws) result["draws"] = io::matrix_to_json(draws);
  json report{{"result", std::move(result)}, {"status", "ok"}};
  emit(cfg, report, out);
  return kExitOk;
}

int run_demo_t_nod(const RunConfig& cfg, const std::string& family, double nu,
                   const std::vector<double>& scales, const std::vector<double>& weights,
                   const std::vector<double>& variances, const std::vector<double>& grid,
                   std::ostream& out) {
  EllipticalSpec spec;
  spec.location = Eigen::VectorXd::Zero(2);
  spec.dispersion = Eigen::Vector2d(variances[0], variances[1]).asDiagonal();
  if (family == "gaussian") {
    spec.family = Family::gaussian();
  } else if (family == "student_t") {
    spec.family = Family::student_t(nu);
  } else if (family == "scale_mixture") {
    if (scales.size() != weights.size() || scales.empty())
      throw Error(ErrorCode::Usage, "scale_mixture needs matching --scales and --weights");
    Eigen::VectorXd s(static_cast<Eigen::Index>(scales.size()));
    Eigen::VectorXd w(static_cast<Eigen::Index>(weights.size()));
    for (std::size_t i = 0; i < scales.size(); ++i) {
      s[static_cast<Eigen::Index>(i)] = scales[i];
      w[static_cast<Eigen::Index>(i)] = weights[i];
    }
    spec.family = Family::scale_mixture(std::move(s), std::move(w));
  } else {
    throw Error(ErrorCode::Usage, "unknown family '" + family + "'");
  }
  const auto res = demo_bivariate_zero_corr_not_nod(spec, grid[0], grid[1], grid[2]);
  json report{{"result",
               {{"max_violation", res.max_violation},
                {"at", {res.at_x1, res.at_x2}},
                {"family", family}}},
              {"status", "ok"}};
  emit(cfg, report, out);
  return kExitOk;
}

int run_verify_thm_opt(const RunConfig& cfg, const json& input, Eigen::Index n,
                       const std::vector<int>& ks, std::ostream& out) {
  const auto marginals = io::marginals_from_json<double>(input);
  if (marginals.size() != 1)
    throw Error(ErrorCode::Usage, "verify-thm-opt expects a single-marginal file");
  TransportCaps caps;
  caps.lp_variable_cap = cfg.lp_variable_cap;
  const auto rep = verify_thm_opt(marginals[0], n, ks, 1e-6, caps);
  json report{{"result", io::thm_opt_to_json(rep)},
              {"status", rep.all_pass() ? "ok" : "verdict-negative"}};
  emit(cfg, report, out);
  return rep.all_pass() ? kExitOk : kExitVerdictNegative;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"negative-dependence toolkit: dependence checkers, joint-mix constructions, "
               "decompositions, and minimax transport"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string flag_mode;
  app.add_option("--mode", flag_mode, "numeric backend: float or rational")
      ->check(CLI::IsMember({"float", "rational"}));
  app.add_option("--output", cfg.output, "write the JSON report to this path instead of stdout");
  app.add_option("--grid-cap", cfg.grid_cap, "orthant threshold-grid cap");
  app.add_option("--nsd-grid-cap", cfg.nsd_grid_cap, "supermodular LP grid cap");
  app.add_option("--upper-set-cap", cfg.upper_set_cap, "upper-set enumeration cap");
  app.add_option("--lp-var-cap", cfg.lp_variable_cap, "transport LP variable cap");

  std::string dist_path, marginal_path, uncertainty = "all", cost_name = "quad";
  std::vector<double> variances;
  std::vector<int> k_values;
  Eigen::Index n_value = 3;
  Eigen::Index count = 1000;
  bool emit_draws = false;
  std::string family = "student_t";
  double nu = 3.0;
  std::vector<double> mix_scales, mix_weights;
  std::vector<double> demo_variances{1.0, 1.0};
  std::vector<double> demo_grid{-3.0, 3.0, 0.1};

  auto* c_check = app.add_subcommand("check", "dependence report with chain audit");
  c_check->add_option("dist", dist_path, "distribution JSON file")->required();

  auto* c_thm1 = app.add_subcommand("theorem1", "conditional-structure NA certificate");
  c_thm1->add_option("dist", dist_path)->required();

  auto* c_constr = app.add_subcommand("construct-gaussian", "NA joint-mix covariance from variances");
  c_constr->add_option("--variances", variances)->required()->delimiter(',');

  auto* c_cov3 = app.add_subcommand("jm-cov3", "closed-form n=3 joint-mix covariance");
  c_cov3->add_option("--variances", variances)->required()->delimiter(',');

  auto* c_dec = app.add_subcommand("decompose", "binary multinomial decomposition");
  c_dec->add_option("dist", dist_path)->required();

  auto* c_orbit = app.add_subcommand("orbit-mixture", "orbit-uniform mixture decomposition");
  c_orbit->add_option("dist", dist_path)->required();

  auto* c_sym = app.add_subcommand("symmetrize", "uniform permutation mixture");
  c_sym->add_option("dist", dist_path)->required();

  auto* c_feas = app.add_subcommand("jm-feasible", "joint-mix feasibility for given marginals");
  c_feas->add_option("marginals", marginal_path)->required();

  auto* c_ot = app.add_subcommand("ot-solve", "minimax transport LP");
  c_ot->add_option("--marginals", marginal_path)->required();
  c_ot->add_option("--uncertainty", uncertainty, "all | card:k | measures.json");
  c_ot->add_option("--cost", cost_name, "quad | var | harmonic");

  auto* c_thm = app.add_subcommand("verify-thm-opt", "minimax optimality verification");
  c_thm->add_option("--marginal", marginal_path)->required();
  c_thm->add_option("--n", n_value, "number of coordinates")->required();
  c_thm->add_option("--k", k_values, "cardinalities to verify")->delimiter(',');

  auto* c_sample = app.add_subcommand("sample", "draw from an elliptical model");
  c_sample->add_option("model", dist_path)->required();
  c_sample->add_option("--count", count);
  c_sample->add_option("--seed", cfg.seed)->required();
  c_sample->add_flag("--emit-draws", emit_draws);

  auto* c_demo = app.add_subcommand("demo-t-nod", "orthant violation scan for uncorrelated "
                                                  "non-Gaussian elliptical pairs");
  c_demo->add_option("--nu", nu, "student t degrees of freedom");
  c_demo->add_option("--family", family, "student_t | gaussian | scale_mixture");
  c_demo->add_option("--scales", mix_scales)->delimiter(',');
  c_demo->add_option("--weights", mix_weights)->delimiter(',');
  c_demo->add_option("--variances", demo_variances, "diagonal dispersion entries")
      ->delimiter(',')
      ->expected(2);
  c_demo->add_option("--grid", demo_grid, "lo,hi,step")->delimiter(',')->expected(3);

  std::vector<const char*> argv;
  argv.push_back("negdep");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitError;
  }

  cfg.seed_set = c_sample->parsed();
  try {
    if (c_check->parsed() || c_thm1->parsed() || c_dec->parsed() || c_orbit->parsed() ||
        c_sym->parsed()) {
      cfg.command = app.get_subcommands().front()->get_name();
      cfg.inputs = {dist_path};
      const json input = load_json(dist_path);
      cfg.number_mode = resolve_mode(flag_mode, io::number_mode_of(input));
      const bool rational = cfg.number_mode == "rational";
      if (c_check->parsed())
        return rational ? run_check<Rational>(cfg, input, out) : run_check<double>(cfg, input, out);
      if (c_thm1->parsed())
        return rational ? run_theorem1<Rational>(cfg, input, out)
                        : run_theorem1<double>(cfg, input, out);
      if (c_dec->parsed())
        return rational ? run_decompose<Rational>(cfg, input, out)
                        : run_decompose<double>(cfg, input, out);
      if (c_orbit->parsed())
        return rational ? run_orbit_mixture<Rational>(cfg, input, out)
                        : run_orbit_mixture<double>(cfg, input, out);
      return rational ? run_symmetrize<Rational>(cfg, input, out)
                      : run_symmetrize<double>(cfg, input, out);
    }
    if (c_feas->parsed() || c_ot->parsed()) {
      cfg.command = c_feas->parsed() ? "jm-feasible" : "ot-solve";
      cfg.inputs = {marginal_path};
      if (c_ot->parsed() && uncertainty != "all" && uncertainty.rfind("card:", 0) != 0)
        cfg.inputs.push_back(uncertainty);
      const json input = load_json(marginal_path);
      cfg.number_mode = resolve_mode(flag_mode, io::number_mode_of(input));
      const bool rational = cfg.number_mode == "rational";
      if (c_feas->parsed())
        return rational ? run_jm_feasible<Rational>(cfg, input, out)
                        : run_jm_feasible<double>(cfg, input, out);
      return rational ? run_ot_solve<Rational>(cfg, input, uncertainty, cost_name, out)
                      : run_ot_solve<double>(cfg, input, uncertainty, cost_name, out);
    }
    if (c_constr->parsed()) {
      cfg.command = "construct-gaussian";
      cfg.number_mode = "float";
      return run_construct(cfg, variances, out);
    }
    if (c_cov3->parsed()) {
      cfg.command = "jm-cov3";
      cfg.number_mode = "float";
      return run_jm_cov3(cfg, variances, out);
    }
    if (c_thm->parsed()) {
      cfg.command = "verify-thm-opt";
      cfg.inputs = {marginal_path};
      cfg.number_mode = "float";
      return run_verify_thm_opt(cfg, load_json(marginal_path), n_value, k_values, out);
    }
    if (c_sample->parsed()) {
      cfg.command = "sample";
      cfg.inputs = {dist_path};
      cfg.number_mode = "float";
      return run_sample(cfg, load_json(dist_path), count, emit_draws, out);
    }
    if (c_demo->parsed()) {
      cfg.command = "demo-t-nod";
      cfg.number_mode = "float";
      return run_demo_t_nod(cfg, family, nu, mix_scales, mix_weights, demo_variances, demo_grid,
                            out);
    }
    err << "no subcommand selected\n";
    return kExitError;
  } catch (const Error& e) {
    json report{{"status", "error"},
                {"error", {{"code", error_code_name(e.code())}, {"message", e.what()}}}};
    try {
      emit(cfg, report, out);
    } catch (...) {
    }
    err << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace negdep::cli
