#include "arveson/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <functional>
#include <sstream>

#include "arveson/cp_maps.hpp"
#include "arveson/io.hpp"
#include "arveson/similarity.hpp"

namespace arveson {

namespace {

using nlohmann::json;

struct SamplingFlags {
  std::size_t samples = 64;
  std::uint64_t seed = kDefaultSeed;
  std::int64_t grid = 64;

  void attach(CLI::App* cmd) {
    cmd->add_option("--samples", samples, "number of sampled (H, K) pairs")->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "seed of the sample plan")->capture_default_str();
    cmd->add_option("--grid", grid, "grid denominator d; entries are (k + i m)/d")->capture_default_str()
        ->check(CLI::PositiveNumber);
  }

  SamplePlan plan(Eigen::Index n) const { return {n, samples, seed, grid}; }
};

json plan_json(const SamplePlan& plan) {
  return {{"count", plan.count}, {"seed", plan.seed}, {"grid_denominator", plan.grid_denominator}};
}

// what() without the leading "Kind: ".
std::string error_detail(const Error& e) {
  std::string text = e.what();
  const std::string prefix = std::string(e.kind()) + ": ";
  if (text.rfind(prefix, 0) == 0) text.erase(0, prefix.size());
  return text;
}

json error_json(const Error& e) { return {{"error", e.kind()}, {"message", error_detail(e)}}; }

ComplexMatrix load_matrix(const std::string& path) {
  try {
    return parse_matrix(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + error_detail(e));
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + error_detail(e));
  }
}

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows()) throw SchemaError("A is " + std::to_string(a.rows()) + "x" + std::to_string(a.rows()) +
                                              " but B is " + std::to_string(b.rows()) + "x" +
                                              std::to_string(b.rows()));
}

// Each handler writes its report into `out` and returns the exit code.
using Handler = std::function<int(std::ostream& out, std::ostream& err)>;

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unitary similarity via norm invariants and ucp-map rigidity", "arveson"};
  app.set_version_flag("--version", std::string(tool_version()));
  app.require_subcommand(1);
  app.fallthrough(false);

  Handler handler;
  std::string path_a, path_b;
  double tol = 1e-8;
  SamplingFlags sampling;

  auto* check = app.add_subcommand("check-sim", "decide whether B = U^* A U for some unitary U");
  std::string format = "json";
  check->add_option("A", path_a, "matrix file for A")->required();
  check->add_option("B", path_b, "matrix file for B")->required();
  sampling.attach(check);
  check->add_option("--tol", tol, "relative tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  check->add_option("--format", format, "report format")->capture_default_str()
      ->check(CLI::IsMember({"json", "text"}));
  check->callback([&] {
    handler = [&](std::ostream& o, std::ostream& e) {
      const ComplexMatrix a = load_matrix(path_a);
      const ComplexMatrix b = load_matrix(path_b);
      require_same_shape(a, b);
      const auto report = arveson_check<double>(a, b, sampling.plan(a.rows()), tol);
      o << write_report(report, format == "text" ? ReportFormat::text : ReportFormat::json);
      if (!report.diagnostic.empty()) e << "arveson: " << report.diagnostic << "\n";
      switch (report.verdict) {
        case Verdict::similar: return exit_code::kSuccess;
        case Verdict::not_similar: return exit_code::kNegative;
        case Verdict::inconclusive: break;
      }
      return exit_code::kInconclusive;
    };
  });

  auto* irreducible = app.add_subcommand("irreducible", "print the dimension of the commutant of {A, A^*}");
  double rank_tol = tolerance::kRank;
  irreducible->add_option("A", path_a, "matrix file for A")->required();
  irreducible->add_option("--tol", rank_tol, "relative singular-value cut")->capture_default_str()
      ->check(CLI::PositiveNumber);
  irreducible->callback([&] {
    handler = [&](std::ostream& o, std::ostream&) {
      const ComplexMatrix a = load_matrix(path_a);
      const Eigen::Index dim = commutant_dimension(a, rank_tol);
      o << canonical_json({{"commutant_dimension", dim}, {"irreducible", dim == 1}, {"n", a.rows()}});
      return dim == 1 ? exit_code::kSuccess : exit_code::kNegative;
    };
  });

  auto* invariants = app.add_subcommand("invariants", "print sampled values of f_(H,K)(A) = ||A kron H + I kron K||");
  invariants->add_option("A", path_a, "matrix file for A")->required();
  sampling.attach(invariants);
  invariants->callback([&] {
    handler = [&](std::ostream& o, std::ostream&) {
      const ComplexMatrix a = load_matrix(path_a);
      const SamplePlan plan = sampling.plan(a.rows());
      json values = json::array();
      for (std::size_t t = 0; t < plan.count; ++t) {
        const auto pair = sample_pair<double>(plan, t);
        values.push_back(arveson_invariant(a, pair.h, pair.k));
      }
      o << canonical_json({{"n", a.rows()}, {"plan", plan_json(plan)}, {"values", std::move(values)}});
      return exit_code::kSuccess;
    };
  });

  auto* recover = app.add_subcommand("recover-unitary", "solve for U with B = U^* A U");
  recover->add_option("A", path_a, "matrix file for A")->required();
  recover->add_option("B", path_b, "matrix file for B")->required();
  recover->add_option("--tol", tol, "relative tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  recover->callback([&] {
    handler = [&](std::ostream& o, std::ostream&) {
      const ComplexMatrix a = load_matrix(path_a);
      const ComplexMatrix b = load_matrix(path_b);
      require_same_shape(a, b);
      try {
        const ComplexMatrix u = recover_unitary(a, b, tol);
        const double residual = (u.adjoint() * a * u - b).norm();
        o << canonical_json({{"residual", residual}, {"unitary", matrix_to_json(u)}});
        return exit_code::kSuccess;
      } catch (const NoIntertwiner& e) {
        o << canonical_json(error_json(e));
      } catch (const NotUnitarilySimilar& e) {
        o << canonical_json(error_json(e));
      }
      return exit_code::kNegative;
    };
  });

  auto* boundary = app.add_subcommand("boundary-verify", "search for ucp maps other than the identity fixing A");
  int trials = 20;
  double distance_tol = 1e-6;
  std::uint64_t boundary_seed = kDefaultSeed;
  boundary->add_option("A", path_a, "matrix file for A")->required();
  boundary->add_option("--trials", trials, "number of random starts")->capture_default_str()
      ->check(CLI::PositiveNumber);
  boundary->add_option("--seed", boundary_seed, "seed for the random starts")->capture_default_str();
  boundary->add_option("--tol", distance_tol, "Choi distance counted as a counterexample")->capture_default_str()
      ->check(CLI::PositiveNumber);
  boundary->callback([&] {
    handler = [&](std::ostream& o, std::ostream& e) {
      const ComplexMatrix a = load_matrix(path_a);
      const auto report = boundary_verify(a, trials, distance_tol, boundary_seed);
      json doc = {{"commutant_dimension", commutant_dimension(a)},
                  {"failed_runs", report.failed_runs},
                  {"feasible_runs", report.feasible_runs},
                  {"max_distance_to_identity", report.max_distance_to_identity},
                  {"seed", boundary_seed},
                  {"trials", trials}};
      if (report.counterexample) doc["counterexample"] = matrix_to_json(report.counterexample->c);
      o << canonical_json(doc);
      if (report.feasible_runs == 0) {
        e << "arveson: no feasibility run converged\n";
        return exit_code::kSoftware;
      }
      return report.counterexample ? exit_code::kNegative : exit_code::kSuccess;
    };
  });

  auto* kraus = app.add_subcommand("kraus", "Kraus operators of the map with the given Choi matrix");
  double kraus_tol = tolerance::kRank;
  kraus->add_option("CHOI", path_a, "matrix file holding an n^2 x n^2 Choi matrix")->required();
  kraus->add_option("--tol", kraus_tol, "relative eigenvalue cut")->capture_default_str()
      ->check(CLI::PositiveNumber);
  kraus->callback([&] {
    handler = [&](std::ostream& o, std::ostream&) {
      const ComplexMatrix m = load_matrix(path_a);
      std::optional<ChoiMatrix<double>> c;
      try {
        c = ChoiMatrix<double>::from_matrix(m);
      } catch (const DimensionError& e) {
        throw SchemaError(path_a + ": " + error_detail(e));
      }
      try {
        const KrausSet<double> set = kraus_from_choi(*c, kraus_tol);
        json ops = json::array();
        for (const auto& v : set.ops) ops.push_back(matrix_to_json(normalize_phase(v)));
        o << canonical_json({{"kraus", std::move(ops)}, {"n", c->n}, {"rank", set.rank()}});
        return exit_code::kSuccess;
      } catch (const NotCompletelyPositive& e) {
        o << canonical_json(error_json(e));
        return exit_code::kNegative;
      }
    };
  });

  auto* expectation = app.add_subcommand("expectation", "ergodic projection of a superoperator");
  double ergodic_tol = tolerance::kRank;
  expectation->add_option("OMEGA", path_a, "matrix file holding the n^2 x n^2 superoperator matrix")->required();
  expectation->add_option("--tol", ergodic_tol, "relative singular-value cut")->capture_default_str()
      ->check(CLI::PositiveNumber);
  expectation->callback([&] {
    handler = [&](std::ostream& o, std::ostream&) {
      const ComplexMatrix m = load_matrix(path_a);
      std::optional<Superoperator<double>> omega;
      try {
        omega.emplace(ChoiMatrix<double>::from_matrix(m).n, m);
      } catch (const DimensionError& e) {
        throw SchemaError(path_a + ": " + error_detail(e));
      }
      const auto projection = ergodic_projection(*omega, ergodic_tol);
      o << canonical_json({{"choi", matrix_to_json(choi(projection.omega).c)},
                           {"fixed_dimension", projection.fixed_basis.size()},
                           {"n", omega->dim()},
                           {"superoperator", matrix_to_json(projection.omega.matrix())}});
      return exit_code::kSuccess;
    };
  });

  auto* probe = app.add_subcommand("probe-remark", "compare invariants of X (+) X and X (+) 0");
  probe->add_option("X", path_a, "matrix file for X")->required();
  sampling.attach(probe);
  probe->add_option("--tol", tol, "relative tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  probe->callback([&] {
    handler = [&](std::ostream& o, std::ostream&) {
      const ComplexMatrix x = load_matrix(path_a);
      const auto result = probe_remark(x, sampling.plan(x.rows()), tol);
      auto samples = [](const std::vector<ProbeSample<double>>& list) {
        json arr = json::array();
        for (const auto& s : list)
          arr.push_back({{"gap", s.gap}, {"index", s.index}, {"value_a", s.value_a}, {"value_b", s.value_b}});
        return arr;
      };
      const auto nonzero = [&](const std::vector<ProbeSample<double>>& list) {
        return std::count_if(list.begin(), list.end(), [&](const auto& s) { return s.gap > tol; });
      };
      o << canonical_json({{"a", matrix_to_json(result.a)},
                           {"b", matrix_to_json(result.b)},
                           {"commutant_dims", {result.commutant_dims.first, result.commutant_dims.second}},
                           {"invariants_matched", result.invariants_matched},
                           {"max_gap_opposite", result.max_gap_opposite},
                           {"max_gap_sampled", result.max_gap_sampled},
                           {"opposite", samples(result.opposite)},
                           {"opposite_gaps_above_tol", nonzero(result.opposite)},
                           {"plan", plan_json(result.plan)},
                           {"sampled", samples(result.sampled)},
                           {"sampled_gaps_above_tol", nonzero(result.sampled)}});
      return exit_code::kSuccess;
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::kSuccess : exit_code::kUsage;
  }

  std::ostringstream report;
  int code = exit_code::kSoftware;
  try {
    code = handler(report, err);
  } catch (const ParseError& e) {
    err << "arveson: " << e.what() << "\n";
    return exit_code::kData;
  } catch (const SchemaError& e) {
    err << "arveson: " << e.what() << "\n";
    return exit_code::kData;
  } catch (const InvalidArgument& e) {
    err << "arveson: " << e.what() << "\n";
    return exit_code::kUsage;
  } catch (const std::exception& e) {
    err << "arveson: " << e.what() << "\n";
    return exit_code::kSoftware;
  }
  out << report.str();
  return code;
}

}  // namespace arveson
