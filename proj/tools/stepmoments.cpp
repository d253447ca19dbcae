// Command-line front end: moment evaluation, cone/manifold membership,
// nearest-point projection, population-history transforms, oracle fits,
// and CSV exports of the moment curves.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "stepmoments/coalescence.hpp"
#include "stepmoments/json_io.hpp"
#include "stepmoments/oracle.hpp"

namespace sm = stepmoments;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitOutside = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json read_json_file(const std::string& path) {
  if (path == "-") return json::parse(std::cin);
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open input file: " + path);
  return json::parse(in);
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw UsageError("cannot parse number: " + tok);
    }
  }
  if (out.empty()) throw UsageError("empty vector");
  return out;
}

std::vector<int> parse_ints(const std::string& csv) {
  std::vector<int> out;
  for (double v : parse_doubles(csv)) out.push_back(static_cast<int>(v));
  return out;
}

// Inline --point and file input are mutually exclusive by design: when both
// are given the call is rejected rather than silently preferring one.
std::vector<double> vector_input(const std::string& point, const std::string& in_path) {
  if (!point.empty() && !in_path.empty())
    throw UsageError("--point and --in are mutually exclusive; pass exactly one");
  if (!point.empty()) return parse_doubles(point);
  if (!in_path.empty()) {
    const json j = read_json_file(in_path);
    if (j.is_array()) return j.get<std::vector<double>>();
    if (j.contains("values")) return j.at("values").get<std::vector<double>>();
    throw UsageError("input file must hold a JSON array or an object with \"values\"");
  }
  throw UsageError("a vector is required (--point or --in)");
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

struct CommonOpts {
  std::uint64_t seed = 42;
  bool seed_explicit = false;
  int jobs = 1;
  std::string format = "json";
  double tol = 1e-7;
  int grid = 2001;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moments of step functions on [0,1], Hankel membership tests, "
               "coalescence-manifold projections and brute-force oracles"};
  app.require_subcommand(1);

  CommonOpts common;
  // The environment variable supplies the default; an explicit --seed wins.
  if (const char* env = std::getenv("STEPMOMENTS_SEED")) common.seed = std::strtoull(env, nullptr, 10);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "RNG seed (beats STEPMOMENTS_SEED)");
    sub->add_option("--jobs", common.jobs, "parallel multi-start workers");
    sub->add_option("--format", common.format, "output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--tol", common.tol, "feasibility tolerance for membership decisions");
    sub->add_option("--grid", common.grid, "grid size for the NNLS oracle");
  };

  // moments: StepFunction JSON -> MomentVector JSON
  auto* c_moments = app.add_subcommand("moments", "moments of a step function");
  std::string mo_in, mo_A;
  c_moments->add_option("--in", mo_in, "StepFunction JSON file (- for stdin)")->required();
  c_moments->add_option("--A", mo_A, "exponent set, comma separated")->required();
  add_common(c_moments);

  // membership
  auto* c_member = app.add_subcommand("membership", "cone / manifold membership via SDP");
  std::string me_point, me_in, me_A;
  int me_n = 0;
  bool me_oracle = false;
  c_member->add_option("--point", me_point, "vector, comma separated");
  c_member->add_option("--in", me_in, "vector JSON file");
  c_member->add_option("--A", me_A, "exponent set");
  c_member->add_option("--n", me_n, "sample size (coalescence manifold C_{n,k})");
  c_member->add_flag("--oracle-check", me_oracle, "also run the grid NNLS oracle");
  add_common(c_member);

  // nearest
  auto* c_near = app.add_subcommand("nearest", "nearest point on the coalescence manifold");
  std::string ne_point, ne_in;
  int ne_n = 0;
  c_near->add_option("--point", ne_point, "vector, comma separated");
  c_near->add_option("--in", ne_in, "vector JSON file");
  c_near->add_option("--n", ne_n, "sample size")->required();
  add_common(c_near);

  // coalesce
  auto* c_coal = app.add_subcommand("coalesce", "coalescence vector of a population history");
  std::string co_in;
  int co_n = 0;
  bool co_norm = false;
  c_coal->add_option("--in", co_in, "PopulationHistory JSON file")->required();
  c_coal->add_option("--n", co_n, "sample size")->required();
  c_coal->add_flag("--normalize", co_norm, "normalize to coordinate sum 1");
  add_common(c_coal);

  // invert
  auto* c_inv = app.add_subcommand("invert", "unit-interval step density -> population history");
  std::string iv_in;
  c_inv->add_option("--in", iv_in, "StepFunction JSON file")->required();
  add_common(c_inv);

  // fit
  auto* c_fit = app.add_subcommand("fit", "best step-function fit of a moment vector");
  std::string fi_point, fi_in, fi_A, fi_mono;
  int fi_k = 0;
  c_fit->add_option("--point", fi_point, "vector, comma separated");
  c_fit->add_option("--in", fi_in, "vector JSON file");
  c_fit->add_option("--A", fi_A, "exponent set")->required();
  c_fit->add_option("--k", fi_k, "breakpoint budget")->required();
  c_fit->add_option("--monotone", fi_mono, "height ordering")->check(CLI::IsMember({"up", "down"}));
  add_common(c_fit);

  // emit-curve
  auto* c_curve = app.add_subcommand("emit-curve", "CSV samples of the moment curves");
  std::string cu_A, cu_curve = "v";
  int cu_samples = 101;
  c_curve->add_option("--A", cu_A, "exponent set")->required();
  c_curve->add_option("--curve", cu_curve, "curve family")->check(CLI::IsMember({"v", "up", "down"}));
  c_curve->add_option("--samples", cu_samples, "number of samples");
  add_common(c_curve);

  // theorems
  auto* c_thm = app.add_subcommand("theorems", "randomized breakpoint-budget experiments");
  std::string th_A;
  int th_trials = 50;
  c_thm->add_option("--A", th_A, "exponent set")->required();
  c_thm->add_option("--trials", th_trials, "trials per theorem");
  add_common(c_thm);

  // fiber
  auto* c_fiber = app.add_subcommand("fiber", "sample the fiber of the moment map");
  std::string fb_point, fb_in, fb_A;
  int fb_k = 2, fb_count = 20;
  c_fiber->add_option("--point", fb_point, "vector, comma separated");
  c_fiber->add_option("--in", fb_in, "vector JSON file");
  c_fiber->add_option("--A", fb_A, "exponent set")->required();
  c_fiber->add_option("--k", fb_k, "breakpoint budget")->required();
  c_fiber->add_option("--count", fb_count, "maximum fiber points");
  add_common(c_fiber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kExitUsage : 0;
  }

  try {
    sm::sdp::SolverOptions sopts;
    sopts.feas_tol = common.tol;
    sm::oracle::FitOptions fopts;
    fopts.seed = common.seed;
    fopts.jobs = common.jobs;

    if (*c_moments) {
      const sm::StepFunction f = sm::io::step_from_json(read_json_file(mo_in));
      const sm::ExponentSet A(parse_ints(mo_A));
      const sm::MomentVector m = sm::moments_of_step(f, A);
      if (common.format == "csv") {
        std::string header, row;
        for (int i = 0; i < A.size(); ++i) {
          if (i) {
            header += ',';
            row += ',';
          }
          header += "m" + std::to_string(A.exponents()[i]);
          row += fmt17(m.values[i]);
        }
        std::cout << header << "\n" << row << "\n";
      } else {
        emit(sm::io::to_json(m));
      }
      return 0;
    }

    if (*c_member) {
      const std::vector<double> v = vector_input(me_point, me_in);
      if (me_A.empty() == (me_n == 0))
        throw UsageError("membership needs exactly one of --A or --n");
      sm::MembershipResult res;
      json out;
      if (me_n > 0) {
        res = sm::manifold_membership(v, me_n, sopts);
      } else {
        const sm::ExponentSet A(parse_ints(me_A));
        if (static_cast<int>(v.size()) != A.size())
          throw UsageError("vector length must match |A|");
        res = sm::sdp::projected_membership(sm::MomentVector(A, v), sopts);
      }
      out = sm::io::to_json(res);
      if (me_oracle) {
        const sm::ExponentSet A =
            (me_n > 0) ? sm::coalescence_exponents(me_n) : sm::ExponentSet(parse_ints(me_A));
        out["oracle"] =
            sm::io::to_json(sm::oracle::grid_membership(sm::MomentVector(A, v), common.grid, me_n > 0));
      }
      emit(out);
      return res.decision == sm::Membership::outside ? kExitOutside : 0;
    }

    if (*c_near) {
      const std::vector<double> v = vector_input(ne_point, ne_in);
      sm::WitnessOptions wopts;
      wopts.seed = common.seed;
      wopts.jobs = common.jobs;
      const sm::ManifoldNearestResult res = sm::manifold_nearest(v, ne_n, sopts, wopts);
      emit(sm::io::to_json(res));
      return 0;
    }

    if (*c_coal) {
      const sm::PopulationHistory eta = sm::io::history_from_json(read_json_file(co_in));
      sm::CoalescenceVector c = sm::coalescence_vector(eta, co_n);
      if (co_norm) c = sm::normalize(c);
      emit(sm::io::to_json(c));
      return 0;
    }

    if (*c_inv) {
      const sm::StepFunction f = sm::io::step_from_json(read_json_file(iv_in));
      emit(sm::io::to_json(sm::from_unit_step(f)));
      return 0;
    }

    if (*c_fit) {
      const std::vector<double> v = vector_input(fi_point, fi_in);
      const sm::ExponentSet A(parse_ints(fi_A));
      if (static_cast<int>(v.size()) != A.size()) throw UsageError("vector length must match |A|");
      sm::Monotone mode = sm::Monotone::none;
      if (fi_mono == "up") mode = sm::Monotone::up;
      if (fi_mono == "down") mode = sm::Monotone::down;
      emit(sm::io::to_json(sm::oracle::best_fit_step(sm::MomentVector(A, v), fi_k, mode, fopts)));
      return 0;
    }

    if (*c_curve) {
      const sm::ExponentSet A(parse_ints(cu_A));
      if (cu_samples < 2) throw UsageError("--samples must be >= 2");
      std::string header = "t";
      for (int a : A.exponents()) header += ",m" + std::to_string(a);
      std::cout << header << "\n";
      for (int i = 0; i < cu_samples; ++i) {
        const double t = static_cast<double>(i) / (cu_samples - 1);
        sm::MomentVector m = (cu_curve == "up")   ? sm::gamma_up(t, A)
                             : (cu_curve == "down") ? sm::gamma_down(t, A)
                                                    : sm::moment_curve(t, A);
        std::string row = fmt17(t);
        for (double x : m.values) row += "," + fmt17(x);
        std::cout << row << "\n";
      }
      return 0;
    }

    if (*c_thm) {
      const sm::ExponentSet A(parse_ints(th_A));
      emit(sm::io::to_json(sm::oracle::theorem_suite(A, th_trials, fopts)));
      return 0;
    }

    if (*c_fiber) {
      const std::vector<double> v = vector_input(fb_point, fb_in);
      const sm::ExponentSet A(parse_ints(fb_A));
      if (static_cast<int>(v.size()) != A.size()) throw UsageError("vector length must match |A|");
      const auto points = sm::oracle::fiber_sample(sm::MomentVector(A, v), fb_k, fb_count, fopts);
      std::string header;
      for (int i = 1; i <= fb_k; ++i) header += (i > 1 ? "," : "") + std::string("s") + std::to_string(i);
      for (int i = 1; i <= fb_k + 1; ++i) header += std::string(fb_k || i > 1 ? "," : "") + "w" + std::to_string(i);
      std::cout << header << "\n";
      for (const auto& p : points) {
        std::string row;
        for (int i = 0; i < fb_k; ++i) row += (i ? "," : "") + fmt17(p.s[i]);
        for (int i = 0; i <= fb_k; ++i) row += std::string(fb_k || i ? "," : "") + fmt17(p.w[i]);
        std::cout << row << "\n";
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return kExitNumerical;
  }
  return 0;
}
