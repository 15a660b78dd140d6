// codedmm: plan, analyze, and simulate coded distributed matrix
// multiplication jobs.
//
// Exit codes: 0 ok, 1 bad input, 2 a --check or plan verification failed,
// 3 an internal invariant broke.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "codedmm/analysis.hpp"
#include "codedmm/errors.hpp"
#include "codedmm/plan.hpp"
#include "codedmm/sim.hpp"
#include "codedmm/stragglers.hpp"

using namespace codedmm;

namespace {

// a --check comparison came out wrong; maps to exit code 2
struct CheckMismatch {
  std::string message;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw CheckMismatch{what};
}

std::string format_rat(const Rat& r, bool rational, int digits = 12) {
  return rational ? fraction_string(r) : decimal_string(r, digits);
}

std::string format_double(double v, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Presets: the two single-point examples, the worked six server example, and
// the two whole-curve setups.

struct Preset {
  std::string name;
  SchemeParams params;  // q/m/n zero for curve-only presets
  Rat mu_n;             // latency scale
  bool has_instance = false;
};

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = [] {
    std::vector<Preset> v;
    {
      Preset p{"min-bandwidth-example", {}, Rat(2), true};
      p.params.K = 4; p.params.q = 4; p.params.mu = Rat(1, 2);
      p.params.m = 12; p.params.n = 4; p.params.N = 4;
      v.push_back(p);
    }
    {
      Preset p{"min-latency-example", {}, Rat(2), true};
      p.params.K = 4; p.params.q = 2; p.params.mu = Rat(1, 2);
      p.params.m = 12; p.params.n = 4; p.params.N = 4;
      v.push_back(p);
    }
    {
      Preset p{"sec4-example", {}, Rat(6), true};
      p.params.K = 6; p.params.q = 4; p.params.mu = Rat(1, 2);
      p.params.m = 20; p.params.n = 4; p.params.N = 12;
      v.push_back(p);
    }
    {
      Preset p{"fig1", {}, Rat(420), false};
      p.params.K = 14; p.params.mu = Rat(1, 2); p.params.N = 840;
      v.push_back(p);
    }
    {
      Preset p{"fig3", {}, Rat(60), false};
      p.params.K = 18; p.params.mu = Rat(1, 3); p.params.N = 180;
      v.push_back(p);
    }
    return v;
  }();
  return all;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  std::string known;
  for (const auto& p : presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw ValidationError("unknown preset '" + name + "' (known: " + known + ")");
}

// ---------------------------------------------------------------------------
// Shared option plumbing.

struct Args {
  int K = 0;
  int q = 0;
  std::string mu;
  long m = 0;
  long n = 0;
  long N = 0;
  unsigned w = 8;
  std::string latency = "shifted-exp";
  std::uint64_t seed = 1;
  long trials = 1;
  std::string format = "csv";
  bool rational = false;
  bool do_check = false;
  std::string preset;
  std::string transcript;
  bool no_verify = false;
  bool random_mds = false;
  std::uint64_t mds_seed = 0;
  std::string out;
  std::string plan_file;
  long sample = 1000;
  long cap = 10000;
};

void add_curve_options(CLI::App* cmd, Args& a) {
  cmd->add_option("--K", a.K, "number of servers");
  cmd->add_option("--mu", a.mu, "storage fraction, exact ('1/3') or decimal");
  cmd->add_option("--N", a.N, "number of input vectors");
  cmd->add_option("--latency", a.latency,
                  "latency model: shifted-exp[:muN=<x>] or table:<file>");
  cmd->add_option("--format", a.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--rational", a.rational, "print exact fractions instead of decimals");
  cmd->add_option("--preset", a.preset, "named configuration bundle");
  cmd->add_flag("--check", a.do_check, "verify the preset's expected numbers; exit 2 on mismatch");
}

void add_instance_options(CLI::App* cmd, Args& a) {
  cmd->add_option("--K", a.K, "number of servers");
  cmd->add_option("--q", a.q, "quorum size");
  cmd->add_option("--mu", a.mu, "storage fraction, exact ('1/3') or decimal");
  cmd->add_option("--m", a.m, "rows of the data matrix");
  cmd->add_option("--n", a.n, "columns of the data matrix");
  cmd->add_option("--N", a.N, "number of input vectors");
  cmd->add_option("--w", a.w, "field width, 8 or 16")->check(CLI::IsMember({8u, 16u}));
}

// resolves --preset/--K style flags into (K, mu, N, scale) for curve verbs
struct CurveSetup {
  int K;
  Rat mu;
  long N;
  LatencyModel model;
  std::string preset;
};

CurveSetup curve_setup(const Args& a) {
  CurveSetup s;
  if (!a.preset.empty()) {
    const auto& p = find_preset(a.preset);
    s.K = p.params.K;
    s.mu = p.params.mu;
    s.N = p.params.N;
    s.model = LatencyModel::parse(a.latency, p.mu_n);
    s.preset = p.name;
    return s;
  }
  if (a.K == 0 || a.mu.empty() || a.N == 0)
    throw ValidationError("tradeoff and bound need --K, --mu and --N (or a --preset)");
  s.K = a.K;
  s.mu = parse_ratio(a.mu);
  s.N = a.N;
  s.model = LatencyModel::parse(a.latency, s.mu * s.N);
  return s;
}

SchemeParams instance_params(const Args& a) {
  if (!a.preset.empty()) {
    const auto& p = find_preset(a.preset);
    if (!p.has_instance)
      throw ValidationError("preset '" + p.name +
                            "' describes a whole curve; it has no single instance to run");
    return p.params;
  }
  SchemeParams p;
  p.K = a.K;
  p.q = a.q;
  if (a.mu.empty()) throw ValidationError("--mu is required");
  p.mu = parse_ratio(a.mu);
  p.m = a.m;
  p.n = a.n;
  p.N = a.N;
  p.w = a.w;
  return p;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw ValidationError("cannot write to " + path);
  return file;
}

// ---------------------------------------------------------------------------
// tradeoff: the full latency/load table with per point and curve level gaps.

void fig3_checks(const TradeoffCurve& curve, const std::vector<GapEntry>& gaps) {
  check(gaps.front().ratio == Rat(4, 3), "gap at q=3 is not 4/3");
  check(gaps.back().ratio == Rat(8, 3), "gap at q=18 is not 8/3");
  check(max_envelope_gap(gaps) <= Rat(21, 5), "time shared gap above 4.2");
  const double e120 = curve.envelope_load(120.0);
  const double e240 = curve.envelope_load(240.0);
  check(e120 > 42.0 && e120 < 44.0, "envelope load at D=120 outside [42, 44]");
  check(e240 > 22.0 && e240 < 24.0, "envelope load at D=240 outside [22, 24]");
  const double ratio = e120 / e240;
  check(ratio > 1.82 && ratio < 1.92, "envelope load ratio outside 1.87 +/- 0.05");
}

void fig1_checks(const TradeoffCurve& curve) {
  check(curve.points.front().q == 2, "curve does not start at q=2");
  check(curve.points.front().load == Rat(420), "load at q=2 is not 420");
  check(curve.points.back().load == Rat(60), "load at q=14 is not 60");
}

void run_tradeoff(const Args& a) {
  const auto s = curve_setup(a);
  const auto curve = tradeoff_curve(s.K, s.mu, s.N, s.model);
  const auto gaps = gap_report(s.K, s.mu, s.N);

  if (a.format == "json") {
    nlohmann::json j;
    j["K"] = s.K;
    j["mu"] = fraction_string(s.mu);
    j["N"] = s.N;
    j["points"] = nlohmann::json::array();
    for (size_t i = 0; i < curve.points.size(); ++i) {
      const auto& pt = curve.points[i];
      nlohmann::json row;
      row["q"] = pt.q;
      row["D"] = pt.latency;
      if (pt.latency_is_exact) row["D_exact"] = fraction_string(pt.latency_exact);
      row["L_ach"] = fraction_string(pt.load);
      row["L_lb"] = fraction_string(pt.load_lower_bound);
      if (pt.gap_defined) row["gap"] = fraction_string(pt.gap);
      if (gaps[i].envelope_defined)
        row["envelope_gap"] = fraction_string(gaps[i].envelope_ratio);
      j["points"].push_back(std::move(row));
    }
    auto hull_qs = [&](const std::vector<int>& hull) {
      std::vector<int> qs;
      for (int idx : hull) qs.push_back(curve.points[(size_t)idx].q);
      return qs;
    };
    j["achievable_hull"] = hull_qs(curve.achievable_hull);
    j["lower_bound_hull"] = hull_qs(curve.lower_bound_hull);
    j["max_gap"] = fraction_string(max_gap(gaps));
    j["max_envelope_gap"] = fraction_string(max_envelope_gap(gaps));
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "q,D,L_ach,L_lb,gap\n";
    for (const auto& pt : curve.points) {
      std::cout << pt.q << ',';
      if (pt.latency_is_exact && a.rational)
        std::cout << fraction_string(pt.latency_exact);
      else
        std::cout << format_double(pt.latency);
      std::cout << ',' << format_rat(pt.load, a.rational) << ','
                << format_rat(pt.load_lower_bound, a.rational) << ',';
      if (pt.gap_defined) std::cout << format_rat(pt.gap, a.rational);
      std::cout << '\n';
    }
    std::cerr << "max gap: " << format_rat(max_gap(gaps), a.rational)
              << " pointwise, " << format_rat(max_envelope_gap(gaps), a.rational)
              << " with time sharing\n";
  }

  if (a.do_check) {
    if (s.preset == "fig3") fig3_checks(curve, gaps);
    else if (s.preset == "fig1") fig1_checks(curve);
    else throw ValidationError("--check needs a preset with expected numbers");
  }
}

// ---------------------------------------------------------------------------
// bound: converse values only.

void run_bound(const Args& a, int q_flag) {
  const auto s = curve_setup(a);
  std::vector<std::pair<int, Rat>> rows;
  if (q_flag > 0) {
    rows.emplace_back(q_flag, lower_bound_load(s.K, q_flag, s.mu, s.N));
  } else {
    const auto curve = tradeoff_curve(s.K, s.mu, s.N, s.model);
    for (const auto& pt : curve.points) rows.emplace_back(pt.q, pt.load_lower_bound);
  }
  if (a.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [q, lb] : rows)
      j.push_back({{"q", q}, {"L_lb", fraction_string(lb)}});
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "q,L_lb\n";
    for (const auto& [q, lb] : rows)
      std::cout << q << ',' << format_rat(lb, a.rational) << '\n';
  }
}

// ---------------------------------------------------------------------------
// simulate: end to end trials, JSON report, optional transcript export.

void simulate_checks(const std::string& preset, const SimReport& report,
                     const LatencyModel& model, const SchemeParams& p) {
  const Rat d = expected_wait_exact(model, p.K, p.q);
  if (preset == "min-bandwidth-example") {
    check(d == Rat(37, 6), "expected wait is not 37/6");
    check(report.load == Rat(1), "load is not 1");
    check(report.coded_symbols == 12 && report.uncoded_symbols == 0,
          "symbol counts are not 12 coded + 0 uncoded");
  } else if (preset == "min-latency-example") {
    check(d == Rat(19, 6), "expected wait is not 19/6");
    check(report.load == Rat(2), "load is not 2");
  } else if (preset == "sec4-example") {
    check(d == Rat(117, 10), "expected wait is not 117/10");
    check(report.load == Rat(21, 5), "load is not 21/5");
    check(report.coded_symbols == 36 && report.uncoded_symbols == 48,
          "symbol counts are not 36 coded + 48 uncoded");
  } else {
    throw ValidationError("--check needs a preset with expected numbers");
  }
  check(report.load_matches_analysis, "measured load differs from the closed form");
  if (!report.trials.empty() && report.trials.front().verified)
    check(report.all_verified, "not every output decoded correctly");
}

void run_simulate(const Args& a) {
  SimConfig config;
  config.params = instance_params(a);
  config.params.validate();
  const Rat default_scale = !a.preset.empty() ? find_preset(a.preset).mu_n
                                              : config.params.mu * config.params.N;
  config.model = LatencyModel::parse(a.latency, default_scale);
  config.seed = a.seed;
  config.trials = a.trials;
  config.verify = !a.no_verify;
  if (a.random_mds) {
    config.mds = MdsKind::random;
    config.mds_seed = a.mds_seed;
  }

  const auto report = run_simulation(config);
  std::cout << report.to_json().dump(2) << "\n";

  if (!a.transcript.empty()) {
    const auto single = run_single(config);
    std::ofstream file(a.transcript);
    if (!file) throw ValidationError("cannot write to " + a.transcript);
    write_transcript_jsonl(file, single.transcript,
                           single.payload_hashes.empty() ? nullptr
                                                         : &single.payload_hashes);
  }

  if (a.do_check)
    simulate_checks(a.preset, report, config.model, config.params);
}

// ---------------------------------------------------------------------------
// plan / verify-plan: storage design as a JSON artifact and its audit.

void run_plan(const Args& a) {
  const auto p = instance_params(a);
  p.validate();
  const StoragePlan plan =
      a.random_mds ? build_random_plan(p, a.mds_seed) : build_plan(p);
  std::ofstream file;
  open_out(file, a.out) << plan.to_json().dump(2) << "\n";
}

void run_verify_plan(const Args& a) {
  std::ifstream file(a.plan_file);
  if (!file) throw ValidationError("cannot read " + a.plan_file);
  nlohmann::json j;
  try {
    file >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(a.plan_file + " is not valid JSON: " + e.what());
  }
  const auto plan = StoragePlan::from_json(j);
  const auto report = verify_decodability(plan, a.cap, a.sample, a.seed);

  nlohmann::json out;
  out["pass"] = report.pass;
  out["exhaustive"] = report.exhaustive;
  out["subsets_checked"] = report.subsets_checked;
  if (!report.pass) {
    out["witness"] = report.witness;
    out["reason"] = report.reason;
  }
  std::cout << out.dump(2) << "\n";
  if (!report.pass)
    throw CheckMismatch{"plan is not decodable: " + report.reason};
}

// ---------------------------------------------------------------------------
// example: reproduce a named configuration and show its numbers.

void run_example(const Args& a) {
  if (a.preset.empty()) throw ValidationError("example needs --preset");
  const auto& p = find_preset(a.preset);

  if (!p.has_instance) {
    const auto model = LatencyModel::parse(a.latency, p.mu_n);
    const auto curve = tradeoff_curve(p.params.K, p.params.mu, p.params.N, model);
    const auto gaps = gap_report(p.params.K, p.params.mu, p.params.N);
    std::cout << p.name << ": K=" << p.params.K
              << " mu=" << fraction_string(p.params.mu) << " N=" << p.params.N
              << "\n";
    std::cout << "  load at q=" << curve.points.front().q << ": "
              << format_rat(curve.points.front().load, a.rational) << "\n";
    std::cout << "  load at q=" << curve.points.back().q << ": "
              << format_rat(curve.points.back().load, a.rational) << "\n";
    std::cout << "  max gap with time sharing: "
              << format_rat(max_envelope_gap(gaps), a.rational) << "\n";
    if (p.name == "fig3") {
      std::cout << "  envelope load at D=120: "
                << format_double(curve.envelope_load(120.0), 8) << "\n";
      std::cout << "  envelope load at D=240: "
                << format_double(curve.envelope_load(240.0), 8) << "\n";
    }
    if (a.do_check) {
      if (p.name == "fig3") fig3_checks(curve, gaps);
      else fig1_checks(curve);
    }
    return;
  }

  SimConfig config;
  config.params = p.params;
  config.model = LatencyModel::parse(a.latency, p.mu_n);
  config.seed = a.seed;
  config.trials = 1;
  const auto report = run_simulation(config);
  const Rat d = expected_wait_exact(config.model, p.params.K, p.params.q);

  std::cout << p.name << ": K=" << p.params.K << " q=" << p.params.q
            << " mu=" << fraction_string(p.params.mu) << " m=" << p.params.m
            << " n=" << p.params.n << " N=" << p.params.N << "\n";
  std::cout << "  expected wait D = " << fraction_string(d) << " ("
            << decimal_string(d, 6) << ")\n";
  std::cout << "  communication load L = " << fraction_string(report.load)
            << " (" << decimal_string(report.load, 6) << "), "
            << report.coded_symbols << " coded + " << report.uncoded_symbols
            << " uncoded symbols\n";
  std::cout << "  decoded outputs verified: "
            << (report.all_verified ? "yes" : "no") << "\n";

  if (a.do_check) simulate_checks(p.name, report, config.model, config.params);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coded distributed matrix multiplication: planning, analysis, simulation"};
  app.require_subcommand(1);

  Args args;
  int bound_q = 0;

  auto* tradeoff = app.add_subcommand(
      "tradeoff", "latency/load table with gap columns for one setup");
  add_curve_options(tradeoff, args);

  auto* bound = app.add_subcommand("bound", "converse load bound by quorum size");
  add_curve_options(bound, args);
  bound->add_option("--q", bound_q, "single quorum size instead of the full range");

  auto* simulate = app.add_subcommand(
      "simulate", "run seeded end to end trials and print a JSON report");
  add_instance_options(simulate, args);
  simulate->add_option("--latency", args.latency,
                       "latency model: shifted-exp[:muN=<x>] or table:<file>");
  simulate->add_option("--seed", args.seed, "trial RNG seed");
  simulate->add_option("--trials", args.trials, "number of trials");
  simulate->add_option("--preset", args.preset, "named configuration bundle");
  simulate->add_flag("--check", args.do_check, "verify the preset's expected numbers");
  simulate->add_flag("--no-verify", args.no_verify, "skip payload execution and decoding");
  simulate->add_flag("--random-mds", args.random_mds,
                     "use a seeded random generator matrix instead of Vandermonde");
  simulate->add_option("--mds-seed", args.mds_seed, "seed for --random-mds");
  simulate->add_option("--transcript", args.transcript,
                       "write the first trial's messages as JSON lines");

  auto* plan = app.add_subcommand("plan", "write a storage plan as JSON");
  add_instance_options(plan, args);
  plan->add_flag("--random-mds", args.random_mds,
                 "use a seeded random generator matrix instead of Vandermonde");
  plan->add_option("--mds-seed", args.mds_seed, "seed for --random-mds");
  plan->add_option("--out", args.out, "output path (default stdout)");

  auto* verify_plan = app.add_subcommand(
      "verify-plan", "check that every quorum of a stored plan can decode");
  verify_plan->add_option("plan", args.plan_file, "plan JSON file")->required();
  verify_plan->add_option("--sample", args.sample,
                          "random quorums to draw when exhaustion is too big");
  verify_plan->add_option("--cap", args.cap,
                          "largest quorum count still checked exhaustively");
  verify_plan->add_option("--seed", args.seed, "sampling seed");

  auto* example = app.add_subcommand("example", "reproduce a named example");
  example->add_option("--preset", args.preset, "named configuration bundle")->required();
  example->add_option("--latency", args.latency, "latency model override");
  example->add_option("--seed", args.seed, "trial RNG seed");
  example->add_flag("--check", args.do_check, "verify expected numbers; exit 2 on mismatch");
  example->add_flag("--rational", args.rational, "print exact fractions");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : 1;
    }
    if (tradeoff->parsed()) run_tradeoff(args);
    else if (bound->parsed()) run_bound(args, bound_q);
    else if (simulate->parsed()) run_simulate(args);
    else if (plan->parsed()) run_plan(args);
    else if (verify_plan->parsed()) run_verify_plan(args);
    else if (example->parsed()) run_example(args);
  } catch (const SingularMatrix& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CheckMismatch& e) {
    std::cerr << "check failed: " << e.message << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
