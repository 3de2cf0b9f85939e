// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tandem/experiment.hpp"

using namespace tandem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;  // 0: no limit
  std::function<Outcome()> body;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

RunReport run_json(const json& doc) { return run(ExperimentSpec::from_json(doc)); }

const CheckResult& need(const RunReport& r, const std::string& name) {
  const CheckResult* c = r.find(name);
  if (!c) throw std::runtime_error("report has no check " + name);
  return *c;
}

std::string describe(const CheckResult& c) {
  std::ostringstream s;
  s << c.name << "=" << fmt("%.4g", c.statistic) << (c.pass ? "" : "(!)");
  return s.str();
}

// Every check named must pass.
Outcome all_of(const RunReport& r, const std::vector<std::string>& names, std::string prefix = "") {
  Outcome o{true, std::move(prefix)};
  for (const auto& n : names) {
    const auto& c = need(r, n);
    o.pass = o.pass && c.pass;
    if (!o.detail.empty()) o.detail += " ";
    o.detail += describe(c);
  }
  return o;
}

Outcome merge(Outcome a, const Outcome& b) {
  a.pass = a.pass && b.pass;
  a.detail += "; " + b.detail;
  return a;
}

Outcome fixed_point() {
  const auto r = run_json({{"kind", "solve-m"}, {"rho", 0.9}, {"grid_points", 512}});
  const Table* t = r.table("solve_m");
  const double lambda = 0.9 / 3.0;
  double worst = 0.0;
  const auto w = t->column("w");
  const auto m = t->column("m");
  for (std::size_t i = 0; i < w.size(); ++i) {
    // residual of m = int_b^w exp(-lambda (1 - m) t) dF(t), computed outside the library
    const double rhs = oracle::pareto_exp_integral(lambda * (1.0 - m[i]), 1.5, 1.0, w[i]);
    worst = std::max(worst, std::fabs(rhs - m[i]));
  }
  return {w.size() == 512 && worst <= 1e-10 && need(r, "residual").pass,
          "points=" + std::to_string(w.size()) + " independent_residual=" + fmt("%.3g", worst) +
              " library_residual=" + fmt("%.3g", need(r, "residual").statistic)};
}

Outcome max_law() {
  const auto r = run_json({{"kind", "simulate-des"}, {"rho", 0.9}, {"busy_periods", 1000000}, {"seed", 20240601}});
  return all_of(r, {"max_law_ks"}, "busy_periods=1e6 tol=0.005");
}

Outcome recursion() {
  const auto r = run_json({{"kind", "simulate-des"},
                           {"rho", 0.9},
                           {"busy_periods", 10000},
                           {"keep_events", true},
                           {"seed", 20240601}});
  const auto& c = need(r, "recursion");
  return {c.pass, "event engine, checked=" + c.detail["checked"].dump() +
                      " violations=" + fmt("%.0f", c.statistic) +
                      " max_rel_error=" + fmt("%.3g", c.detail["max_rel_error"].get<double>())};
}

Outcome steady_state() {
  const auto r = run_json({{"kind", "steady-state"}, {"rho", 0.9}, {"gamma", 0.5}, {"steps", 1000000}, {"seed", 3}});
  const auto& c = need(r, "chain_ks");
  const Table* t = r.table("steady_state");
  double gap = 0.0, at = 0.0;
  for (std::size_t i = 0; i < t->rows(); ++i) {
    const double d = std::fabs(t->at(i, 1) - t->at(i, 2));
    if (d > gap) gap = d, at = t->at(i, 0);
  }
  return {c.pass, "steps=1e6 tol=0.01 " + describe(c) + " " + describe(need(r, "split_half_ks")) +
                      " largest_gap_at_w=" + fmt("%.4g", at) +
                      " (heavy-tailed excursions; see README)"};
}

Outcome kappa_solver() {
  const auto flat = run_json({{"kind", "solve-kappa"}, {"gamma", 0.0}});
  const auto drift = run_json({{"kind", "solve-kappa"}, {"gamma", 0.5}});
  return merge(all_of(flat, {"residual", "upper_bound", "positive", "unique_root", "constant"}, "gamma=0:"),
               all_of(drift, {"residual", "upper_bound", "positive", "unique_root", "regular_variation"},
                      "gamma=0.5:"));
}

Outcome scaled_maxima() {
  Outcome o{true, ""};
  for (double gamma : {0.0, 0.5}) {
    const auto r = run_json({{"kind", "theorem1"},
                             {"gamma", gamma},
                             {"n_grid", {100, 1000, 10000}},
                             {"y_grid", {0.5, 1, 2, 5}}});
    const auto part = all_of(r, {"decreasing", "final_rel_err", "scaled_bound", "positive"},
                             "gamma=" + fmt("%g", gamma) + ":");
    o = o.detail.empty() ? part : merge(o, part);
  }
  return o;
}

Outcome one_dimensional() {
  Outcome o{true, ""};
  for (double gamma : {0.0, 0.5}) {
    const auto r = run_json({{"kind", "theorem2"},
                             {"gamma", gamma},
                             {"n_grid", {100, 1000, 10000}},
                             {"t", 1},
                             {"x0", 0},
                             {"reps", 10000},
                             {"seed", 11}});
    const auto& fin = need(r, "ks_final");
    Outcome part = all_of(r, {"ks_decreasing", "ks_final"}, "gamma=" + fmt("%g", gamma) + ":");
    part.detail += " Phi(1,b/n)=" + fmt("%.4f", fin.detail["support_bound"].get<double>());
    o = o.detail.empty() ? part : merge(o, part);
  }
  o.detail += " (X_n(1) >= b/n, so KS >= Phi(1,b/n) at n=1e4)";
  return o;
}

json verify_doc(const std::vector<std::string>& checks) {
  return {{"kind", "verify"}, {"gamma", 0.5}, {"c", 2}, {"n_grid", {100, 1000, 10000}}, {"n", 1000},
          {"t", 1}, {"checks", checks}, {"seed", 5}};
}

Outcome max_convolution() {
  const auto r = run_json(verify_doc({"max-convolution"}));
  auto o = all_of(r, {"max_convolution_identity", "max_convolution_ks"});
  o.detail += " points=" + need(r, "max_convolution_identity").detail["points"].dump() + " draws=1e5";
  return o;
}

Outcome generator() {
  const auto r = run_json(verify_doc({"generator", "discrete-generator"}));
  return all_of(r, {"generator_decreasing", "generator_first_order", "discrete_generator_decreasing"},
                "h={0.1,0.05,0.025,0.0125} n={1e2,1e3,1e4}");
}

Outcome iterates() {
  const auto r = run_json(verify_doc({"iterates"}));
  return all_of(r, {"iterates_ks"}, "n=1e3 t=1 reps=1e4 tol=0.02");
}

// CSV bytes of a run written to disk.
std::vector<std::string> csv_bytes(ExperimentSpec spec, unsigned threads, const std::string& dir) {
  spec.threads = threads;
  std::filesystem::remove_all(dir);
  const auto paths = write_outputs(run(spec), dir);
  std::vector<std::string> out;
  for (const auto& p : paths) {
    if (std::filesystem::path(p).extension() != ".csv") continue;
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out.push_back(p.substr(dir.size()) + "\n" + ss.str());
  }
  std::filesystem::remove_all(dir);
  return out;
}

Outcome determinism() {
  const std::vector<json> docs = {
      {{"kind", "simulate-des"}, {"rho", 0.9}, {"busy_periods", 100000}, {"seed", 4}},
      {{"kind", "simulate-chain"}, {"gamma", 0.5}, {"profile", "fast"}, {"seed", 4}},
      {{"kind", "theorem2"}, {"gamma", 0.5}, {"n_grid", {100, 1000}}, {"reps", 2000}, {"seed", 4}},
      {{"kind", "steady-state"}, {"rho", 0.9}, {"gamma", 0.5}, {"steps", 200000}, {"seed", 4}},
      {{"kind", "verify"}, {"gamma", 0.5}, {"profile", "fast"}, {"checks", {"iterates", "max-convolution"}}, {"seed", 4}},
  };
  const auto base = (std::filesystem::temp_directory_path() / "tandem_determinism").string();
  std::size_t files = 0;
  std::string mismatch;
  for (const auto& d : docs) {
    const auto spec = ExperimentSpec::from_json(d);
    const auto ref = csv_bytes(spec, 1, base + "_a");
    files += ref.size();
    for (unsigned threads : {1u, 2u, 4u}) {
      if (csv_bytes(spec, threads, base + "_b") != ref)
        mismatch += " " + to_string(spec.kind) + "@" + std::to_string(threads);
    }
  }
  return {mismatch.empty(), "kinds=5 threads={1,2,4} csv_files=" + std::to_string(files) +
                                (mismatch.empty() ? " identical" : " differ:" + mismatch)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "fixed-point validity of m", 30, fixed_point},
      {2, "simulated busy-period maxima against m", 300, max_law},
      {3, "pathwise recursion for R_n", 60, recursion},
      {4, "long-run chain against the steady-state law", 120, steady_state},
      {5, "kappa solver", 30, kappa_solver},
      {6, "scaled busy-period maxima converge to kappa(y)/y", 60, scaled_maxima},
      {7, "one-dimensional convergence of X_n(1)", 600, one_dimensional},
      {8, "max-convolution identity", 120, max_convolution},
      {9, "generator convergence", 300, generator},
      {10, "iterate representation", 180, iterates},
      {11, "determinism across worker counts", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_seconds == 0 || secs <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("criterion %2d %s  %s | %s | %.1fs%s\n", c.id, pass ? "PASS" : "FAIL", c.title.c_str(),
                o.detail.c_str(), secs,
                c.limit_seconds ? (in_time ? fmt(" <= %gs", c.limit_seconds) : fmt(" > %gs limit", c.limit_seconds)).c_str() : "");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
