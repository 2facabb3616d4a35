// Copyright (c) mlgipm contributors
// SPDX-License-Identifier: Apache-2.0

#include "mlgipm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>
#include <utility>

#include "json.hpp"
#include "mlgipm/errors.hpp"
#include "mlgipm/matfun.hpp"
#include "mlgipm/stats.hpp"

namespace mlgipm::bench {

using diff::RowVector;
using lie::GroupTuple;
using matfun::Matrix;

namespace {

constexpr double kP1Eps2 = 1e-18;  // smoothing inside the exact-norm square root
constexpr int kResampleCap = 200;

double frob_inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

std::string fmt_g6(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fmt_pm(double mean, double sd) {
  if (std::isnan(mean)) return "n/a";
  return fmt_g6(mean) + "±" + fmt_g6(sd);
}

std::vector<std::string> header_cells() {
  return {"Time(s) Median",    "Time(s) Mean±SD", "Iterations Median",
          "Iterations Mean±SD", "Success Rate",   "Error Mean±SD"};
}

std::vector<std::string> data_cells(const SummaryStats& s) {
  return {fmt_g6(s.time_median),
          fmt_pm(s.time_mean, s.time_sd),
          fmt_g6(s.iterations_median),
          fmt_pm(s.iterations_mean, s.iterations_sd),
          fmt_g6(s.success_rate),
          fmt_pm(s.error_mean, s.error_sd)};
}

nlohmann::json config_json(const BenchmarkConfig& c) {
  nlohmann::json j;
  j["problem"] = to_string(c.problem);
  j["n"] = c.n;
  j["elements"] = c.elements;
  j["trials"] = c.trials;
  j["seed"] = c.base_seed;
  if (c.problem == Problem::P1) j["p1_norm"] = to_string(c.p1_norm);
  j["solver"] = {
      {"tolerance", c.solver.tolerance},
      {"tau", c.solver.tau},
      {"sigma", c.solver.sigma},
      {"mu0", c.solver.mu0},
      {"max_iterations", c.solver.max_iterations},
      {"perturb_c", c.solver.perturb_c},
      {"alpha_mode", c.solver.alpha_mode == solver::AlphaMode::FractionToBoundary
                         ? "ftb"
                         : "fixed:" + fmt_g6(c.solver.fixed_alpha)},
  };
  return j;
}

}  // namespace

std::string to_string(Problem p) { return p == Problem::P1 ? "p1" : "p2"; }
std::string to_string(P1Norm v) { return v == P1Norm::PaperExact ? "exact" : "squared"; }
std::string to_string(ReportFormat f) {
  switch (f) {
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Markdown: return "md";
    case ReportFormat::Json: return "json";
  }
  return "csv";
}

Problem parse_problem(std::string_view text) {
  if (text == "p1" || text == "P1") return Problem::P1;
  if (text == "p2" || text == "P2") return Problem::P2;
  throw DomainError("unknown problem '" + std::string(text) + "' (expected p1 or p2)");
}

P1Norm parse_p1_norm(std::string_view text) {
  if (text == "exact") return P1Norm::PaperExact;
  if (text == "squared") return P1Norm::Squared;
  throw DomainError("unknown p1 norm '" + std::string(text) + "' (expected exact or squared)");
}

ReportFormat parse_format(std::string_view text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "md" || text == "markdown") return ReportFormat::Markdown;
  if (text == "json") return ReportFormat::Json;
  throw DomainError("unknown format '" + std::string(text) + "' (expected csv, md, or json)");
}

ProblemInstance build_p1(int n, std::uint64_t seed, P1Norm variant, int elements) {
  if (n < 2) throw DomainError("build_p1: n must be >= 2");
  if (elements < 1) throw DomainError("build_p1: need at least one element");

  const lie::GroupKind kind = lie::so(n);
  const int m = kind.algebra_dim();
  const std::vector<Matrix> gens = lie::generators(kind);
  std::mt19937_64 seeder(seed);

  ProblemInstance inst;
  inst.target = lie::random_element(kind, seeder());
  const Matrix gd = inst.target.mat;

  inst.spec.kinds.assign(elements, kind);

  diff::ScalarField f;
  if (variant == P1Norm::PaperExact) {
    f.eval = [gd](const GroupTuple& x) {
      double acc = 0.0;
      for (const auto& g : x) {
        const Matrix l = matfun::logm(gd.transpose() * g.mat);
        acc += std::sqrt(l.squaredNorm() + kP1Eps2);
      }
      return 0.5 * acc;
    };
    f.analytic_gradient = [gd, gens, m](const GroupTuple& x) {
      RowVector row(m * static_cast<int>(x.size()));
      for (std::size_t e = 0; e < x.size(); ++e) {
        const Matrix l = matfun::logm(gd.transpose() * x[e].mat);
        const double phi = std::sqrt(l.squaredNorm() + kP1Eps2);
        for (int j = 0; j < m; ++j)
          row(static_cast<int>(e) * m + j) = frob_inner(l, gens[j]) / (2.0 * phi);
      }
      return row;
    };
  } else {
    f.eval = [gd](const GroupTuple& x) {
      double acc = 0.0;
      for (const auto& g : x) {
        const Matrix l = matfun::logm(gd.transpose() * g.mat);
        acc += l.squaredNorm();
      }
      return 0.5 * acc;
    };
    f.analytic_gradient = [gd, gens, m](const GroupTuple& x) {
      RowVector row(m * static_cast<int>(x.size()));
      for (std::size_t e = 0; e < x.size(); ++e) {
        const Matrix l = matfun::logm(gd.transpose() * x[e].mat);
        for (int j = 0; j < m; ++j)
          row(static_cast<int>(e) * m + j) = frob_inner(l, gens[j]);
      }
      return row;
    };
  }
  inst.spec.objective = std::move(f);

  const std::pair<int, double> entries[2] = {{0, 0.5}, {1, 0.3}};
  for (int e = 0; e < elements; ++e) {
    for (const auto& [idx, bound] : entries) {
      diff::ScalarField c;
      c.eval = [e, idx = idx, bound = bound](const GroupTuple& x) {
        return x[e].mat(idx, idx) - bound;
      };
      c.analytic_gradient = [e, idx = idx, gens, m](const GroupTuple& x) {
        RowVector row = RowVector::Zero(m * static_cast<int>(x.size()));
        for (int j = 0; j < m; ++j) row(e * m + j) = (x[e].mat * gens[j])(idx, idx);
        return row;
      };
      inst.spec.inequalities.components.push_back(std::move(c));
    }
  }

  for (int e = 0; e < elements; ++e) {
    bool found = false;
    for (int attempt = 0; attempt < kResampleCap && !found; ++attempt) {
      lie::GroupElement cand = lie::random_element(kind, seeder());
      if (cand.mat(0, 0) < 0.5 && cand.mat(1, 1) < 0.3) {
        inst.start.push_back(std::move(cand));
        found = true;
      }
    }
    if (!found)
      throw NumericalError("build_p1: no strictly feasible start within " +
                           std::to_string(kResampleCap) + " samples");
  }
  return inst;
}

ProblemInstance build_p2(int n, std::uint64_t seed, int elements) {
  if (n < 2) throw DomainError("build_p2: n must be >= 2");
  if (elements < 1) throw DomainError("build_p2: need at least one element");

  const lie::GroupKind kind = lie::sl(n);
  const int m = kind.algebra_dim();
  const std::vector<Matrix> gens = lie::generators(kind);
  std::mt19937_64 seeder(seed);

  ProblemInstance inst;
  inst.target = lie::random_element(kind, seeder());
  const Matrix gdinv = inst.target.mat.inverse();

  inst.spec.kinds.assign(elements, kind);

  diff::ScalarField f;
  f.eval = [gdinv](const GroupTuple& x) {
    double acc = 0.0;
    for (const auto& g : x) {
      const double t = (gdinv * g.mat).trace();
      acc += t * t;
    }
    return 0.5 * acc;
  };
  f.analytic_gradient = [gdinv, gens, m](const GroupTuple& x) {
    RowVector row(m * static_cast<int>(x.size()));
    for (std::size_t e = 0; e < x.size(); ++e) {
      const Matrix prod = gdinv * x[e].mat;
      const double t = prod.trace();
      for (int j = 0; j < m; ++j)
        row(static_cast<int>(e) * m + j) = t * (prod * gens[j]).trace();
    }
    return row;
  };
  inst.spec.objective = std::move(f);

  for (int e = 0; e < elements; ++e) {
    diff::ScalarField c;
    c.eval = [e, gdinv](const GroupTuple& x) {
      const double t = (gdinv * x[e].mat).trace();
      return 0.2 - t * t;
    };
    c.analytic_gradient = [e, gdinv, gens, m](const GroupTuple& x) {
      RowVector row = RowVector::Zero(m * static_cast<int>(x.size()));
      const Matrix prod = gdinv * x[e].mat;
      const double t = prod.trace();
      for (int j = 0; j < m; ++j) row(e * m + j) = -2.0 * t * (prod * gens[j]).trace();
      return row;
    };
    inst.spec.inequalities.components.push_back(std::move(c));
  }

  for (int e = 0; e < elements; ++e) {
    bool found = false;
    for (int attempt = 0; attempt < kResampleCap && !found; ++attempt) {
      lie::GroupElement cand = lie::random_element(kind, seeder());
      const double t = (gdinv * cand.mat).trace();
      if (t * t > 0.2) {
        inst.start.push_back(std::move(cand));
        found = true;
      }
    }
    if (!found)
      throw NumericalError("build_p2: no strictly feasible start within " +
                           std::to_string(kResampleCap) + " samples");
  }
  return inst;
}

ProblemInstance build_problem(const BenchmarkConfig& config, std::uint64_t seed) {
  return config.problem == Problem::P1
             ? build_p1(config.n, seed, config.p1_norm, config.elements)
             : build_p2(config.n, seed, config.elements);
}

TrialResult run_trial(const BenchmarkConfig& config, int index) {
  TrialResult tr;
  tr.seed = config.base_seed + static_cast<std::uint64_t>(index);

  solver::SolverOptions opts = config.solver;
  opts.perturb_seed = tr.seed;  // one reproducible rho stream per trial

  ProblemInstance inst;
  try {
    inst = build_problem(config, tr.seed);
  } catch (const std::exception& err) {
    tr.sampling_failure = true;
    tr.failure_reason = err.what();
    return tr;
  }

  const auto t0 = std::chrono::steady_clock::now();
  const solver::SolveReport rep = solver::solve(inst.spec, inst.start, opts);
  tr.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  tr.success = rep.converged();
  tr.status = rep.status;
  tr.iterations = rep.iterations;
  tr.final_error = rep.final_kkt_norm;
  tr.failure_reason = rep.failure_message;
  tr.order = solver::estimate_convergence_order(rep.trace);

  for (auto it = rep.trace.rbegin(); it != rep.trace.rend() && it->k > 0 && it->full_step; ++it)
    ++tr.trailing_full_steps;

  double min_res = std::numeric_limits<double>::infinity();
  for (const auto& rec : rep.trace) {
    tr.min_interior = std::min({tr.min_interior, rec.min_s, rec.min_nu});
    tr.max_membership_ratio = std::max(tr.max_membership_ratio, rec.max_membership_ratio);
    if (rec.k == 0) continue;
    tr.max_solve_rel_residual = std::max(tr.max_solve_rel_residual, rec.solve_rel_residual);
    min_res = std::min(min_res, rec.solve_rel_residual);
    if (rec.regularized)
      ++tr.regularized_steps;
    else
      tr.max_unregularized_rel_residual =
          std::max(tr.max_unregularized_rel_residual, rec.solve_rel_residual);
  }
  tr.min_solve_rel_residual = std::isfinite(min_res) ? min_res : 0.0;
  return tr;
}

BenchmarkRun run_benchmark(const BenchmarkConfig& config) {
  if (config.trials < 1) throw DomainError("run_benchmark: trials must be >= 1");
  if (config.n < 2) throw DomainError("run_benchmark: n must be >= 2");

  BenchmarkRun run;
  run.config = config;
  run.results.resize(config.trials);

  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, config.trials);

  if (threads == 1) {
    for (int i = 0; i < config.trials; ++i) run.results[i] = run_trial(config, i);
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (int i = next.fetch_add(1); i < config.trials; i = next.fetch_add(1))
        run.results[i] = run_trial(config, i);
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  run.stats = summarize(run.results);
  return run;
}

SummaryStats summarize(const std::vector<TrialResult>& results) {
  SummaryStats s;
  s.trials = static_cast<int>(results.size());
  std::vector<double> times, iters, errors;
  times.reserve(results.size());
  iters.reserve(results.size());
  for (const auto& r : results) {
    times.push_back(r.wall_time_s);
    iters.push_back(static_cast<double>(r.iterations));
    if (r.success) {
      ++s.successes;
      errors.push_back(r.final_error);
    }
  }
  s.success_rate = s.trials > 0 ? static_cast<double>(s.successes) / s.trials : 0.0;
  s.time_median = stats::median(times);
  s.time_mean = stats::mean(times);
  s.time_sd = stats::sample_sd(times);
  s.iterations_median = stats::median(iters);
  s.iterations_mean = stats::mean(iters);
  s.iterations_sd = stats::sample_sd(iters);
  if (!errors.empty()) {
    s.error_mean = stats::mean(errors);
    s.error_sd = stats::sample_sd(errors);
  }
  return s;
}

std::string emit_csv(const std::vector<std::vector<std::string>>& rows) {
  auto needs_quotes = [](const std::string& cell) {
    return cell.find_first_of(",\"\n\r") != std::string::npos;
  };
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      if (needs_quotes(row[i])) {
        out += '"';
        for (char ch : row[i]) {
          if (ch == '"') out += '"';
          out += ch;
        }
        out += '"';
      } else {
        out += row[i];
      }
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool cell_started = false;

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += ch;
      }
      continue;
    }
    if (ch == '"' && cell.empty() && !cell_started) {
      quoted = true;
      cell_started = true;
    } else if (ch == ',') {
      row.push_back(std::move(cell));
      cell.clear();
      cell_started = false;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(cell));
      cell.clear();
      cell_started = false;
      rows.push_back(std::move(row));
      row.clear();
    } else {
      cell += ch;
      cell_started = true;
    }
  }
  if (cell_started || !cell.empty() || !row.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string write_report(const BenchmarkRun& run, ReportFormat format) {
  const std::vector<std::string> header = header_cells();
  const std::vector<std::string> data = data_cells(run.stats);

  switch (format) {
    case ReportFormat::Csv:
      return emit_csv({header, data});
    case ReportFormat::Markdown: {
      std::string out = "|";
      for (const auto& h : header) out += " " + h + " |";
      out += "\n|";
      for (std::size_t i = 0; i < header.size(); ++i) out += " --- |";
      out += "\n|";
      for (const auto& d : data) out += " " + d + " |";
      out += "\n";
      return out;
    }
    case ReportFormat::Json: {
      nlohmann::json j;
      j["config"] = config_json(run.config);
      nlohmann::json summary;
      summary["trials"] = run.stats.trials;
      summary["successes"] = run.stats.successes;
      summary["success_rate"] = run.stats.success_rate;
      summary["time_s"] = {{"median", run.stats.time_median},
                           {"mean", run.stats.time_mean},
                           {"sd", run.stats.time_sd}};
      summary["iterations"] = {{"median", run.stats.iterations_median},
                               {"mean", run.stats.iterations_mean},
                               {"sd", run.stats.iterations_sd}};
      if (run.stats.successes > 0)
        summary["error"] = {{"mean", run.stats.error_mean}, {"sd", run.stats.error_sd}};
      else
        summary["error"] = nullptr;
      j["summary"] = std::move(summary);

      j["trials"] = nlohmann::json::array();
      for (const auto& r : run.results) {
        nlohmann::json jt;
        jt["seed"] = r.seed;
        jt["success"] = r.success;
        jt["status"] = r.sampling_failure ? "sampling-failure" : solver::to_string(r.status);
        jt["wall_time_s"] = r.wall_time_s;
        jt["iterations"] = r.iterations;
        if (std::isfinite(r.final_error)) jt["final_error"] = r.final_error;
        if (!r.failure_reason.empty()) jt["failure_reason"] = r.failure_reason;
        jt["trailing_full_steps"] = r.trailing_full_steps;
        if (r.order.ok) jt["order"] = {{"q", r.order.q}, {"c", r.order.c}, {"points", r.order.points}};
        j["trials"].push_back(std::move(jt));
      }
      return j.dump(2) + "\n";
    }
  }
  throw DomainError("write_report: unknown format");
}

void write_report_file(const BenchmarkRun& run, const std::string& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericalError("write_report_file: cannot open '" + path + "' for writing");
  out << write_report(run, format);
  if (!out) throw NumericalError("write_report_file: failed writing '" + path + "'");
}

RateStudy rate_study(const BenchmarkRun& run) {
  RateStudy st;
  st.seeds = static_cast<int>(run.results.size());
  for (const auto& r : run.results) {
    if (!r.success) continue;
    ++st.converged;
    if (!r.order.ok) continue;
    ++st.fitted;
    if (r.order.q >= 0.8 && r.order.q <= 1.3 && r.order.c < 1.0) ++st.linear;
    if (r.trailing_full_steps >= 3) {
      ++st.full_tail_fitted;
      if (r.order.q >= 1.7) ++st.quadratic;
    }
  }
  return st;
}

}  // namespace mlgipm::bench
