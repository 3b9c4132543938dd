#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "selfsim/cli.hpp"
#include "selfsim/covmodels.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/lamperti.hpp"
#include "selfsim/samplers.hpp"
#include "selfsim/verify.hpp"

namespace selfsim::cli {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

EmbeddingPolicy policy_of(const RunConfig& c) { return {true, c.embedding_cap, 1e-9}; }

template <typename F>
decltype(auto) with_sampler(const RunConfig& c, Method method, std::size_t n, F&& f) {
  const GridSpec grid(n);
  switch (method) {
    case Method::bm_cumsum: return f(BrownianSampler(grid));
    case Method::cholesky: return f(CholeskySampler(CovarianceKernel<double>(c.process, c.hurst), grid));
    case Method::davies_harte: return f(CirculantFbmSampler::davies_harte(grid, c.hurst));
    case Method::circulant: return f(CirculantFbmSampler(grid, c.hurst, policy_of(c)));
    case Method::ma_truncated: return f(MovingAverageSampler(grid, c.hurst, {c.truncation, c.substeps}));
    case Method::lamperti: return f(LampertiSampler(c.process, c.hurst, grid, policy_of(c)));
  }
  throw UsageError("unknown method");
}

// Shortest decimal text that parses back to the same double.
class NumberText {
 public:
  std::string_view operator()(double v) {
    const auto res = std::to_chars(buf_, buf_ + sizeof buf_, v);
    return {buf_, static_cast<std::size_t>(res.ptr - buf_)};
  }
  std::string_view operator()(std::size_t v) {
    const auto res = std::to_chars(buf_, buf_ + sizeof buf_, v);
    return {buf_, static_cast<std::size_t>(res.ptr - buf_)};
  }

 private:
  char buf_[32];
};

// Writes to the --out file when given, else to the fallback stream.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw UsageError("cannot open output file '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw std::runtime_error("failed writing output");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

json diagnostics_json(const SampleDiagnostics& d) {
  return {{"embedding_size", d.embedding_size},
          {"clamped_count", d.clamped_count},
          {"doublings", d.doublings},
          {"jitter", d.jitter}};
}

json config_json(const RunConfig& c) {
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(std::string(to_string(m)));
  return {{"process", std::string(to_string(c.process))},
          {"method", c.methods.size() == 1 ? json(std::string(to_string(c.method()))) : methods},
          {"hurst", c.hurst},
          {"n", c.sizes.size() == 1 ? json(c.sizes.front()) : json(c.sizes)},
          {"paths", c.paths},
          {"seed", c.seed},
          {"truncation", c.truncation},
          {"substeps", c.substeps},
          {"embedding_cap", c.embedding_cap},
          {"version", std::string(kVersion)}};
}

std::vector<std::size_t> normality_nodes(std::size_t n) {
  std::vector<std::size_t> nodes{std::max<std::size_t>(n / 4, 1), std::max<std::size_t>(n / 2, 1), n};
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

ReplicateBatch batch_for(const RunConfig& c, Method method, std::size_t n, std::uint64_t seed) {
  return with_sampler(c, method, n, [&](const auto& s) { return generate_batch(s, c.paths, seed); });
}

std::vector<VerificationReport> run_suite(const RunConfig& c) {
  std::vector<VerificationReport> reports;
  if (c.suite == "error-bound") {
    reports.push_back(error_bound_check(error_bound_diagnostics(c.sizes, c.hurst)));
    return reports;
  }
  for (std::size_t n : c.sizes) {
    const ReplicateBatch batch = batch_for(c, c.method(), n, c.seed);
    if (c.suite == "marginals") {
      reports.push_back(marginal_variance_check(batch, c.process, c.hurst));
    } else if (c.suite == "covariance") {
      reports.push_back(covariance_match(batch, CovarianceKernel<double>(c.process, c.hurst)));
    } else if (c.suite == "normality") {
      reports.push_back(normality_check(batch, normality_nodes(n)));
    } else if (c.suite == "equivalence") {
      const ReplicateBatch base = batch_for(c, c.baseline, n, c.seed ^ kBaselineSeedOffset);
      const bool approximate = c.method() == Method::lamperti || c.baseline == Method::lamperti;
      reports.push_back(
          method_equivalence(batch, base, approximate ? EquivalenceMode::diagonal : EquivalenceMode::full));
    }
  }
  return reports;
}

struct Timing {
  double setup = 0.0;
  double sample = 0.0;  // one batch of c.paths, best of the repeats
  double checksum = 0.0;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Timing time_method(const RunConfig& c, Method method, std::size_t n) {
  Timing t;
  const auto t0 = Clock::now();
  return with_sampler(c, method, n, [&](const auto& s) {
    t.setup = seconds_since(t0);
    {
      RngStream warm(c.seed, ~std::uint64_t{0});
      (void)s.draw(warm);
    }
    t.sample = std::numeric_limits<double>::infinity();
    double spent = 0.0;
    for (int rep = 0; rep < 5 || (spent < 0.5 && rep < 200); ++rep) {
      double sum = 0.0;
      const auto s0 = Clock::now();
      for_each_path(s, c.paths, c.seed, [&](std::size_t, const Eigen::VectorXd& v) { sum += v.sum(); });
      const double dt = seconds_since(s0);
      spent += dt;
      t.sample = std::min(t.sample, dt);
      t.checksum = sum;
    }
    return t;
  });
}

bool fft_method(Method m) { return m == Method::davies_harte || m == Method::circulant || m == Method::lamperti; }

}  // namespace

int cmd_simulate(const RunConfig& c, std::ostream& fallback) {
  const std::size_t n = c.sizes.front();
  Output output(c.out, fallback);
  std::ostream& out = output.get();
  NumberText num;

  with_sampler(c, c.method(), n, [&](const auto& sampler) {
    const SamplerInfo info = sampler.info();
    if (c.format == "csv") {
      out << "path_id,t,value\n";
      std::vector<std::string> times(n + 1);
      times[0] = "0";
      for (std::size_t j = 1; j <= n; ++j) times[j] = std::string(num(info.grid.time(j)));
      for_each_path(sampler, c.paths, c.seed, [&](std::size_t id, const Eigen::VectorXd& v) {
        const std::string prefix = std::string(num(id)) + ",";
        out << prefix << "0,0\n";
        for (std::size_t j = 1; j <= n; ++j)
          out << prefix << times[j] << ',' << num(v(static_cast<Eigen::Index>(j - 1))) << '\n';
      });
    } else {
      json meta = config_json(c);
      meta["diagnostics"] = diagnostics_json(info.diagnostics);
      meta["origin_included"] = true;
      out << "{\"meta\":" << meta.dump() << ",\"paths\":[";
      for_each_path(sampler, c.paths, c.seed, [&](std::size_t id, const Eigen::VectorXd& v) {
        out << (id == 0 ? "\n[0" : ",\n[0");
        for (Eigen::Index j = 0; j < v.size(); ++j) out << ',' << num(v(j));
        out << ']';
      });
      out << "\n]}\n";
    }
  });
  output.finish();
  return kExitOk;
}

int cmd_verify(const RunConfig& c, std::ostream& fallback) {
  const auto reports = run_suite(c);
  bool ok = !reports.empty();
  json doc{{"suite", c.suite}, {"meta", config_json(c)}, {"reports", json::array()}};
  if (c.suite == "equivalence") doc["meta"]["baseline"] = std::string(to_string(c.baseline));
  for (const auto& r : reports) {
    ok = ok && r.verdict != Verdict::fail;
    doc["reports"].push_back(r.to_json());
  }
  doc["pass"] = ok;
  Output output(c.out, fallback);
  output.get() << doc.dump(2) << '\n';
  output.finish();
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_bench(const RunConfig& c, std::ostream& fallback) {
  std::vector<std::size_t> sizes = c.sizes;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  json rows = json::array();
  json scaling = json::array();
  for (Method m : c.methods) {
    std::vector<Timing> timings;
    for (std::size_t n : sizes) {
      timings.push_back(time_method(c, m, n));
      const Timing& t = timings.back();
      rows.push_back({{"method", std::string(to_string(m))},
                      {"n", n},
                      {"paths", c.paths},
                      {"setup_seconds", t.setup},
                      {"batch_seconds", t.sample},
                      {"per_path_seconds", t.sample / static_cast<double>(c.paths)},
                      {"total_seconds", t.setup + t.sample},
                      {"checksum", t.checksum}});
    }
    for (std::size_t i = 1; i < sizes.size(); ++i) {
      if (sizes[i] != 2 * sizes[i - 1]) continue;
      json entry{{"method", std::string(to_string(m))}, {"n", sizes[i - 1]}};
      if (fft_method(m)) {
        const double r = timings[i].sample / timings[i - 1].sample;
        entry.update({{"measure", "batch_seconds"}, {"ratio", r}, {"bound", "<= 2.6"}, {"pass", r <= 2.6}});
      } else if (m == Method::cholesky && sizes[i - 1] >= 512) {
        const double r = timings[i].setup / timings[i - 1].setup;
        entry.update({{"measure", "setup_seconds"}, {"ratio", r}, {"bound", ">= 4"}, {"pass", r >= 4.0}});
      } else {
        continue;
      }
      scaling.push_back(entry);
    }
  }

  Output output(c.out, fallback);
  std::ostream& out = output.get();
  if (c.format == "json") {
    out << json{{"meta", config_json(c)}, {"timings", rows}, {"scaling", scaling}}.dump(2) << '\n';
  } else {
    NumberText num;
    out << "method,n,paths,setup_seconds,batch_seconds,per_path_seconds,total_seconds,checksum\n";
    for (const auto& r : rows) {
      out << r["method"].get<std::string>() << ',' << num(r["n"].get<std::size_t>()) << ','
          << num(r["paths"].get<std::size_t>());
      for (const char* k : {"setup_seconds", "batch_seconds", "per_path_seconds", "total_seconds", "checksum"})
        out << ',' << num(r[k].get<double>());
      out << '\n';
    }
  }
  output.finish();
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sample paths of self-similar Gaussian processes", "selfsim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  struct Sub {
    CLI::App* app = nullptr;
    Command command{};
    std::map<std::string, std::pair<CLI::Option*, std::string>> options;
    std::string config;
  };
  std::vector<std::unique_ptr<Sub>> subs;

  auto add = [&](const char* name, const char* about, Command command) {
    auto sub = std::make_unique<Sub>();
    sub->app = app.add_subcommand(name, about);
    sub->command = command;
    const std::pair<const char*, const char*> flags[] = {
        {"process", "bm, fbm or sfbm"},
        {"method", "bm-cumsum, cholesky, davies-harte, circulant, ma-truncated, lamperti"},
        {"hurst", "Hurst index in (0, 1)"},
        {"n", "grid size (comma list for verify and bench)"},
        {"paths", "number of replicates"},
        {"seed", "base seed (falls back to SELFSIM_SEED)"},
        {"out", "output file (default stdout)"},
        {"format", "csv or json"},
        {"truncation", "moving-average truncation horizon T"},
        {"substeps", "moving-average substeps per grid cell"},
        {"embedding-cap", "maximum circulant embedding doublings"},
        {"suite", "marginals, covariance, normality, equivalence, error-bound"},
        {"baseline", "reference method for the equivalence suite"}};
    for (const auto& [flag, help] : flags) {
      auto& slot = sub->options[flag];
      slot.first = sub->app->add_option(std::string("--") + flag, slot.second, help);
    }
    sub->app->add_option("--config", sub->config, "key = value file; flags take precedence");
    subs.push_back(std::move(sub));
  };
  add("simulate", "write sample paths as CSV or JSON", Command::simulate);
  add("verify", "run a verification suite and write a JSON report", Command::verify);
  add("bench", "time samplers over a ladder of grid sizes", Command::bench);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (const auto& sub : subs) {
      if (!sub->app->parsed()) continue;
      KeyValues flags;
      for (const auto& [key, slot] : sub->options)
        if (slot.first->count() > 0) flags[key] = slot.second;
      const KeyValues file = sub->config.empty() ? KeyValues{} : read_config_file(sub->config);
      std::optional<std::string> env_seed;
      if (const char* s = std::getenv("SELFSIM_SEED")) env_seed = s;
      const RunConfig config = resolve_config(sub->command, flags, file, env_seed);
      switch (sub->command) {
        case Command::simulate: return cmd_simulate(config, out);
        case Command::verify: return cmd_verify(config, out);
        case Command::bench: return cmd_bench(config, out);
      }
    }
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

}  // namespace selfsim::cli
