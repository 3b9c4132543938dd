#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "selfsim/cli.hpp"
#include "selfsim/errors.hpp"

namespace selfsim::cli {

namespace {

const std::set<std::string> kKeys = {"process", "method",    "hurst",         "n",     "paths",   "seed", "out",
                                     "format",  "truncation", "substeps", "embedding-cap", "suite", "baseline"};

const std::set<std::string> kSuites = {"marginals", "covariance", "normality", "equivalence", "error-bound"};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty())
    throw UsageError("invalid value for --" + std::string(key) + ": '" + std::string(text) + "'");
  return value;
}

std::uint64_t parse_seed(std::string_view text) {
  text = trim(text);
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data() + 2, text.data() + text.size(), v, 16);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw UsageError("invalid seed '" + std::string(text) + "'");
    return v;
  }
  return parse_number<std::uint64_t>("seed", text);
}

std::vector<std::string_view> split_commas(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    parts.push_back(trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

Method method_or_throw(std::string_view text) {
  const auto m = parse_method(text);
  if (!m) throw UsageError("unknown method '" + std::string(text) + "'");
  return *m;
}

}  // namespace

KeyValues parse_config_text(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key(trim(view.substr(0, eq)));
    std::string_view value = trim(view.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (!kKeys.count(key)) throw UsageError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    out[key] = std::string(value);
  }
  return out;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::vector<std::size_t> parse_size_list(std::string_view text) {
  std::vector<std::size_t> sizes;
  for (auto part : split_commas(text)) {
    const auto n = parse_number<std::size_t>("n", part);
    if (n == 0) throw UsageError("--n must be positive");
    sizes.push_back(n);
  }
  return sizes;
}

void validate_combination(Process process, Method method) {
  bool ok = false;
  switch (method) {
    case Method::bm_cumsum: ok = process == Process::bm; break;
    case Method::davies_harte:
    case Method::circulant:
    case Method::ma_truncated: ok = process == Process::fbm; break;
    case Method::cholesky:
    case Method::lamperti: ok = process == Process::fbm || process == Process::sfbm; break;
  }
  if (!ok)
    throw UsageError("method " + std::string(to_string(method)) + " does not support process " +
                     std::string(to_string(process)));
}

RunConfig resolve_config(Command command, const KeyValues& flags, const KeyValues& file,
                         std::optional<std::string> env_seed) {
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    if (auto it = flags.find(key); it != flags.end()) return it->second;
    if (auto it = file.find(key); it != file.end()) return it->second;
    return std::nullopt;
  };

  RunConfig c;
  switch (command) {
    case Command::simulate: break;
    case Command::verify:
      c.paths = 20000;
      c.sizes = {256};
      c.format = "json";
      break;
    case Command::bench:
      c.methods = {Method::davies_harte, Method::lamperti};
      c.sizes = {4096, 8192, 16384, 32768, 65536};
      c.paths = 4;
      c.format = "json";
      break;
  }

  if (auto v = get("process")) {
    const auto p = parse_process(trim(*v));
    if (!p) throw UsageError("unknown process '" + *v + "'");
    c.process = *p;
  }
  if (auto v = get("method")) {
    c.methods.clear();
    for (auto part : split_commas(*v)) c.methods.push_back(method_or_throw(part));
    if (c.methods.size() > 1 && command != Command::bench)
      throw UsageError("--method takes a single method here");
  } else if (c.process == Process::bm) {
    c.methods = {Method::bm_cumsum};
  }
  if (auto v = get("hurst")) c.hurst = parse_number<double>("hurst", trim(*v));
  if (auto v = get("n")) c.sizes = parse_size_list(*v);
  if (auto v = get("paths")) c.paths = parse_number<std::size_t>("paths", trim(*v));
  if (auto v = get("seed"))
    c.seed = parse_seed(*v);
  else if (env_seed && !trim(*env_seed).empty())
    c.seed = parse_seed(*env_seed);
  if (auto v = get("out")) c.out = *v;
  if (auto v = get("format")) c.format = std::string(trim(*v));
  if (auto v = get("truncation")) c.truncation = parse_number<double>("truncation", trim(*v));
  if (auto v = get("substeps")) c.substeps = parse_number<unsigned>("substeps", trim(*v));
  if (auto v = get("embedding-cap")) c.embedding_cap = parse_number<unsigned>("embedding-cap", trim(*v));
  if (auto v = get("suite")) c.suite = std::string(trim(*v));
  if (auto v = get("baseline")) c.baseline = method_or_throw(trim(*v));

  if (c.paths == 0) throw UsageError("--paths must be positive");
  if (c.format != "csv" && c.format != "json") throw UsageError("--format must be csv or json");
  if (command == Command::verify && c.format != "json") throw UsageError("verify writes JSON reports only");
  if (command == Command::simulate && c.sizes.size() != 1) throw UsageError("simulate takes a single --n");
  if (!(std::isfinite(c.truncation) && c.truncation > 0.0)) throw UsageError("--truncation must be positive");
  if (c.substeps == 0) throw UsageError("--substeps must be at least 1");
  if (c.embedding_cap > 30) throw UsageError("--embedding-cap must be at most 30");

  if (command == Command::verify) {
    if (c.suite.empty()) throw UsageError("verify needs --suite");
    if (!kSuites.count(c.suite)) throw UsageError("unknown suite '" + c.suite + "'");
  } else if (!c.suite.empty()) {
    throw UsageError("--suite only applies to verify");
  }

  const bool error_bound = command == Command::verify && c.suite == "error-bound";
  if (c.process == Process::bm && !error_bound)
    c.hurst = 0.5;
  else
    require_hurst(c.hurst);
  if (!error_bound) {
    for (Method m : c.methods) validate_combination(c.process, m);
    if (command == Command::verify && c.suite == "equivalence") validate_combination(c.process, c.baseline);
  }
  return c;
}

}  // namespace selfsim::cli
