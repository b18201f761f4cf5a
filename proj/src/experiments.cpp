#include "codedmm/experiments.hpp"

#include "codedmm/array_code.hpp"
#include "codedmm/comm_cost.hpp"
#include "codedmm/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>

namespace codedmm::experiments {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

template <class T> std::optional<T> parse_number(std::string_view s) {
  s = trim(s);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    return std::nullopt;
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(value))
      return std::nullopt;
  return value;
}

std::uint64_t need_uint(std::string_view s, std::string_view key,
                        std::size_t line) {
  const auto v = parse_number<std::uint64_t>(s);
  if (!v)
    throw ParseError(fmt::format("{}: expected a non-negative integer, got '{}'",
                                 key, s),
                     line);
  return *v;
}

double need_double(std::string_view s, std::string_view key, std::size_t line) {
  const auto v = parse_number<double>(s);
  if (!v)
    throw ParseError(fmt::format("{}: expected a number, got '{}'", key, s),
                     line);
  return *v;
}

// Comma list whose items are numbers or inclusive ranges start:stop:step.
std::vector<double> parse_values(std::string_view s, std::string_view key,
                                 std::size_t line) {
  std::vector<double> out;
  for (auto item : split(s, ',')) {
    const auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(need_double(item, key, line));
      continue;
    }
    if (parts.size() != 3)
      throw ParseError(fmt::format("{}: range must be start:stop:step", key),
                       line);
    const double start = need_double(parts[0], key, line);
    const double stop = need_double(parts[1], key, line);
    const double step = need_double(parts[2], key, line);
    if (!(step > 0.0) || stop < start)
      throw ParseError(fmt::format("{}: empty range '{}'", key, item), line);
    const auto count =
        static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i)
      out.push_back(start + static_cast<double>(i) * step);
  }
  return out;
}

bool is_whole(double v) { return v >= 1.0 && v == std::floor(v); }

void finish(Scenario &sc, std::size_t header_line,
            const std::map<std::string, std::size_t> &seen) {
  if (sc.schemes.empty())
    throw ParseError("scenario '" + sc.name + "' has no schemes", header_line);
  if (sc.values.empty())
    throw ParseError("scenario '" + sc.name + "' has no sweep values",
                     header_line);
  const std::size_t values_line = seen.at("values");
  for (double v : sc.values) {
    const bool ok = sc.sweep == Sweep::epsilon ? v >= 0.0 : is_whole(v);
    if (!ok)
      throw ParseError(fmt::format("values: {:g} is not a valid {} point", v,
                                   to_string(sc.sweep)),
                       values_line);
  }
  if (sc.sweep != Sweep::k && sc.sweep != Sweep::comm_cost && sc.base.k == 0)
    throw ParseError("scenario '" + sc.name + "' needs a fixed k", header_line);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos)
    return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"')
      out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line,
                                        std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"' && cur.empty()) {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  if (quoted)
    throw ParseError("unterminated quoted field", line_no);
  fields.push_back(std::move(cur));
  return fields;
}

std::string num(double v) { return fmt::format("{:.10g}", v); }

} // namespace

std::string to_string(Sweep s) {
  switch (s) {
  case Sweep::k:
    return "k";
  case Sweep::p_equals_c:
    return "p_equals_c";
  case Sweep::epsilon:
    return "epsilon";
  case Sweep::comm_cost:
    return "comm_cost";
  }
  return "?";
}

std::optional<Sweep> parse_sweep(std::string_view name) {
  for (Sweep s : {Sweep::k, Sweep::p_equals_c, Sweep::epsilon, Sweep::comm_cost})
    if (to_string(s) == name)
      return s;
  return std::nullopt;
}

std::size_t StragglerRule::blocklength(const LatencyParams &p) const {
  switch (kind) {
  case Kind::eq2:
    return array::max_blocklength(p.k, p.b, p.sigma);
  case Kind::eq4:
    return array::max_blocklength_asym(p.k, p.b, p.sigma, p.epsilon);
  case Kind::ratio:
    return p.k + static_cast<std::size_t>(
                     std::ceil(value * static_cast<double>(p.k) - 1e-9));
  case Kind::fixed:
    return p.k + static_cast<std::size_t>(value);
  }
  return p.k;
}

std::string StragglerRule::describe() const {
  switch (kind) {
  case Kind::eq2:
    return "eq2";
  case Kind::eq4:
    return "eq4";
  case Kind::ratio:
    return fmt::format("ratio:{:g}", value);
  case Kind::fixed:
    return fmt::format("fixed:{:g}", value);
  }
  return "?";
}

std::optional<StragglerRule> parse_straggler_rule(std::string_view text) {
  text = trim(text);
  using K = StragglerRule::Kind;
  if (text == "eq2")
    return StragglerRule{K::eq2, 0.0};
  if (text == "eq4")
    return StragglerRule{K::eq4, 0.0};
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    return std::nullopt;
  const auto head = text.substr(0, colon);
  const auto v = parse_number<double>(text.substr(colon + 1));
  if (!v || *v < 0.0)
    return std::nullopt;
  if (head == "ratio")
    return StragglerRule{K::ratio, *v};
  if (head == "fixed" && *v == std::floor(*v))
    return StragglerRule{K::fixed, *v};
  return std::nullopt;
}

const StragglerRule &Scenario::rule_for(Scheme s) const {
  const auto it = overrides.find(s);
  return it == overrides.end() ? stragglers : it->second;
}

std::vector<Scenario> parse_scenarios(std::string_view text) {
  std::vector<Scenario> out;
  std::map<std::string, std::size_t> seen;
  std::size_t header_line = 0;
  std::size_t line_no = 0;
  auto close = [&] {
    if (!out.empty())
      finish(out.back(), header_line, seen);
  };
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#')
      continue;
    if (line.front() == '[') {
      if (line != "[scenario]")
        throw ParseError(fmt::format("unknown section '{}'", line), line_no);
      close();
      out.emplace_back();
      seen.clear();
      header_line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("expected key = value", line_no);
    if (out.empty())
      throw ParseError("key outside a [scenario] section", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (value.empty())
      throw ParseError(key + ": missing value", line_no);
    if (!seen.emplace(key, line_no).second)
      throw ParseError(key + ": duplicate key", line_no);
    Scenario &sc = out.back();

    if (key == "name") {
      sc.name = value;
    } else if (key == "schemes") {
      for (auto item : split(value, ',')) {
        const auto s = latency::parse_scheme(item);
        if (!s)
          throw ParseError(fmt::format("schemes: unknown scheme '{}'", item),
                           line_no);
        sc.schemes.push_back(*s);
      }
    } else if (key == "sweep") {
      const auto s = parse_sweep(value);
      if (!s)
        throw ParseError(fmt::format("sweep: unknown variable '{}'", value),
                         line_no);
      sc.sweep = *s;
    } else if (key == "values") {
      sc.values = parse_values(value, key, line_no);
    } else if (key == "k") {
      sc.base.k = need_uint(value, key, line_no);
    } else if (key == "b") {
      sc.b_values.clear();
      for (auto item : split(value, ',')) {
        const auto b = need_uint(item, key, line_no);
        if (b == 0)
          throw ParseError("b: must be >= 1", line_no);
        sc.b_values.push_back(b);
      }
    } else if (key == "epsilon") {
      sc.epsilon_values.clear();
      for (auto item : split(value, ',')) {
        const double e = need_double(item, key, line_no);
        if (e < 0.0)
          throw ParseError("epsilon: must be >= 0", line_no);
        sc.epsilon_values.push_back(e);
      }
    } else if (key == "c") {
      sc.base.c = need_double(value, key, line_no);
    } else if (key == "p") {
      sc.base.p = need_uint(value, key, line_no);
    } else if (key == "sigma") {
      sc.base.sigma = need_uint(value, key, line_no);
    } else if (key == "mu") {
      sc.base.mu = need_double(value, key, line_no);
    } else if (key == "trials") {
      sc.trials = need_uint(value, key, line_no);
      if (sc.trials == 0)
        throw ParseError("trials: must be >= 1", line_no);
    } else if (key == "seed") {
      sc.seed = need_uint(value, key, line_no);
    } else if (key == "delta") {
      sc.stragglers = {StragglerRule::Kind::ratio,
                       need_double(value, key, line_no)};
    } else if (key == "stragglers" || key.starts_with("stragglers.")) {
      const auto rule = parse_straggler_rule(value);
      if (!rule)
        throw ParseError(
            fmt::format("{}: expected eq2, eq4, ratio:X or fixed:T, got '{}'",
                        key, value),
            line_no);
      if (key == "stragglers") {
        sc.stragglers = *rule;
      } else {
        const auto s = latency::parse_scheme(std::string_view(key).substr(11));
        if (!s)
          throw ParseError(fmt::format("{}: unknown scheme", key), line_no);
        sc.overrides[*s] = *rule;
      }
    } else {
      throw ParseError(fmt::format("unknown key '{}'", key), line_no);
    }
  }
  close();
  return out;
}

const std::vector<std::string> &preset_names() {
  static const std::vector<std::string> names{"fig1", "fig2", "fig4", "fig5",
                                              "table4"};
  return names;
}

std::string preset_config(std::string_view name) {
  if (name == "fig1")
    return R"([scenario]
name = fig1
schemes = uncoded, poly, matdot, amds
sweep = k
values = 100:2000:100
stragglers = eq2
)";
  if (name == "fig2")
    return R"([scenario]
name = fig2
schemes = uncoded, poly, matdot, amds
sweep = p_equals_c
values = 10:100:10
k = 1000
stragglers = eq2
)";
  if (name == "fig4")
    return R"([scenario]
name = fig4
schemes = uncoded, poly, matdot, amds, asym
sweep = k
values = 100:2000:100
epsilon = 3
stragglers = ratio:0.1
)";
  if (name == "fig5")
    return R"([scenario]
name = fig5
schemes = asym
sweep = comm_cost
values = 50, 100, 200, 300, 500, 750, 1000, 1500, 2000, 3000
b = 50, 100
epsilon = 3, 4, 5
stragglers = eq4
)";
  if (name == "table4")
    return R"([scenario]
name = table4
schemes = poly, matdot, amds, asym
sweep = k
values = 100, 1000
b = 100
epsilon = 3
stragglers = eq4
stragglers.amds = eq2
)";
  throw PreconditionError(fmt::format("unknown preset '{}'", name));
}

Scenario preset(std::string_view name) {
  return parse_scenarios(preset_config(name)).front();
}

std::optional<std::uint64_t> seed_from_env() {
  const char *raw = std::getenv("CODED_MATMUL_SEED");
  if (raw == nullptr)
    return std::nullopt;
  return parse_number<std::uint64_t>(raw);
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> cli,
                           std::optional<std::uint64_t> config) {
  if (cli)
    return *cli;
  if (config)
    return *config;
  return seed_from_env().value_or(1);
}

std::size_t Row::t() const {
  return params.n >= params.k ? params.n - params.k : 0;
}

std::vector<Row> run_scenario(const Scenario &sc, std::uint64_t seed,
                              std::size_t threads) {
  std::vector<Row> rows;
  for (std::size_t b : sc.b_values)
    for (double eps : sc.epsilon_values)
      for (Scheme scheme : sc.schemes)
        for (double v : sc.values) {
          Row row;
          row.scenario = sc.name;
          row.scheme = scheme;
          row.sweep = sc.sweep;
          row.trials = sc.trials;
          row.seed = seed;
          auto &p = row.params;
          p = sc.base;
          p.b = b;
          p.epsilon = eps;
          p.n = 0;
          switch (sc.sweep) {
          case Sweep::k:
          case Sweep::comm_cost:
            p.k = static_cast<std::size_t>(v);
            break;
          case Sweep::p_equals_c:
            p.p = static_cast<std::size_t>(v);
            p.c = v;
            break;
          case Sweep::epsilon:
            p.epsilon = v;
            break;
          }
          row.sweep_value = v;
          try {
            p.n = scheme == Scheme::uncoded ? p.k
                                            : sc.rule_for(scheme).blocklength(p);
            const auto mc = latency::mc_simulate(scheme, p, sc.trials, seed,
                                                 threads);
            row.mc_mean = mc.total.mean;
            row.mc_stderr = mc.total.std_error(sc.trials);
            row.mc_encode = mc.encode.mean;
            row.mc_parallel = mc.parallel.mean;
            row.mc_decode = mc.decode.mean;
            row.pred_harmonic = mc.predicted.total();
            row.pred_natural =
                latency::expected_T(scheme, p, latency::LogMode::natural)
                    .total();
            const auto cost = comm::comm_symbols(scheme, p);
            row.overhead_ms = cost.normalized_overhead_ms;
            row.overhead_sm = cost.normalized_overhead_sm;
            if (sc.sweep == Sweep::comm_cost)
              row.sweep_value = row.comm_cost();
          } catch (const PreconditionError &e) {
            row.error = e.what();
          } catch (const DimensionError &e) {
            row.error = e.what();
          }
          rows.push_back(std::move(row));
        }
  return rows;
}

std::string csv_header() {
  return "scenario,scheme,sweep,sweep_value,k,n,t,b,epsilon,c,p,sigma,mu,"
         "trials,seed,mc_mean,mc_stderr,pred_harmonic,pred_natural,mc_encode,"
         "mc_parallel,mc_decode,overhead_ms,overhead_sm,comm_cost,error";
}

std::string csv_row(const Row &r) {
  const auto &p = r.params;
  const bool ok = r.error.empty();
  const bool have_n = ok || p.n != 0;
  auto when = [&](bool cond, const std::string &s) {
    return cond ? s : std::string();
  };
  const bool sweep_known = ok || r.sweep != Sweep::comm_cost;
  return fmt::format(
      "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},"
      "{},{}",
      csv_field(r.scenario), latency::to_string(r.scheme), to_string(r.sweep),
      when(sweep_known, num(r.sweep_value)), p.k, when(have_n, num(p.n)),
      when(have_n, num(r.t())), p.b, num(p.epsilon), num(p.c), p.p, p.sigma,
      num(p.mu), r.trials, r.seed, when(ok, num(r.mc_mean)),
      when(ok, num(r.mc_stderr)), when(ok, num(r.pred_harmonic)),
      when(ok, num(r.pred_natural)), when(ok, num(r.mc_encode)),
      when(ok, num(r.mc_parallel)), when(ok, num(r.mc_decode)),
      when(ok, num(r.overhead_ms)), when(ok, num(r.overhead_sm)),
      when(ok, num(r.comm_cost())), csv_field(r.error));
}

std::string to_csv(const std::vector<Row> &rows) {
  std::string out = std::string(kCsvSchema) + "\n" + csv_header() + "\n";
  for (const auto &r : rows)
    out += csv_row(r) + "\n";
  return out;
}

std::vector<PlotSeries> emit_plotdata(std::string_view csv) {
  struct Point {
    std::string scenario, scheme, b, eps;
    double x, mean, pred;
  };
  std::vector<Point> points;
  std::vector<std::string> header;
  std::map<std::string, std::size_t> col;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    const auto end = std::min(csv.find('\n', pos), csv.size());
    const auto line = csv.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty() || line.front() == '#')
      continue;
    auto fields = split_csv_line(line, line_no);
    if (header.empty()) {
      header = std::move(fields);
      for (std::size_t i = 0; i < header.size(); ++i)
        col[header[i]] = i;
      for (const char *need : {"scenario", "scheme", "b", "epsilon",
                               "sweep_value", "mc_mean", "pred_harmonic",
                               "error"})
        if (!col.contains(need))
          throw ParseError(fmt::format("header lacks column '{}'", need),
                           line_no);
      continue;
    }
    if (fields.size() != header.size())
      throw ParseError(fmt::format("expected {} fields, found {}",
                                   header.size(), fields.size()),
                       line_no);
    if (!fields[col["error"]].empty())
      continue;
    auto number = [&](const char *name) {
      const auto v = parse_number<double>(fields[col[name]]);
      if (!v)
        throw ParseError(fmt::format("{}: not a number", name), line_no);
      return *v;
    };
    points.push_back({fields[col["scenario"]], fields[col["scheme"]],
                      fields[col["b"]], fields[col["epsilon"]],
                      number("sweep_value"), number("mc_mean"),
                      number("pred_harmonic")});
  }

  std::map<std::string, std::set<std::string>> bs, epss;
  for (const auto &pt : points) {
    bs[pt.scenario].insert(pt.b);
    epss[pt.scenario].insert(pt.eps);
  }
  std::vector<PlotSeries> series;
  std::map<std::string, std::size_t> index;
  for (const auto &pt : points) {
    std::string name = pt.scenario + "_" + pt.scheme;
    if (bs[pt.scenario].size() > 1)
      name += "_b" + pt.b;
    if (epss[pt.scenario].size() > 1)
      name += "_eps" + pt.eps;
    name += ".dat";
    auto [it, fresh] = index.emplace(name, series.size());
    if (fresh)
      series.push_back(
          {name, "# sweep_value mc_mean pred_harmonic log10_mc_mean\n"});
    series[it->second].content +=
        fmt::format("{} {} {} {}\n", num(pt.x), num(pt.mean), num(pt.pred),
                    num(std::log10(pt.mean)));
  }
  return series;
}

} // namespace codedmm::experiments
