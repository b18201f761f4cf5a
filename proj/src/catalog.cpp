#include "codedmm/catalog.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace codedmm::array {

namespace {

void write_sources(std::string &out, const SourceSet &cell) {
  for (std::size_t i = 0; i < cell.size(); ++i) {
    if (i)
      out += '+';
    out += std::to_string(cell[i]);
  }
}

struct Line {
  std::size_t number;
  std::string_view text;
};

std::vector<Line> significant_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  while (!text.empty()) {
    ++number;
    const std::size_t end = text.find('\n');
    std::string_view line = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{}
                                         : text.substr(end + 1);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    const std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#')
      continue;
    lines.push_back({number, line});
  }
  return lines;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
      ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t')
      ++j;
    if (j > i)
      tokens.push_back(s.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::size_t to_count(std::string_view tok, std::size_t line,
                     const char *field) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError(std::string("expected integer for ") + field + ", got '" +
                         std::string(tok) + "'",
                     line);
  return v;
}

SourceSet parse_sources(std::string_view s, std::size_t line) {
  SourceSet cell;
  while (true) {
    const std::size_t plus = s.find('+');
    cell.push_back(to_count(s.substr(0, plus), line, "source index"));
    if (plus == std::string_view::npos)
      break;
    s = s.substr(plus + 1);
  }
  return cell;
}

template <typename Make> auto wrap(std::size_t line, Make &&make) {
  try {
    return make();
  } catch (const PreconditionError &e) {
    throw ParseError(e.what(), line);
  }
}

} // namespace

std::string serialize(const ArrayCode &code) {
  std::string out = "arraycode " + std::to_string(code.n()) + " " +
                    std::to_string(code.k()) + " " + std::to_string(code.b()) +
                    " " + std::to_string(code.sigma()) + "\n";
  for (std::size_t node = 0; node < code.n(); ++node)
    for (std::size_t proc = 0; proc < code.b(); ++proc) {
      out += std::to_string(node + 1) + " " + std::to_string(proc + 1) + " : ";
      write_sources(out, code.cell(node, proc));
      out += '\n';
    }
  return out;
}

std::string serialize(const AsymArrayCode &code) {
  std::string out = "asymcode " + std::to_string(code.n()) + " " +
                    std::to_string(code.k()) + " " + std::to_string(code.b()) +
                    "\n";
  for (std::size_t i = 0; i < code.n(); ++i) {
    out += "col " + std::to_string(i + 1) + " " +
           std::to_string(code.column_size(i)) + " :\n";
    for (const auto &cell : code.columns()[i]) {
      write_sources(out, cell);
      out += '\n';
    }
  }
  return out;
}

std::string serialize_catalog(const std::vector<CatalogEntry> &entries) {
  std::string out;
  for (const auto &e : entries)
    out += std::visit([](const auto &code) { return serialize(code); }, e);
  return out;
}

std::vector<CatalogEntry> parse_catalog(std::string_view text) {
  const auto lines = significant_lines(text);
  std::vector<CatalogEntry> entries;
  std::size_t i = 0;
  auto next = [&](const char *expect) -> const Line & {
    if (i >= lines.size())
      throw ParseError(std::string("unexpected end of input, expected ") +
                           expect,
                       lines.empty() ? 0 : lines.back().number);
    return lines[i++];
  };

  while (i < lines.size()) {
    const Line &head = lines[i++];
    const auto tok = split_ws(head.text);
    if (tok[0] == "arraycode") {
      if (tok.size() != 5)
        throw ParseError("header must be 'arraycode n k b sigma'", head.number);
      const std::size_t n = to_count(tok[1], head.number, "n");
      const std::size_t k = to_count(tok[2], head.number, "k");
      const std::size_t b = to_count(tok[3], head.number, "b");
      const std::size_t sigma = to_count(tok[4], head.number, "sigma");
      std::vector<SourceSet> grid(n * b);
      std::vector<bool> seen(n * b, false);
      for (std::size_t c = 0; c < n * b; ++c) {
        const Line &l = next("cell line 'node proc : i1+i2'");
        const auto t = split_ws(l.text);
        if (t.size() != 4 || t[2] != ":")
          throw ParseError("cell line must be 'node proc : i1+i2+...'", l.number);
        const std::size_t node = to_count(t[0], l.number, "node");
        const std::size_t proc = to_count(t[1], l.number, "proc");
        if (node == 0 || node > n || proc == 0 || proc > b)
          throw ParseError("node/proc out of range", l.number);
        const std::size_t idx = (node - 1) * b + (proc - 1);
        if (seen[idx])
          throw ParseError("duplicate cell " + std::string(t[0]) + " " +
                               std::string(t[1]),
                           l.number);
        seen[idx] = true;
        grid[idx] = parse_sources(t[3], l.number);
      }
      entries.emplace_back(wrap(head.number, [&] {
        return ArrayCode(n, k, b, sigma, std::move(grid));
      }));
    } else if (tok[0] == "asymcode") {
      if (tok.size() != 4)
        throw ParseError("header must be 'asymcode n k b'", head.number);
      const std::size_t n = to_count(tok[1], head.number, "n");
      const std::size_t k = to_count(tok[2], head.number, "k");
      const std::size_t b = to_count(tok[3], head.number, "b");
      std::vector<std::vector<SourceSet>> cols(n);
      for (std::size_t c = 0; c < n; ++c) {
        const Line &l = next("column header 'col i b_i :'");
        const auto t = split_ws(l.text);
        if (t.size() != 4 || t[0] != "col" || t[3] != ":")
          throw ParseError("column header must be 'col i b_i :'", l.number);
        if (to_count(t[1], l.number, "column index") != c + 1)
          throw ParseError("columns must appear in order 1..n", l.number);
        const std::size_t size = to_count(t[2], l.number, "b_i");
        for (std::size_t j = 0; j < size; ++j) {
          const Line &e = next("equation line 'i1+i2+...'");
          const auto et = split_ws(e.text);
          if (et.size() != 1)
            throw ParseError("equation line must be 'i1+i2+...'", e.number);
          cols[c].push_back(parse_sources(et[0], e.number));
        }
      }
      entries.emplace_back(wrap(head.number, [&] {
        return AsymArrayCode(n, k, b, std::move(cols));
      }));
    } else {
      throw ParseError("unknown entry '" + std::string(tok[0]) +
                           "', expected arraycode or asymcode",
                       head.number);
    }
  }
  return entries;
}

std::vector<CatalogEntry> load_catalog(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open catalog file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_catalog(ss.str());
}

} // namespace codedmm::array
