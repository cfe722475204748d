#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "gridsigma/grid.hpp"
#include "gridsigma/text.hpp"

namespace gridsigma::grid {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Row {
  std::size_t line = 0;
  std::vector<double> cols;
};

struct RawSections {
  std::optional<double> base_mva;
  std::size_t base_line = 0;
  std::map<std::string, std::vector<Row>> tables;
  std::map<std::string, std::size_t> header_lines;
  std::size_t line_count = 0;
};

std::string_view strip_comment(std::string_view line) {
  const auto pos = line.find('%');
  return pos == std::string_view::npos ? line : line.substr(0, pos);
}

// Splits "a b\tc;" into numeric columns.
std::vector<double> parse_columns(std::string_view body, std::size_t line) {
  std::vector<double> cols;
  std::size_t i = 0;
  while (i < body.size()) {
    while (i < body.size() && (std::isspace(static_cast<unsigned char>(body[i])) ||
                               body[i] == ',' || body[i] == ';')) {
      ++i;
    }
    const std::size_t start = i;
    while (i < body.size() && !std::isspace(static_cast<unsigned char>(body[i])) &&
           body[i] != ',' && body[i] != ';') {
      ++i;
    }
    if (i > start) {
      double v = 0.0;
      if (!text::parse_double(body.substr(start, i - start), v)) {
        throw ParseError("non-numeric value '" + std::string(body.substr(start, i - start)) + "'",
                         line);
      }
      cols.push_back(v);
    }
  }
  return cols;
}

RawSections scan(std::string_view input) {
  RawSections raw;
  const auto lines = text::split_lines(input);
  raw.line_count = lines.size();
  std::string open_table;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    std::string_view line = text::trim(strip_comment(lines[n]));
    if (line.empty()) continue;

    if (!open_table.empty()) {
      const auto close = line.find(']');
      std::string_view body = close == std::string_view::npos ? line : line.substr(0, close);
      auto cols = parse_columns(body, line_no);
      if (!cols.empty()) raw.tables[open_table].push_back({line_no, std::move(cols)});
      if (close != std::string_view::npos) open_table.clear();
      continue;
    }

    if (!line.starts_with("mpc.")) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    const std::string name(text::trim(line.substr(4, eq - 4)));
    std::string_view rhs = text::trim(line.substr(eq + 1));

    if (name == "baseMVA") {
      if (rhs.ends_with(';')) rhs.remove_suffix(1);
      double v = 0.0;
      if (!text::parse_double(rhs, v) || v <= 0.0) {
        throw ParseError("invalid baseMVA", line_no);
      }
      raw.base_mva = v;
      raw.base_line = line_no;
    } else if (rhs.starts_with('[')) {
      if (raw.header_lines.contains(name)) {
        throw ParseError("duplicate section mpc." + name, line_no);
      }
      raw.header_lines[name] = line_no;
      raw.tables[name];
      rhs.remove_prefix(1);
      const auto close = rhs.find(']');
      std::string_view body = close == std::string_view::npos ? rhs : rhs.substr(0, close);
      auto cols = parse_columns(body, line_no);
      if (!cols.empty()) raw.tables[name].push_back({line_no, std::move(cols)});
      if (close == std::string_view::npos) open_table = name;
    }
  }
  if (!open_table.empty()) {
    throw ParseError("unterminated section mpc." + open_table, raw.line_count);
  }
  return raw;
}

const std::vector<Row>& require_table(const RawSections& raw, const std::string& name) {
  const auto it = raw.tables.find(name);
  if (it == raw.tables.end()) {
    throw ParseError("missing section mpc." + name, raw.line_count);
  }
  return it->second;
}

void require_cols(const Row& row, std::size_t n, const char* section) {
  if (row.cols.size() < n) {
    throw ParseError(std::string(section) + " row needs at least " + std::to_string(n) +
                         " columns, found " + std::to_string(row.cols.size()),
                     row.line);
  }
}

int as_int(double v, std::size_t line, const char* what) {
  if (v != std::floor(v) || std::fabs(v) > 1e9) {
    throw ParseError(std::string(what) + " must be an integer", line);
  }
  return static_cast<int>(v);
}

// Finds the raw value r with r / scale == value exactly, so that the parse
// division reproduces the stored per-unit double.
double encode_divided(double value, double scale) {
  double r = value * scale;
  if (r / scale == value) return r;
  double up = r;
  double down = r;
  for (int i = 0; i < 64; ++i) {
    up = std::nextafter(up, INFINITY);
    if (up / scale == value) return up;
    down = std::nextafter(down, -INFINITY);
    if (down / scale == value) return down;
  }
  return r;
}

double encode_degrees(double radians) {
  double r = radians / kDegToRad;
  if (r * kDegToRad == radians) return r;
  double up = r;
  double down = r;
  for (int i = 0; i < 64; ++i) {
    up = std::nextafter(up, INFINITY);
    if (up * kDegToRad == radians) return up;
    down = std::nextafter(down, -INFINITY);
    if (down * kDegToRad == radians) return down;
  }
  return r;
}

int kind_code(BusKind kind) {
  switch (kind) {
    case BusKind::pq: return 1;
    case BusKind::pv: return 2;
    case BusKind::slack: return 3;
  }
  return 1;
}

}  // namespace

std::size_t GridCase::bus_index(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return i;
  }
  throw DomainError("unknown bus id " + std::to_string(id));
}

std::size_t GridCase::slack_index() const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].kind == BusKind::slack) return i;
  }
  throw DomainError("no slack bus");
}

void GridCase::validate() const {
  if (!(base_mva > 0.0)) throw DomainError("base_mva must be positive");
  if (buses.empty()) throw DomainError("case has no buses");
  std::set<int> ids;
  std::size_t slack_count = 0;
  for (const auto& b : buses) {
    if (!ids.insert(b.id).second) throw DomainError("duplicate bus id " + std::to_string(b.id));
    if (b.kind == BusKind::slack) ++slack_count;
  }
  if (slack_count == 0) throw DomainError("no slack bus");
  if (slack_count > 1) throw DomainError("more than one slack bus");
  for (std::size_t k = 0; k < branches.size(); ++k) {
    const auto& br = branches[k];
    const std::string tag = "branch " + std::to_string(k + 1);
    if (!ids.contains(br.from) || !ids.contains(br.to)) {
      throw DomainError(tag + " references an unknown bus");
    }
    if (!br.in_service) continue;
    if (br.r < 0.0) throw DomainError(tag + " has negative resistance");
    if (br.x == 0.0) throw DomainError(tag + " has zero reactance");
    if (!(br.tap > 0.0)) throw DomainError(tag + " has non-positive tap");
  }
  std::set<int> gen_buses;
  for (const auto& g : gens) {
    if (!ids.contains(g.bus)) {
      throw DomainError("generator at unknown bus " + std::to_string(g.bus));
    }
    gen_buses.insert(g.bus);
  }
  for (const auto& b : buses) {
    if (b.kind == BusKind::pv && !gen_buses.contains(b.id)) {
      throw DomainError("PV bus " + std::to_string(b.id) + " hosts no generator");
    }
  }
}

GridCase parse_case(std::string_view input) {
  const RawSections raw = scan(input);
  if (!raw.base_mva) throw ParseError("missing section mpc.baseMVA", raw.line_count);
  const auto& bus_rows = require_table(raw, "bus");
  const auto& gen_rows = require_table(raw, "gen");
  const auto& branch_rows = require_table(raw, "branch");

  GridCase out;
  out.base_mva = *raw.base_mva;
  const double base = out.base_mva;

  std::set<int> ids;
  for (const auto& row : bus_rows) {
    require_cols(row, 9, "bus");
    Bus b;
    b.id = as_int(row.cols[0], row.line, "bus id");
    if (!ids.insert(b.id).second) {
      throw ParseError("duplicate bus id " + std::to_string(b.id), row.line);
    }
    switch (as_int(row.cols[1], row.line, "bus type")) {
      case 1: b.kind = BusKind::pq; break;
      case 2: b.kind = BusKind::pv; break;
      case 3: b.kind = BusKind::slack; break;
      default: throw ParseError("unsupported bus type", row.line);
    }
    b.p_load = row.cols[2] / base;
    b.q_load = row.cols[3] / base;
    b.g_shunt = row.cols[4] / base;
    b.b_shunt = row.cols[5] / base;
    b.v_mag_init = row.cols[7];
    b.v_ang_init = row.cols[8] * kDegToRad;
    out.buses.push_back(b);
  }
  const std::size_t bus_header = raw.header_lines.at("bus");
  std::size_t slack_count = 0;
  for (std::size_t i = 0; i < out.buses.size(); ++i) {
    if (out.buses[i].kind == BusKind::slack && ++slack_count > 1) {
      throw ParseError("more than one slack bus", bus_rows[i].line);
    }
  }
  if (slack_count == 0) throw ParseError("no slack bus", bus_header);

  std::set<int> gen_buses;
  for (const auto& row : gen_rows) {
    require_cols(row, 8, "gen");
    Generator g;
    g.bus = as_int(row.cols[0], row.line, "generator bus");
    if (!ids.contains(g.bus)) {
      throw ParseError("generator at unknown bus " + std::to_string(g.bus), row.line);
    }
    if (row.cols[7] <= 0.0) continue;  // out of service
    g.p_set = row.cols[1] / base;
    g.q_max = row.cols[3] / base;
    g.q_min = row.cols[4] / base;
    g.v_set = row.cols[5];
    out.gens.push_back(g);
    gen_buses.insert(g.bus);
  }
  for (std::size_t i = 0; i < out.buses.size(); ++i) {
    const auto& b = out.buses[i];
    if (b.kind == BusKind::pv && !gen_buses.contains(b.id)) {
      throw ParseError("PV bus " + std::to_string(b.id) + " hosts no generator",
                       bus_rows[i].line);
    }
  }

  for (const auto& row : branch_rows) {
    require_cols(row, 11, "branch");
    Branch br;
    br.from = as_int(row.cols[0], row.line, "branch from-bus");
    br.to = as_int(row.cols[1], row.line, "branch to-bus");
    if (!ids.contains(br.from) || !ids.contains(br.to)) {
      throw ParseError("branch references an unknown bus", row.line);
    }
    br.r = row.cols[2];
    br.x = row.cols[3];
    br.b_charging = row.cols[4];
    br.tap = row.cols[8] == 0.0 ? 1.0 : row.cols[8];
    br.shift = row.cols[9] * kDegToRad;
    br.in_service = row.cols[10] > 0.0;
    if (br.in_service) {
      if (br.x == 0.0) throw ParseError("zero reactance branch", row.line);
      if (br.r < 0.0) throw ParseError("negative resistance branch", row.line);
      if (br.tap <= 0.0) throw ParseError("non-positive tap ratio", row.line);
    }
    out.branches.push_back(br);
  }

  if (const auto it = raw.tables.find("pu_exact"); it != raw.tables.end()) {
    for (const auto& row : it->second) {
      require_cols(row, 4, "pu_exact");
      const int table = as_int(row.cols[0], row.line, "pu_exact table");
      const int index = as_int(row.cols[1], row.line, "pu_exact row");
      const int col = as_int(row.cols[2], row.line, "pu_exact column");
      double* field = nullptr;
      auto pick = [&](auto& rows) -> decltype(&rows[0]) {
        if (index < 1 || static_cast<std::size_t>(index) > rows.size()) return nullptr;
        return &rows[static_cast<std::size_t>(index - 1)];
      };
      if (table == 1) {
        if (auto* b = pick(out.buses)) {
          field = col == 3 ? &b->p_load : col == 4 ? &b->q_load : col == 5 ? &b->g_shunt
                : col == 6 ? &b->b_shunt : col == 9 ? &b->v_ang_init : nullptr;
        }
      } else if (table == 2) {
        if (auto* g = pick(out.gens)) {
          field = col == 2 ? &g->p_set : col == 4 ? &g->q_max : col == 5 ? &g->q_min : nullptr;
        }
      } else if (table == 3) {
        if (auto* br = pick(out.branches)) field = col == 10 ? &br->shift : nullptr;
      }
      if (field == nullptr) throw ParseError("pu_exact entry names no known field", row.line);
      *field = row.cols[3];
    }
  }
  return out;
}

std::string serialize_case(const GridCase& c) {
  const double base = c.base_mva;
  std::ostringstream os;
  auto num = [](double v) { return text::exact(v); };

  // Some per-unit doubles have no MW (or degree) decimal that converts back
  // to the same bits. Those go into mpc.pu_exact as (table, row, column,
  // per-unit value) so the file stays a lossless record.
  std::vector<std::array<double, 4>> overrides;
  auto mw = [&](double value, int table, std::size_t row, int col) {
    const double r = encode_divided(value, base);
    if (r / base != value) overrides.push_back({double(table), double(row + 1), double(col), value});
    return num(r);
  };
  auto deg = [&](double value, int table, std::size_t row, int col) {
    const double r = encode_degrees(value);
    if (r * kDegToRad != value) overrides.push_back({double(table), double(row + 1), double(col), value});
    return num(r);
  };

  os << "function mpc = gridsigma_case\n";
  os << "mpc.version = '2';\n";
  os << "mpc.baseMVA = " << num(base) << ";\n\n";
  os << "%% bus data\n";
  os << "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\n";
  os << "mpc.bus = [\n";
  for (std::size_t i = 0; i < c.buses.size(); ++i) {
    const auto& b = c.buses[i];
    os << '\t' << b.id << '\t' << kind_code(b.kind) << '\t' << mw(b.p_load, 1, i, 3) << '\t'
       << mw(b.q_load, 1, i, 4) << '\t' << mw(b.g_shunt, 1, i, 5) << '\t' << mw(b.b_shunt, 1, i, 6)
       << "\t1\t" << num(b.v_mag_init) << '\t' << deg(b.v_ang_init, 1, i, 9) << "\t0\t1\t1.1\t0.9;\n";
  }
  os << "];\n\n%% generator data\n";
  os << "%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\n";
  os << "mpc.gen = [\n";
  for (std::size_t i = 0; i < c.gens.size(); ++i) {
    const auto& g = c.gens[i];
    const std::string pg = mw(g.p_set, 2, i, 2);
    os << '\t' << g.bus << '\t' << pg << "\t0\t" << mw(g.q_max, 2, i, 4) << '\t'
       << mw(g.q_min, 2, i, 5) << '\t' << num(g.v_set) << '\t' << num(base) << "\t1\t" << pg
       << "\t0;\n";
  }
  os << "];\n\n%% branch data\n";
  os << "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\n";
  os << "mpc.branch = [\n";
  for (std::size_t i = 0; i < c.branches.size(); ++i) {
    const auto& br = c.branches[i];
    os << '\t' << br.from << '\t' << br.to << '\t' << num(br.r) << '\t' << num(br.x) << '\t'
       << num(br.b_charging) << "\t0\t0\t0\t" << num(br.tap) << '\t' << deg(br.shift, 3, i, 10)
       << '\t' << (br.in_service ? 1 : 0) << ";\n";
  }
  os << "];\n";
  if (!overrides.empty()) {
    os << "\n%% exact per-unit values\n";
    os << "%\ttable\trow\tcol\tvalue\n";
    os << "mpc.pu_exact = [\n";
    for (const auto& o : overrides) {
      os << '\t' << int(o[0]) << '\t' << int(o[1]) << '\t' << int(o[2]) << '\t' << num(o[3]) << ";\n";
    }
    os << "];\n";
  }
  return os.str();
}

}  // namespace gridsigma::grid
