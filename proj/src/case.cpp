#include "mmdae/case.hpp"

#include "mmdae/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace mmdae {

namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& what) { throw ValidationError(what); }

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) invalid(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) invalid(where + ": unknown key '" + key + "'");
  }
}

const json& required(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) invalid(where + ": missing required key '" + key + "'");
  return *it;
}

double number(const json& obj, const char* key, const std::string& where) {
  const json& v = required(obj, key, where);
  if (!v.is_number()) invalid(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return number(obj, key, where);
}

int integer(const json& obj, const char* key, const std::string& where) {
  const json& v = required(obj, key, where);
  if (!v.is_number_integer()) invalid(where + ": '" + key + "' must be an integer");
  return v.get<int>();
}

std::string text(const json& obj, const char* key, const std::string& where) {
  const json& v = required(obj, key, where);
  if (!v.is_string()) invalid(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

const json& array_or_empty(const json& obj, const char* key) {
  static const json empty = json::array();
  auto it = obj.find(key);
  if (it == obj.end()) return empty;
  if (!it->is_array()) invalid(std::string("case: '") + key + "' must be an array");
  return *it;
}

std::string element_id(const json& obj, const char* kind, std::size_t index) {
  std::string where = std::string(kind) + " #" + std::to_string(index);
  if (obj.is_object() && obj.contains("id")) {
    const json& id = obj["id"];
    if (id.is_string()) return std::string(kind) + " '" + id.get<std::string>() + "'";
    if (id.is_number_integer()) return std::string(kind) + " " + std::to_string(id.get<int>());
  }
  return where;
}

network::BusType bus_type(const std::string& s, const std::string& where) {
  if (s == "slack") return network::BusType::slack;
  if (s == "pv") return network::BusType::pv;
  if (s == "pq") return network::BusType::pq;
  invalid(where + ": bus type must be slack, pv or pq (got '" + s + "')");
}

EventAction event_action(const std::string& s, const std::string& where) {
  if (s == "trip" || s == "line_trip") return EventAction::line_trip;
  if (s == "reconnect" || s == "line_reconnect") return EventAction::line_reconnect;
  if (s == "set" || s == "set_discrete") return EventAction::set_discrete;
  invalid(where + ": unknown action '" + s + "'");
}

std::pair<int, int> line_col(std::string_view text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

void positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) invalid(what + " must be positive and finite");
}

}  // namespace

const GeneratorRecord* SystemCase::find_generator(const std::string& id) const {
  for (const auto& g : generators)
    if (g.params.id == id) return &g;
  return nullptr;
}

void SystemCase::validate() const {
  positive(base_mva, "case: base_mva");
  positive(base_freq, "case: base_freq");
  if (buses.empty()) invalid("case: no buses");

  std::unordered_set<int> bus_ids;
  int slack = 0;
  for (const auto& b : buses) {
    if (!bus_ids.insert(b.id).second) invalid("bus " + std::to_string(b.id) + ": duplicate id");
    if (b.type == network::BusType::slack) ++slack;
    positive(b.v0, "bus " + std::to_string(b.id) + ": v0");
  }
  if (slack != 1) invalid("case: exactly one slack bus required, found " + std::to_string(slack));

  std::unordered_set<std::string> line_ids;
  for (const auto& l : lines) {
    const std::string w = "line '" + l.id + "'";
    if (!line_ids.insert(l.id).second) invalid(w + ": duplicate id");
    if (!bus_ids.count(l.from)) invalid(w + ": unknown from-bus " + std::to_string(l.from));
    if (!bus_ids.count(l.to)) invalid(w + ": unknown to-bus " + std::to_string(l.to));
    if (l.from == l.to) invalid(w + ": from and to bus are the same");
    if (l.r == 0.0 && l.x == 0.0) invalid(w + ": zero series impedance");
    if (!std::isfinite(l.r) || !std::isfinite(l.x) || !std::isfinite(l.b))
      invalid(w + ": non-finite parameter");
  }

  std::unordered_set<std::string> load_ids;
  for (const auto& l : loads) {
    if (!load_ids.insert(l.id).second) invalid("load '" + l.id + "': duplicate id");
    if (!bus_ids.count(l.bus))
      invalid("load '" + l.id + "': unknown bus " + std::to_string(l.bus));
  }

  std::unordered_set<std::string> gen_ids;
  std::unordered_set<int> gen_buses;
  for (const auto& g : generators) {
    const auto& p = g.params;
    const std::string w = "generator '" + p.id + "'";
    if (!gen_ids.insert(p.id).second) invalid(w + ": duplicate id");
    if (!bus_ids.count(p.bus)) invalid(w + ": unknown bus " + std::to_string(p.bus));
    if (!gen_buses.insert(p.bus).second)
      invalid(w + ": bus " + std::to_string(p.bus) + " already has a generator");
    for (const auto& b : buses)
      if (b.id == p.bus && b.type == network::BusType::pq)
        invalid(w + ": generators must sit on a slack or pv bus");
    positive(g.mva, w + ": mva");
    p.validate();
  }

  std::unordered_set<std::string> exc_gens, gov_gens, ctrl_ids;
  for (const auto& e : exciters) {
    const std::string w = "exciter '" + e.id + "'";
    if (!ctrl_ids.insert(e.id).second) invalid(w + ": duplicate id");
    if (!gen_ids.count(e.generator)) invalid(w + ": unknown generator '" + e.generator + "'");
    if (!exc_gens.insert(e.generator).second)
      invalid(w + ": generator '" + e.generator + "' already has an exciter");
    positive(e.ka, w + ": ka");
    if (!(e.ta >= 0.0)) invalid(w + ": ta must be nonnegative");
  }
  for (const auto& g : governors) {
    const std::string w = "governor '" + g.id + "'";
    if (!ctrl_ids.insert(g.id).second) invalid(w + ": duplicate id");
    if (!gen_ids.count(g.generator)) invalid(w + ": unknown generator '" + g.generator + "'");
    if (!gov_gens.insert(g.generator).second)
      invalid(w + ": generator '" + g.generator + "' already has a governor");
    positive(g.r, w + ": r");
    if (!(g.t1 >= 0.0 && g.t2 >= 0.0 && g.t3 >= 0.0))
      invalid(w + ": time constants must be nonnegative");
  }

  std::set<std::string> event_ids;
  for (const auto& e : events.events) {
    const std::string w = "event '" + e.id + "'";
    if (!event_ids.insert(e.id).second) invalid(w + ": duplicate id");
    if (!(e.time >= 0.0 && e.time <= simulation.tf))
      invalid(w + ": time " + std::to_string(e.time) + " outside [0, " +
              std::to_string(simulation.tf) + "]");
    if (e.action != EventAction::set_discrete && !line_ids.count(e.target))
      invalid(w + ": unknown line '" + e.target + "'");
  }

  positive(simulation.tf, "simulation: tf");
  positive(simulation.h, "simulation: h");
  parse_stepper(simulation.solver);
}

SystemCase parse_case(std::string_view source) {
  json doc;
  try {
    doc = json::parse(source.begin(), source.end());
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col(source, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError(e.what(), line, col);
  }
  check_keys(doc,
             {"schema_version", "name", "base_mva", "base_freq", "load_model", "buses", "lines",
              "loads", "generators", "exciters", "governors", "events", "simulation"},
             "case");
  const int version = integer(doc, "schema_version", "case");
  if (version != kCaseSchemaVersion)
    invalid("case: unsupported schema_version " + std::to_string(version));

  SystemCase c;
  c.name = doc.contains("name") ? text(doc, "name", "case") : std::string("unnamed");
  c.base_mva = number_or(doc, "base_mva", 100.0, "case");
  c.base_freq = number_or(doc, "base_freq", 60.0, "case");
  if (doc.contains("load_model")) {
    const std::string m = text(doc, "load_model", "case");
    if (m == "constant_impedance") c.load_model = LoadModel::constant_impedance;
    else if (m == "constant_power") c.load_model = LoadModel::constant_power;
    else invalid("case: load_model must be constant_impedance or constant_power");
  }

  const json& buses = array_or_empty(doc, "buses");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const json& b = buses[i];
    const std::string w = element_id(b, "bus", i);
    check_keys(b, {"id", "type", "v0", "theta0"}, w);
    network::BusRecord r;
    r.id = integer(b, "id", w);
    r.type = bus_type(text(b, "type", w), w);
    r.v0 = number_or(b, "v0", 1.0, w);
    r.theta0 = number_or(b, "theta0", 0.0, w);
    c.buses.push_back(r);
  }

  const json& lines = array_or_empty(doc, "lines");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const json& l = lines[i];
    const std::string w = element_id(l, "line", i);
    check_keys(l, {"id", "from", "to", "r", "x", "b", "in_service"}, w);
    network::LineRecord r;
    r.id = text(l, "id", w);
    r.from = integer(l, "from", w);
    r.to = integer(l, "to", w);
    r.r = number_or(l, "r", 0.0, w);
    r.x = number(l, "x", w);
    r.b = number_or(l, "b", 0.0, w);
    if (l.contains("in_service")) {
      if (!l["in_service"].is_boolean()) invalid(w + ": 'in_service' must be a boolean");
      r.in_service = l["in_service"].get<bool>();
    }
    c.lines.push_back(r);
  }

  const json& loads = array_or_empty(doc, "loads");
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const json& l = loads[i];
    const std::string w = element_id(l, "load", i);
    check_keys(l, {"id", "bus", "p", "q"}, w);
    c.loads.push_back({text(l, "id", w), integer(l, "bus", w), number(l, "p", w),
                       number_or(l, "q", 0.0, w)});
  }

  const double omega_base = 2.0 * std::numbers::pi * c.base_freq;
  const json& gens = array_or_empty(doc, "generators");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const json& g = gens[i];
    const std::string w = element_id(g, "generator", i);
    check_keys(g,
               {"id", "bus", "p", "mva", "xd", "xq", "xd1", "xq1", "xd2", "xl", "ra", "td10",
                "tq10", "td20", "tq20", "h", "d"},
               w);
    GeneratorRecord r;
    r.mva = number_or(g, "mva", c.base_mva, w);
    positive(r.mva, w + ": mva");
    const double zk = c.base_mva / r.mva;  // machine base -> system base for impedances
    auto& p = r.params;
    p.id = text(g, "id", w);
    p.bus = integer(g, "bus", w);
    p.xd = number(g, "xd", w) * zk;
    p.xq = number(g, "xq", w) * zk;
    p.xd1 = number(g, "xd1", w) * zk;
    p.xq1 = number(g, "xq1", w) * zk;
    p.xpp = number(g, "xd2", w) * zk;
    p.xl = number(g, "xl", w) * zk;
    p.ra = number_or(g, "ra", 0.0, w) * zk;
    p.td10 = number(g, "td10", w);
    p.tq10 = number(g, "tq10", w);
    p.td20 = number(g, "td20", w);
    p.tq20 = number(g, "tq20", w);
    p.h = number(g, "h", w) / zk;
    p.d = number_or(g, "d", 0.0, w) / zk;
    p.omega_base = omega_base;
    r.p = number_or(g, "p", 0.0, w);
    c.generators.push_back(r);
  }

  const json& excs = array_or_empty(doc, "exciters");
  for (std::size_t i = 0; i < excs.size(); ++i) {
    const json& e = excs[i];
    const std::string w = element_id(e, "exciter", i);
    check_keys(e, {"id", "generator", "ka", "ta"}, w);
    machines::ExciterParams r;
    r.id = text(e, "id", w);
    r.generator = text(e, "generator", w);
    r.ka = number(e, "ka", w);
    r.ta = number(e, "ta", w);
    c.exciters.push_back(r);
  }

  const json& govs = array_or_empty(doc, "governors");
  for (std::size_t i = 0; i < govs.size(); ++i) {
    const json& g = govs[i];
    const std::string w = element_id(g, "governor", i);
    check_keys(g, {"id", "generator", "r", "t1", "t2", "t3"}, w);
    machines::GovernorParams r;
    r.id = text(g, "id", w);
    r.generator = text(g, "generator", w);
    r.r = number(g, "r", w);  // machine base until converted below
    r.t1 = number(g, "t1", w);
    r.t2 = number_or(g, "t2", 0.0, w);
    r.t3 = number_or(g, "t3", 0.0, w);
    c.governors.push_back(r);
  }
  for (auto& g : c.governors) {
    // Droop is given on the machine base; tm lives on the system base.
    if (const GeneratorRecord* gen = c.find_generator(g.generator))
      g.r *= c.base_mva / gen->mva;
  }

  const json& evs = array_or_empty(doc, "events");
  for (std::size_t i = 0; i < evs.size(); ++i) {
    const json& e = evs[i];
    const std::string w = element_id(e, "event", i);
    check_keys(e, {"id", "time", "action", "target", "value"}, w);
    Event r;
    r.id = text(e, "id", w);
    r.time = number(e, "time", w);
    r.action = event_action(text(e, "action", w), w);
    r.target = text(e, "target", w);
    r.payload = number_or(e, "value", 0.0, w);
    c.events.events.push_back(r);
  }

  if (doc.contains("simulation")) {
    const json& s = doc["simulation"];
    check_keys(s, {"tf", "solver", "h", "rtol", "atol"}, "simulation");
    c.simulation.tf = number_or(s, "tf", c.simulation.tf, "simulation");
    if (s.contains("solver")) c.simulation.solver = text(s, "solver", "simulation");
    c.simulation.h = number_or(s, "h", c.simulation.h, "simulation");
    if (s.contains("rtol")) c.simulation.rtol = number(s, "rtol", "simulation");
    if (s.contains("atol")) c.simulation.atol = number(s, "atol", "simulation");
  }

  std::unordered_map<int, std::size_t> pos;
  for (std::size_t i = 0; i < c.buses.size(); ++i) pos[c.buses[i].id] = i;
  c.validate();
  for (const auto& l : c.loads) {
    auto& b = c.buses[pos.at(l.bus)];
    b.p_load += l.p;
    b.q_load += l.q;
  }
  c.events.validate(0.0, c.simulation.tf);
  return c;
}

SystemCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open case file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_case(buf.str());
}

}  // namespace mmdae
