#include "latticegap/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "latticegap/errors.hpp"

namespace latticegap {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
  const auto mark = node.Mark();
  throw SpecError(what, mark.line >= 0 ? mark.line + 1 : -1,
                  mark.column >= 0 ? mark.column + 1 : -1);
}

void only_keys(const YAML::Node& map, const std::set<std::string>& allowed,
               const std::string& section) {
  if (!map.IsMap()) fail(map, "'" + section + "' must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in '" + section + "'");
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& name) {
  if (!node.IsScalar()) fail(node, "'" + name + "' must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, "'" + name + "' has the wrong type");
  }
}

// A number applied to `fill` nodes, or an explicit list of n values.
std::vector<double> per_node(const YAML::Node& node, const std::string& name, int n,
                             const std::vector<bool>& fill) {
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  if (node.IsScalar()) {
    const double v = scalar<double>(node, name);
    for (int i = 0; i < n; ++i) {
      if (fill[i]) out[i] = v;
    }
    return out;
  }
  if (!node.IsSequence()) fail(node, "'" + name + "' must be a number or a list");
  if (static_cast<int>(node.size()) != n) {
    fail(node, "'" + name + "' needs " + std::to_string(n) + " entries");
  }
  for (int i = 0; i < n; ++i) out[i] = scalar<double>(node[i], name);
  return out;
}

LatticeSpec parse_lattice(const YAML::Node& node) {
  only_keys(node,
            {"n1", "n2", "masses", "strip_perturbation", "point_perturbation",
             "strip_orientation", "adjacency"},
            "lattice");
  LatticeSpec spec;
  spec.n1 = node["n1"] ? scalar<int>(node["n1"], "n1") : 1;
  spec.n2 = node["n2"] ? scalar<int>(node["n2"], "n2") : 1;
  if (spec.n1 < 1 || spec.n2 < 1) fail(node, "n1 and n2 must be positive");
  const int n = spec.size();

  if (const auto o = node["strip_orientation"]) {
    if (scalar<std::string>(o, "strip_orientation") != "e1") {
      fail(o, "only strips along e1 are supported");
    }
  }
  const std::vector<bool> all(n, true);
  std::vector<bool> row(n, false), origin(n, false);
  for (int i1 = 0; i1 < spec.n1; ++i1) row[spec.node(i1, 0)] = true;
  origin[0] = true;

  if (!node["masses"]) fail(node, "'lattice' needs 'masses'");
  spec.masses = per_node(node["masses"], "masses", n, all);
  spec.strip_perturbation = node["strip_perturbation"]
                                ? per_node(node["strip_perturbation"], "strip_perturbation", n, row)
                                : std::vector<double>(n, 0.0);
  spec.point_perturbation = node["point_perturbation"]
                                ? per_node(node["point_perturbation"], "point_perturbation", n, origin)
                                : std::vector<double>(n, 0.0);

  const auto adj = node["adjacency"];
  if (!adj) fail(node, "'lattice' needs 'adjacency'");
  if (adj.IsScalar()) {
    if (scalar<std::string>(adj, "adjacency") != "square") {
      fail(adj, "the only builtin adjacency is 'square'");
    }
    spec.links = square_links(spec.n1, spec.n2);
  } else if (adj.IsSequence()) {
    for (const auto& item : adj) {
      only_keys(item, {"from", "to", "offset"}, "adjacency");
      if (!item["from"] || !item["to"]) fail(item, "a link needs 'from' and 'to'");
      Link l;
      l.from = scalar<int>(item["from"], "from");
      l.to = scalar<int>(item["to"], "to");
      if (const auto off = item["offset"]) {
        if (!off.IsSequence() || off.size() != 2) fail(off, "'offset' must be [o1, o2]");
        l.offset1 = scalar<int>(off[0], "offset");
        l.offset2 = scalar<int>(off[1], "offset");
      }
      spec.links.push_back(l);
    }
  } else {
    fail(adj, "'adjacency' must be 'square' or a list of links");
  }

  try {
    spec.validate();
  } catch (const SpecError& e) {
    fail(node, e.what());
  }
  return spec;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw SpecError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  only_keys(root, {"lattice", "run"}, "top level");
  if (!root["lattice"]) fail(root, "missing 'lattice' section");
  RunConfig cfg;
  cfg.spec = parse_lattice(root["lattice"]);
  if (const auto run = root["run"]) {
    only_keys(run, {"seed", "tol", "grid", "omega_max", "threads"}, "run");
    if (run["seed"]) cfg.seed = scalar<std::uint64_t>(run["seed"], "seed");
    if (run["tol"]) {
      cfg.tol = scalar<double>(run["tol"], "tol");
      if (!(cfg.tol > 0.0)) fail(run["tol"], "'tol' must be positive");
    }
    if (run["grid"]) {
      const int g = scalar<int>(run["grid"], "grid");
      if (g < 64) fail(run["grid"], "'grid' must be at least 64");
      cfg.grid = static_cast<std::size_t>(g);
    }
    if (run["omega_max"]) {
      cfg.omega_max = scalar<double>(run["omega_max"], "omega_max");
      if (!(*cfg.omega_max > 0.0)) fail(run["omega_max"], "'omega_max' must be positive");
    }
    if (run["threads"]) {
      const int t = scalar<int>(run["threads"], "threads");
      if (t < 0) fail(run["threads"], "'threads' must be >= 0");
      cfg.threads = static_cast<unsigned>(t);
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_yaml(const LatticeSpec& spec) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap << YAML::Key << "lattice" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n1" << YAML::Value << spec.n1;
  out << YAML::Key << "n2" << YAML::Value << spec.n2;
  out << YAML::Key << "masses" << YAML::Value << YAML::Flow << spec.masses;
  out << YAML::Key << "strip_perturbation" << YAML::Value << YAML::Flow << spec.strip_perturbation;
  out << YAML::Key << "point_perturbation" << YAML::Value << YAML::Flow << spec.point_perturbation;
  out << YAML::Key << "adjacency" << YAML::Value << YAML::BeginSeq;
  for (const auto& l : spec.links) {
    out << YAML::Flow << YAML::BeginMap << YAML::Key << "from" << YAML::Value << l.from
        << YAML::Key << "to" << YAML::Value << l.to << YAML::Key << "offset" << YAML::Value
        << YAML::Flow << std::vector<int>{l.offset1, l.offset2} << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace latticegap
