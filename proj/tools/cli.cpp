#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "latticegap/config.hpp"
#include "latticegap/errors.hpp"
#include "latticegap/finite_oracle.hpp"
#include "latticegap/localized.hpp"
#include "latticegap/modes.hpp"
#include "latticegap/output.hpp"
#include "latticegap/parallel.hpp"

namespace latticegap::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

struct Common {
  std::string config;
  double m1 = 0.0;
  double m2 = 0.0;
  double mass = 1.0;
  int n1 = 1;
  int n2 = 1;
  std::string out;
  unsigned threads = 0;
  double tol = 1e-10;
  std::size_t grid = 64;
  double omega_max = 0.0;
  std::uint64_t seed = 1;

  CLI::Option* m1_opt = nullptr;
  CLI::Option* m2_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* tol_opt = nullptr;
  CLI::Option* grid_opt = nullptr;
  CLI::Option* omega_max_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

struct Context {
  RunConfig cfg;
  OutputMeta meta;
};

Context resolve(const Common& c, const std::string& command) {
  Context ctx;
  const bool inline_spec = c.m1_opt->count() > 0 || c.m2_opt->count() > 0;
  if (!c.config.empty()) {
    if (inline_spec) throw UsageError("--m1/--m2 cannot be combined with --config");
    ctx.cfg = load_config(c.config);
  } else {
    ctx.cfg.spec = uniform_square(c.n1, c.n2, c.mass, c.m1, c.m2);
    ctx.cfg.spec.validate();
  }
  if (c.tol_opt->count()) {
    if (!(c.tol > 0.0)) throw UsageError("--tol must be positive");
    ctx.cfg.tol = c.tol;
  }
  if (c.grid_opt->count()) {
    if (c.grid < 64) throw UsageError("--grid must be at least 64");
    ctx.cfg.grid = c.grid;
  }
  if (c.omega_max_opt->count()) {
    if (!(c.omega_max > 0.0)) throw UsageError("--omega-max must be positive");
    ctx.cfg.omega_max = c.omega_max;
  }
  if (c.seed_opt->count()) ctx.cfg.seed = c.seed;
  if (c.threads_opt->count()) ctx.cfg.threads = c.threads;
  set_max_threads(ctx.cfg.threads);

  ctx.meta.command = command;
  ctx.meta.spec_hash = ctx.cfg.spec.hash();
  ctx.meta.add("tol", ctx.cfg.tol);
  ctx.meta.add("grid", std::to_string(ctx.cfg.grid));
  ctx.meta.add("seed", std::to_string(ctx.cfg.seed));
  return ctx;
}

ProjectionOptions projection_options(const RunConfig& c) {
  ProjectionOptions p;
  p.grid = c.grid;
  return p;
}

GuidedOptions guided_options(const RunConfig& c) {
  GuidedOptions g;
  g.tol = c.tol;
  g.projection = projection_options(c);
  return g;
}

LocalizedOptions localized_options(const RunConfig& c) {
  LocalizedOptions l;
  l.tol = c.tol;
  l.guided = guided_options(c);
  return l;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("write to " + path + " failed");
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json intervals_json(const IntervalSet& set) {
  json a = json::array();
  for (const auto& iv : set) a.push_back({json_number(iv.lo), json_number(iv.hi)});
  return a;
}

// (m1, m2) when the spec is the homogeneous unit-mass square lattice the
// closed forms describe.
std::optional<std::pair<double, double>> uniform_parameters(const LatticeSpec& spec) {
  if (spec.n1 != 1 || spec.n2 != 1 || spec.masses[0] != 1.0) return std::nullopt;
  if (spec.links != square_links(1, 1)) return std::nullopt;
  return std::pair{spec.strip_perturbation[0], spec.point_perturbation[0]};
}

json classification_json(const ExistenceReport& r) {
  json j;
  j["case"] = to_string(r.case_id);
  j["gaps"] = json::array();
  for (const auto& g : r.gaps) {
    j["gaps"].push_back(
        {{"name", g.name}, {"lo", json_number(g.gap.lo)}, {"hi", json_number(g.gap.hi)},
         {"modes", g.modes}});
  }
  j["total_modes"] = r.total_modes();
  return j;
}

json thresholds_json(const ExistenceReport& r) {
  json j;
  j["d1_band_top"] = r.d1_band_top ? json_number(*r.d1_band_top) : json(nullptr);
  j["m2_threshold"] = r.threshold ? json_number(*r.threshold) : json(nullptr);
  return j;
}

json gaps_json(const GapStructure& gs) {
  json a = json::array();
  for (std::size_t i = 0; i < gs.gaps.size(); ++i) {
    const bool open = gs.tail && i + 1 == gs.gaps.size();
    a.push_back({{"lo", json_number(gs.gaps[i].lo)},
                 {"hi", open ? json_number(std::numeric_limits<double>::infinity())
                             : json_number(gs.gaps[i].hi)},
                 {"unbounded", open}});
  }
  return a;
}

json localized_json(const LatticeSpec& spec, const LocalizedModes& lm) {
  json data;
  data["i_p"] = intervals_json(lm.gaps.i_p);
  data["i_g"] = intervals_json(lm.gaps.i_g);
  data["gaps"] = gaps_json(lm.gaps);
  data["roots"] = json::array();
  for (const auto& m : lm.modes) {
    data["roots"].push_back({{"omega", json_number(m.omega)},
                             {"gap", m.gap},
                             {"realness", json_number(m.realness)}});
  }
  data["unresolved"] = intervals_json(IntervalSet(lm.unresolved));
  if (const auto u = uniform_parameters(spec)) {
    const auto r = classify_existence(u->first, u->second);
    data["classification"] = classification_json(r);
    data["thresholds"] = thresholds_json(r);
  } else {
    data["classification"] = nullptr;
    data["thresholds"] = nullptr;
  }
  return data;
}

int gap_index(const GapStructure& gs, double omega) {
  for (std::size_t i = 0; i < gs.gaps.size(); ++i) {
    const bool open = gs.tail && i + 1 == gs.gaps.size();
    if (omega > gs.gaps[i].lo && (open || omega < gs.gaps[i].hi)) return static_cast<int>(i);
  }
  return -1;
}

// D_loc on a uniform omega grid; points off the gaps are skipped and points
// where the nested quadrature gives up are written as nan.
void dloc_rows(const LatticeSpec& spec, const GapStructure& gs, double lo, double hi,
               std::size_t samples, double tol, CsvWriter& w) {
  for (std::size_t i = 0; i < samples; ++i) {
    const double omega = lo + (hi - lo) * static_cast<double>(i) / (samples - 1);
    const int g = gap_index(gs, omega);
    if (g < 0) continue;
    double re = kNaN, im = kNaN;
    try {
      const auto d = d_loc(spec, omega, gs, tol);
      re = d.value.real();
      im = d.value.imag();
    } catch (const SpectrumViolation&) {
      continue;
    } catch (const NonConvergence&) {
    }
    w.row({omega, static_cast<long long>(g), re, im});
  }
}

std::vector<double> k1_samples(std::size_t n) {
  if (n < 2) throw UsageError("need at least 2 k1 samples");
  std::vector<double> k(n);
  for (std::size_t j = 0; j < n; ++j) k[j] = -kPi + 2.0 * kPi * static_cast<double>(j) / (n - 1);
  return k;
}

// ---- subcommands ----------------------------------------------------------

void cmd_bands(const Common& c, std::size_t g1, std::size_t g2, std::ostream& out) {
  auto ctx = resolve(c, "bands");
  ctx.meta.add("grid1", std::to_string(g1));
  ctx.meta.add("grid2", std::to_string(g2));
  const auto t = dispersion_table(ctx.cfg.spec, g1, g2);
  std::ostringstream s;
  CsvWriter w(s, ctx.meta, {"k1", "k2", "branch", "omega"});
  for (std::size_t i = 0; i < t.axis.size(); ++i) {
    for (std::size_t b = 0; b < t.branches[i].size(); ++b) {
      w.row({t.axis[i].k1, t.axis[i].k2, static_cast<long long>(b), t.branches[i][b]});
    }
  }
  write_text(c.out, s.str(), out);
}

void cmd_project(const Common& c, const std::string& which, CLI::Option* k1_opt, double k1,
                 std::ostream& out) {
  auto ctx = resolve(c, "project");
  IntervalSet set;
  json data;
  if (which == "g") {
    if (k1_opt->count()) throw UsageError("--k1 applies to the propagative projection only");
    set = guided_projection(ctx.cfg.spec, guided_options(ctx.cfg));
    data["set"] = "I_g";
  } else if (k1_opt->count()) {
    set = propagative_projection_k1(ctx.cfg.spec, k1, projection_options(ctx.cfg));
    data["set"] = "I_p(k1)";
    data["k1"] = json_number(k1);
  } else {
    set = propagative_projection_full(ctx.cfg.spec, projection_options(ctx.cfg));
    data["set"] = "I_p";
  }
  data["intervals"] = intervals_json(set);
  write_text(c.out, dump(json_document(ctx.meta, data)), out);
}

void cmd_guided(const Common& c, CLI::Option* k1_opt, double k1, std::size_t samples,
                std::string sidecar, std::ostream& out) {
  auto ctx = resolve(c, "guided");
  const auto ks = k1_opt->count() ? std::vector<double>{k1} : k1_samples(samples);
  ctx.meta.add("k1_samples", std::to_string(ks.size()));
  const auto opt = guided_options(ctx.cfg);

  std::ostringstream s;
  CsvWriter w(s, ctx.meta, {"k1", "branch", "omega_g"});
  json side;
  side["k1"] = json::array();
  side["ip"] = json::array();
  side["unresolved"] = json::array();
  for (double k : ks) {
    const auto spec = guided_spectrum(ctx.cfg.spec, k, opt);
    for (std::size_t b = 0; b < spec.roots.size(); ++b) {
      w.row({k, static_cast<long long>(b), spec.roots[b].omega});
    }
    side["k1"].push_back(json_number(k));
    side["ip"].push_back(intervals_json(spec.band));
    side["unresolved"].push_back(intervals_json(IntervalSet(spec.unresolved)));
  }
  write_text(c.out, s.str(), out);
  if (sidecar.empty() && !c.out.empty() && c.out != "-") sidecar = c.out + ".ip.json";
  if (!sidecar.empty()) write_text(sidecar, dump(json_document(ctx.meta, side)), out);
}

void cmd_localized(const Common& c, std::ostream& out) {
  auto ctx = resolve(c, "localized");
  const auto opt = localized_options(ctx.cfg);
  const auto gs = gap_structure(ctx.cfg.spec, ctx.cfg.omega_max.value_or(0.0), opt);
  ctx.meta.add("omega_max", gs.omega_max);
  const auto lm = localized_modes(ctx.cfg.spec, gs, opt);
  write_text(c.out, dump(json_document(ctx.meta, localized_json(ctx.cfg.spec, lm))), out);
}

void cmd_classify(const Common& c, std::ostream& out) {
  if (!c.m1_opt->count() || !c.m2_opt->count()) throw UsageError("classify needs --m1 and --m2");
  if (!c.config.empty()) throw UsageError("classify takes --m1/--m2, not --config");
  OutputMeta meta;
  meta.command = "classify";
  meta.spec_hash = uniform_square(1, 1, 1.0, c.m1, c.m2).hash();
  const auto r = classify_existence(c.m1, c.m2);
  json data;
  data["m1"] = json_number(c.m1);
  data["m2"] = json_number(c.m2);
  data["classification"] = classification_json(r);
  data["thresholds"] = thresholds_json(r);
  write_text(c.out, dump(json_document(meta, data)), out);
}

void cmd_region_map(const Common& c, double from, double to, std::size_t samples, bool log,
                    std::ostream& out) {
  if (!(from > 0.0) || !(to > from)) throw UsageError("need 0 < --from < --to");
  if (samples < 2) throw UsageError("need at least 2 samples");
  OutputMeta meta;
  meta.command = "region-map";
  meta.add("from", from);
  meta.add("to", to);
  meta.add("samples", std::to_string(samples));
  meta.add("spacing", log ? "log" : "linear");
  std::ostringstream s;
  CsvWriter w(s, meta, {"m_tilde", "m_bar_boundary"});
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / (samples - 1);
    const double m = log ? from * std::pow(to / from, t) : from + (to - from) * t;
    w.row({m, region_boundary(m)});
  }
  write_text(c.out, s.str(), out);
}

void cmd_dloc_trace(const Common& c, double lo, CLI::Option* hi_opt, double hi,
                    std::size_t samples, std::ostream& out) {
  auto ctx = resolve(c, "dloc-trace");
  if (samples < 2) throw UsageError("need at least 2 samples");
  const auto opt = localized_options(ctx.cfg);
  const auto gs = gap_structure(ctx.cfg.spec, ctx.cfg.omega_max.value_or(0.0), opt);
  if (!hi_opt->count()) hi = gs.omega_max;
  if (!(hi > lo) || lo < 0.0) throw UsageError("need 0 <= --omega-min < --omega-max");
  ctx.meta.add("omega_min", lo);
  ctx.meta.add("omega_max", hi);
  ctx.meta.add("samples", std::to_string(samples));
  std::ostringstream s;
  CsvWriter w(s, ctx.meta, {"omega", "gap", "d_loc", "d_loc_imag"});
  dloc_rows(ctx.cfg.spec, gs, lo, hi, samples, ctx.cfg.tol, w);
  write_text(c.out, s.str(), out);
}

void cmd_oracle(const Common& c, int width, int height, std::ostream& out) {
  auto ctx = resolve(c, "oracle");
  OracleOptions o;
  o.width = width;
  o.height = height;
  o.seed = static_cast<unsigned>(ctx.cfg.seed);
  ctx.meta.add("width", std::to_string(width));
  ctx.meta.add("height", std::to_string(height));
  ctx.meta.add("pr_threshold", o.pr_threshold);
  const auto gs = gap_structure(ctx.cfg.spec, ctx.cfg.omega_max.value_or(0.0),
                                localized_options(ctx.cfg));
  const auto rep = finite_oracle(ctx.cfg.spec, gs, o);
  json data;
  data["candidates"] = json::array();
  for (const auto& m : rep.candidates()) {
    data["candidates"].push_back({json_number(m.omega), json_number(m.participation_ratio)});
  }
  data["in_gap"] = json::array();
  for (const auto& m : rep.in_gaps) {
    data["in_gap"].push_back({{"omega", json_number(m.omega)},
                              {"gap", m.gap},
                              {"participation_ratio", json_number(m.participation_ratio)},
                              {"boundary_ratio", json_number(m.boundary_ratio)},
                              {"candidate", m.candidate}});
  }
  data["warnings"] = rep.warnings;
  write_text(c.out, dump(json_document(ctx.meta, data)), out);
}

void cmd_modeshape(const Common& c, CLI::Option* omega_opt, double omega, CLI::Option* k1_opt,
                   double k1, int window, std::ostream& out) {
  auto ctx = resolve(c, "modeshape");
  ReconstructionOptions ro;
  ro.window1 = ro.window2 = window;
  ro.tol = ctx.cfg.tol;
  ModeResult m;
  if (k1_opt->count()) {
    if (!omega_opt->count()) throw UsageError("a guided mode shape needs --omega and --k1");
    m = reconstruct_guided_mode(ctx.cfg.spec, k1, omega, ro);
    ctx.meta.add("kind", "guided");
    ctx.meta.add("k1", k1);
  } else {
    if (!omega_opt->count()) {
      const auto lm = localized_modes(ctx.cfg.spec, localized_options(ctx.cfg));
      if (lm.modes.empty()) throw DomainError("the spec has no localized mode; pass --omega");
      omega = lm.modes.front().omega;
    }
    m = reconstruct_localized_mode(ctx.cfg.spec, omega, ro);
    ctx.meta.add("kind", "localized");
  }
  ctx.meta.add("omega", m.omega);
  ctx.meta.add("window", std::to_string(window));
  ctx.meta.add("synthesis_points", std::to_string(m.synthesis_points));
  ctx.meta.add("decay_rate", m.decay_rate);
  ctx.meta.add("fit_r2", m.fit_r2);
  ctx.meta.add("participation_ratio", m.participation_ratio);
  std::ostringstream s;
  CsvWriter w(s, ctx.meta, {"n1", "n2", "re", "im", "abs"});
  for (Eigen::Index y = 0; y < m.shape.cols(); ++y) {
    for (Eigen::Index x = 0; x < m.shape.rows(); ++x) {
      const cplx u = m.shape(x, y);
      w.row({static_cast<long long>(x - m.origin_x), static_cast<long long>(y - m.origin_y),
             u.real(), u.imag(), std::abs(u)});
    }
  }
  write_text(c.out, s.str(), out);
}

// ---- repro ----------------------------------------------------------------

const std::vector<double> kFig1 = {-0.9, -0.5, 0.5, 2.0};
const std::vector<std::pair<double, double>> kFig2 = {{-0.9, -0.03}, {-0.9, 0.1}, {-0.9, 0.25},
                                                      {-0.9, 0.7},   {-0.5, -0.2}, {-0.5, 0.1},
                                                      {2.0, -2.6},   {2.0, -2.0}};

std::string panel_file(const std::filesystem::path& dir, int figure, std::size_t panel,
                       const std::string& ext) {
  return (dir / ("fig" + std::to_string(figure) + static_cast<char>('a' + panel) + ext)).string();
}

json repro_fig1(const Common& c, const std::filesystem::path& dir, std::size_t samples,
                std::ostream& out) {
  json files = json::array();
  for (std::size_t p = 0; p < kFig1.size(); ++p) {
    const double m1 = kFig1[p];
    Common pc = c;
    pc.m1 = m1;
    pc.m2 = 0.0;
    auto ctx = resolve(pc, "repro");
    ctx.meta.add("figure", "1" + std::string(1, static_cast<char>('a' + p)));
    ctx.meta.add("m1", m1);
    std::ostringstream s;
    CsvWriter w(s, ctx.meta, {"k1", "ip_lo", "ip_hi", "omega_g", "omega_g_closed_form"});
    const auto opt = guided_options(ctx.cfg);
    for (double k : k1_samples(samples)) {
      const auto g = guided_spectrum(ctx.cfg.spec, k, opt);
      const double numeric = g.roots.empty() ? kNaN : g.roots.front().omega;
      w.row({k, g.band.lower(), g.band.upper(), numeric, guided_closed_form(m1, k)});
    }
    const auto path = panel_file(dir, 1, p, ".csv");
    write_text(path, s.str(), out);
    files.push_back(path);
  }
  return files;
}

json repro_fig2(const Common& c, const std::filesystem::path& dir, std::size_t samples,
                std::ostream& out) {
  json files = json::array();
  for (std::size_t p = 0; p < kFig2.size(); ++p) {
    Common pc = c;
    pc.m1 = kFig2[p].first;
    pc.m2 = kFig2[p].second;
    auto ctx = resolve(pc, "repro");
    ctx.meta.add("figure", "2" + std::string(1, static_cast<char>('a' + p)));
    ctx.meta.add("m1", pc.m1);
    ctx.meta.add("m2", pc.m2);
    const auto opt = localized_options(ctx.cfg);
    const auto gs = gap_structure(ctx.cfg.spec, 0.0, opt);
    const auto lm = localized_modes(ctx.cfg.spec, gs, opt);
    double top = gs.i_p.unite(gs.i_g).upper();
    for (const auto& m : lm.modes) top = std::max(top, m.omega);
    top *= 1.25;

    std::ostringstream s;
    auto meta = ctx.meta;
    meta.add("omega_max", top);
    CsvWriter w(s, meta, {"omega", "gap", "d_loc", "d_loc_imag"});
    dloc_rows(ctx.cfg.spec, gs, 0.0, top, samples, ctx.cfg.tol, w);
    const auto csv = panel_file(dir, 2, p, ".csv");
    write_text(csv, s.str(), out);
    const auto js = panel_file(dir, 2, p, ".json");
    write_text(js, dump(json_document(ctx.meta, localized_json(ctx.cfg.spec, lm))), out);
    files.push_back(csv);
    files.push_back(js);
  }
  return files;
}

std::string repro_fig3(std::size_t samples) {
  OutputMeta meta;
  meta.command = "repro";
  meta.add("figure", "3");
  meta.add("limit", 0.75 - 1.0 / (2.0 * kPi));
  std::ostringstream s;
  CsvWriter w(s, meta, {"m_tilde", "m_bar_identity", "m_bar_threshold", "m_bar_boundary"});
  const double lo = 0.01, hi = 5.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double m = lo + (hi - lo) * static_cast<double>(i) / (samples - 1);
    const double m1 = m - 1.0;
    // M_bar = M_tilde - 1/D1(2 sqrt 2) exists off the band m1 in [-1/sqrt 2, 0]
    const bool threshold = m1 < -std::sqrt(0.5) || m1 > 0.0;
    w.row({m, m, threshold ? m - 1.0 / d1_at_band_top(m1) : kNaN, region_boundary(m)});
  }
  return s.str();
}

void cmd_repro(const Common& c, int figure, const std::string& out_dir, CLI::Option* samples_opt,
               std::size_t samples, std::ostream& out) {
  if (figure == 3) {
    write_text(c.out, repro_fig3(samples_opt->count() ? samples : 500), out);
    return;
  }
  if (!c.config.empty() || c.m1_opt->count() || c.m2_opt->count()) {
    throw UsageError("repro uses fixed figure parameters; drop --config/--m1/--m2");
  }
  const std::filesystem::path dir(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
  json data;
  data["figure"] = figure;
  if (figure == 1) {
    data["files"] = repro_fig1(c, dir, samples_opt->count() ? samples : 129, out);
  } else {
    data["files"] = repro_fig2(c, dir, samples_opt->count() ? samples : 400, out);
  }
  OutputMeta meta;
  meta.command = "repro";
  write_text(c.out, dump(json_document(meta, data)), out);
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message,
                 json extra = json::object()) {
  json e;
  e["kind"] = kind;
  e["message"] = message;
  for (auto& [k, v] : extra.items()) e[k] = v;
  json doc;
  doc["error"] = e;
  err << doc.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectra of square mass-spring lattices with line and point defects"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  app.fallthrough();

  Common c;
  app.add_option("--config", c.config, "YAML lattice/run configuration");
  c.m1_opt = app.add_option("--m1", c.m1, "strip mass increment (uniform square lattice)");
  c.m2_opt = app.add_option("--m2", c.m2, "point mass increment (uniform square lattice)");
  app.add_option("--mass", c.mass, "background mass of the uniform lattice");
  app.add_option("--n1", c.n1, "cell period along e1 (uniform lattice)");
  app.add_option("--n2", c.n2, "cell period along e2 (uniform lattice)");
  app.add_option("-o,--out", c.out, "output file (default stdout)");
  c.threads_opt = app.add_option("--threads", c.threads, "worker threads (0 = hardware)");
  c.tol_opt = app.add_option("--tol", c.tol, "quadrature tolerance");
  c.grid_opt = app.add_option("--grid", c.grid, "initial projection grid (>= 64)");
  c.omega_max_opt = app.add_option("--omega-max", c.omega_max, "top of the frequency window");
  c.seed_opt = app.add_option("--seed", c.seed, "seed for randomized starts");

  auto* bands = app.add_subcommand("bands", "Floquet branches on a k grid (CSV)");
  std::size_t g1 = 65, g2 = 65;
  bands->add_option("--grid1", g1, "k1 samples, both zone edges included");
  bands->add_option("--grid2", g2, "k2 samples, both zone edges included");

  auto* project = app.add_subcommand("project", "I_p, I_p(k1) or I_g (JSON)");
  std::string which = "p";
  double k1 = 0.0;
  project->add_option("--set", which, "p (propagative) or g (guided)")
      ->check(CLI::IsMember({"p", "g"}));
  auto* project_k1 = project->add_option("--k1", k1, "restrict I_p to one k1");

  auto* guided = app.add_subcommand("guided", "guided roots per k1 (CSV + JSON sidecar)");
  std::size_t k1_count = 33;
  std::string sidecar;
  auto* guided_k1 = guided->add_option("--k1", k1, "single k1");
  guided->add_option("--k1-samples", k1_count, "uniform k1 samples over [-pi, pi]");
  guided->add_option("--sidecar", sidecar, "JSON with I_p(k1) per sample (default <out>.ip.json)");

  auto* localized = app.add_subcommand("localized", "gaps, localized roots, classification (JSON)");

  auto* region = app.add_subcommand("region-map", "existence boundary M_bar(M_tilde) (CSV)");
  double from = 0.05, to = 10.0;
  std::size_t samples = 200;
  bool log = false;
  region->add_option("--from", from, "smallest m_tilde");
  region->add_option("--to", to, "largest m_tilde");
  region->add_option("--samples", samples, "number of samples");
  region->add_flag("--log", log, "log-spaced samples");

  auto* trace = app.add_subcommand("dloc-trace", "D_loc on an omega grid (CSV)");
  double w_lo = 0.0, w_hi = 0.0;
  std::size_t trace_samples = 400;
  trace->add_option("--omega-min", w_lo, "first omega");
  auto* trace_hi = trace->add_option("--omega-max-trace", w_hi, "last omega (default top of window)");
  trace->add_option("--samples", trace_samples, "number of omega samples");

  auto* oracle = app.add_subcommand("oracle", "finite clamped-lattice eigenmodes in the gaps (JSON)");
  int width = 61, height = 61;
  oracle->add_option("--width", width, "nodes along e1 (>= 41)");
  oracle->add_option("--height", height, "nodes along e2 (>= 41)");

  auto* shape = app.add_subcommand("modeshape", "real-space mode shape (CSV)");
  double omega = 0.0;
  int window = 21;
  auto* shape_omega = shape->add_option("--omega", omega, "mode frequency");
  auto* shape_k1 = shape->add_option("--k1", k1, "guided mode at this k1 (else localized)");
  shape->add_option("--window", window, "window size in cells (odd)");

  auto* classify = app.add_subcommand("classify", "existence verdict from the decision table (JSON)");

  auto* repro = app.add_subcommand("repro", "regenerate the data for figures 1-3");
  int figure = 0;
  std::string out_dir = ".";
  std::size_t repro_samples = 0;
  repro->add_option("--figure", figure, "1, 2 or 3")->required()->check(CLI::Range(1, 3));
  repro->add_option("--out-dir", out_dir, "directory for per-panel files (figures 1, 2)");
  auto* repro_samples_opt = repro->add_option("--samples", repro_samples, "samples per panel");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (*bands) cmd_bands(c, g1, g2, out);
    else if (*project) cmd_project(c, which, project_k1, k1, out);
    else if (*guided) cmd_guided(c, guided_k1, k1, k1_count, sidecar, out);
    else if (*localized) cmd_localized(c, out);
    else if (*region) cmd_region_map(c, from, to, samples, log, out);
    else if (*trace) cmd_dloc_trace(c, w_lo, trace_hi, w_hi, trace_samples, out);
    else if (*oracle) cmd_oracle(c, width, height, out);
    else if (*shape) cmd_modeshape(c, shape_omega, omega, shape_k1, k1, window, out);
    else if (*classify) cmd_classify(c, out);
    else if (*repro) cmd_repro(c, figure, out_dir, repro_samples_opt, repro_samples, out);
    return kOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    print_error(err, "UsageError", e.what());
    return kUsage;
  } catch (const SpecError& e) {
    json extra = json::object();
    if (e.line() > 0) extra["line"] = e.line();
    if (e.column() > 0) extra["column"] = e.column();
    print_error(err, "SpecError", e.what(), extra);
    return kUsage;
  } catch (const UsageError& e) {
    print_error(err, "UsageError", e.what());
    return kUsage;
  } catch (const IoError& e) {
    print_error(err, "IoError", e.what());
    return kIo;
  } catch (const SpectrumViolation& e) {
    print_error(err, "SpectrumViolation", e.what(), {{"omega", json_number(e.omega())}});
    return kDomain;
  } catch (const DomainError& e) {
    print_error(err, "DomainError", e.what());
    return kDomain;
  } catch (const NonConvergence& e) {
    print_error(err, "NonConvergence", e.what(), {{"achieved", json_number(e.achieved())}});
    return kNumeric;
  } catch (const std::exception& e) {
    print_error(err, "InternalError", e.what());
    return kInternal;
  }
}

}  // namespace latticegap::cli
