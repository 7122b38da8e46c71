// llab command line front end.
//
// Every run is described by one JSON config
//   {"command", "params", "seed", "output_dir", "format"}
// built either from flags (flag --foo-bar <-> params key foo_bar) or read
// from --config. Each run writes its artifacts plus manifest.json.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "llab/llab.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;
using namespace llab;

namespace {

enum class Kind { Real, Int, Str, Reals, Ints, Strs, Const };

struct FlagSpec {
  std::string flag;
  Kind kind;
  std::string help;
  std::string key = {};    // derived from flag when empty
  std::string value = {};  // Const only
};

std::string key_of(const FlagSpec& f) {
  if (!f.key.empty()) return f.key;
  std::string k = f.flag.substr(2);
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

std::vector<FlagSpec> model_flags() {
  return {{"--model", Kind::Str, "mean model: linear, log_integral, shifted_log_integral, floor_step, template_chebyshev"},
          {"--slope", Kind::Real, "linear slope"},
          {"--x0", Kind::Real, "linear start point"},
          {"--a", Kind::Real, "shifted log integral exponent"},
          {"--step-k", Kind::Int, "floor step k"},
          {"--x-max", Kind::Real, "floor step table end"},
          {"--beta", Kind::Real, "template beta"},
          {"--k-max", Kind::Int, "template windows used"}};
}

const std::map<std::string, std::vector<FlagSpec>>& command_flags() {
  static const std::map<std::string, std::vector<FlagSpec>> m = [] {
    std::map<std::string, std::vector<FlagSpec>> c;
    c["construct"] = {{"--construction", Kind::Str, "thm2, mk or density1"},
                      {"--thm2", Kind::Const, "same as --construction thm2", "construction", "thm2"},
                      {"--mk", Kind::Const, "same as --construction mk", "construction", "mk"},
                      {"--density1", Kind::Const, "same as --construction density1", "construction", "density1"},
                      {"--alpha", Kind::Real, "window parameter in (0, pi/6)"},
                      {"--k-list", Kind::Ints, "window ends K"},
                      {"--k0", Kind::Int, "first K when chaining windows"},
                      {"--windows", Kind::Int, "number of chained windows"},
                      {"--m", Kind::Int, "block length (mk)"},
                      {"--k", Kind::Int, "points per block (mk)"},
                      {"--m-list", Kind::Ints, "scales M (density1)"},
                      {"--eps", Kind::Real, "density1 epsilon"},
                      {"--prefix", Kind::Str, "sequence CSV kept below the first window (thm2)"}};
    c["sample"] = {{"--sampler", Kind::Str, "THM5, THM5_BLOCK or THM7"},
                   {"--J", Kind::Int, "number of points"},
                   {"--A", Kind::Real, "THM7 density"},
                   {"--K", Kind::Real, "THM7 jitter constant"},
                   {"--theta", Kind::Real, "THM7 jitter exponent, PROB_JITTER theta"},
                   {"--block-first", Kind::Int, "THM5_BLOCK first block length"},
                   {"--block-size", Kind::Int, "THM5_BLOCK block length"},
                   {"--block-c", Kind::Real, "THM5_BLOCK size constant"},
                   {"--trials", Kind::Int, "Monte Carlo trials (0: write one sample)"},
                   {"--x-grid", Kind::Reals, "Monte Carlo x grid"},
                   {"--t-grid", Kind::Reals, "Monte Carlo t grid"},
                   {"--norm", Kind::Str, "LH_EPS, PROB_BOUND, LH_TILDE or PROB_JITTER"},
                   {"--eps", Kind::Real, "norm epsilon"}};
    for (auto& f : model_flags()) c["sample"].push_back(f);
    c["beurling"] = {{"--primes", Kind::Reals, "generalized primes"},
                     {"--rational-primes", Kind::Int, "use the rational primes up to this bound"},
                     {"--X", Kind::Real, "cutoff"},
                     {"--budget", Kind::Real, "maximum number of generated integers"},
                     {"--x-grid", Kind::Reals, "points for the psi / pi / N table"}};
    c["zeta"] = {{"--op", Kind::Str,
                  "series, euler, continued, log_deriv, template, perron, convexity, critical_line, lh_tilde"},
                 {"--seq", Kind::Str, "sequence CSV"},
                 {"--system", Kind::Str, "Beurling system file"},
                 {"--integers", Kind::Int, "use 1..N"},
                 {"--sigma", Kind::Reals, "real parts"},
                 {"--tau", Kind::Reals, "imaginary parts"},
                 {"--x", Kind::Real, "truncation point"},
                 {"--A", Kind::Real, "density constant of N(u) = A u + O(u^theta)"},
                 {"--theta", Kind::Real, "error exponent of N"},
                 {"--tail-a", Kind::Real, "series tail constant"},
                 {"--a-pi", Kind::Real, "prime counting constant for the Euler tail (0: complete list)"},
                 {"--eps", Kind::Real, "log_deriv / lh_tilde epsilon"},
                 {"--weights", Kind::Str, "perron coefficients: counting or mangoldt"},
                 {"--method", Kind::Str, "perron: termwise or quadrature"},
                 {"--kappa", Kind::Real, "perron abscissa"},
                 {"--T", Kind::Real, "perron height"},
                 {"--x-grid", Kind::Reals, "perron / lh_tilde x values"},
                 {"--t-budget", Kind::Int, "lh_tilde t samples per x"},
                 {"--beta", Kind::Real, "template beta"},
                 {"--k-max", Kind::Int, "template windows used"}};
    c["scan"] = {{"--seq", Kind::Str, "sequence CSV"},
                 {"--x-grid", Kind::Reals, "x values"},
                 {"--t-list", Kind::Reals, "t values used at every x"},
                 {"--t-power", Kind::Real, "t = x^power"},
                 {"--norm", Kind::Str, "LH_EPS, PROB_BOUND, LH_TILDE or PROB_JITTER"},
                 {"--eps", Kind::Real, "norm epsilon"},
                 {"--theta", Kind::Real, "PROB_JITTER theta"}};
    for (auto& f : model_flags()) c["scan"].push_back(f);
    c["report"] = {{"--inputs", Kind::Strs, "scan CSV, critical line CSV or Monte Carlo JSON files"}};
    return c;
  }();
  return m;
}

// ---------------------------------------------------------------------------
// Flag values -> JSON.

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto p : io::split(s, ','))
    if (!p.empty()) out.emplace_back(p);
  return out;
}

std::int64_t parse_int(const std::string& s) {
  std::int64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw Error(ErrorCode::ConfigInvalid, "not an integer: '" + s + "'");
  return v;
}

double parse_real_cfg(const std::string& s) {
  try {
    return io::parse_real(s);
  } catch (const Error&) {
    throw Error(ErrorCode::ConfigInvalid, "not a number: '" + s + "'");
  }
}

json flag_value(Kind k, const std::vector<std::string>& raw) {
  std::vector<std::string> items;
  for (const auto& r : raw)
    for (auto& s : split_list(r)) items.push_back(s);
  auto one = [&]() -> const std::string& {
    if (raw.size() != 1) throw Error(ErrorCode::ConfigInvalid, "flag given more than once");
    return raw.front();
  };
  switch (k) {
    case Kind::Real: return parse_real_cfg(one());
    case Kind::Int: return parse_int(one());
    case Kind::Str: return one();
    case Kind::Reals: {
      json a = json::array();
      for (auto& s : items) a.push_back(parse_real_cfg(s));
      return a;
    }
    case Kind::Ints: {
      json a = json::array();
      for (auto& s : items) a.push_back(parse_int(s));
      return a;
    }
    case Kind::Strs: return items;
    case Kind::Const: break;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Config validation and access.

void validate_config(const json& cfg) {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::ConfigInvalid, m); };
  if (!cfg.is_object()) bad("config must be a JSON object");
  static const std::set<std::string> top{"command", "params", "seed", "output_dir", "format"};
  for (auto& [k, v] : cfg.items())
    if (!top.count(k)) bad("unknown config key '" + k + "'");
  if (!cfg.contains("command") || !cfg["command"].is_string()) bad("config needs a string 'command'");
  const auto cmd = cfg["command"].get<std::string>();
  const auto& flags = command_flags();
  if (!flags.count(cmd)) bad("unknown command '" + cmd + "'");
  if (!cfg.contains("output_dir") || !cfg["output_dir"].is_string()) bad("config needs a string 'output_dir'");
  if (cfg.contains("seed") && !cfg["seed"].is_number_unsigned()) bad("'seed' must be a non-negative integer");
  if (cfg.contains("format") && cfg["format"] != "csv" && cfg["format"] != "json") bad("'format' must be csv or json");
  if (cfg.contains("params") && !cfg["params"].is_object()) bad("'params' must be an object");
  std::map<std::string, Kind> kinds;
  for (const auto& f : flags.at(cmd)) kinds[key_of(f)] = f.kind == Kind::Const ? Kind::Str : f.kind;
  if (!cfg.contains("params")) return;
  for (auto& [k, v] : cfg["params"].items()) {
    if (!kinds.count(k)) bad("unknown parameter '" + k + "' for " + cmd);
    bool ok = false;
    switch (kinds[k]) {
      case Kind::Real: ok = v.is_number(); break;
      case Kind::Int: ok = v.is_number_integer(); break;
      case Kind::Str: ok = v.is_string(); break;
      case Kind::Reals:
        ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
        break;
      case Kind::Ints:
        ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number_integer(); });
        break;
      case Kind::Strs:
        ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); });
        break;
      case Kind::Const: break;
    }
    if (!ok) bad("parameter '" + k + "' has the wrong type");
  }
}

struct Params {
  json p;

  bool has(const std::string& k) const { return p.contains(k); }
  [[noreturn]] static void missing(const std::string& k) {
    throw Error(ErrorCode::ConfigInvalid, "missing required parameter '" + k + "'");
  }
  double real(const std::string& k) const {
    if (!has(k)) missing(k);
    return p[k].get<double>();
  }
  double real(const std::string& k, double d) const { return has(k) ? p[k].get<double>() : d; }
  std::int64_t integer(const std::string& k) const {
    if (!has(k)) missing(k);
    return p[k].get<std::int64_t>();
  }
  std::int64_t integer(const std::string& k, std::int64_t d) const { return has(k) ? p[k].get<std::int64_t>() : d; }
  std::string str(const std::string& k) const {
    if (!has(k)) missing(k);
    return p[k].get<std::string>();
  }
  std::string str(const std::string& k, const std::string& d) const { return has(k) ? p[k].get<std::string>() : d; }
  std::vector<double> reals(const std::string& k) const {
    if (!has(k)) missing(k);
    return p[k].get<std::vector<double>>();
  }
  std::vector<std::int64_t> ints(const std::string& k) const {
    if (!has(k)) missing(k);
    return p[k].get<std::vector<std::int64_t>>();
  }
  std::vector<std::string> strs(const std::string& k) const {
    if (!has(k)) missing(k);
    return p[k].get<std::vector<std::string>>();
  }
};

// ---------------------------------------------------------------------------
// Outputs.

struct Outputs {
  std::string format = "csv";
  std::vector<std::pair<std::string, std::string>> files;

  void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }

  // Rows of numbers or strings; CSV with 17 significant digits or a JSON array of objects.
  void table(const std::string& stem, const std::vector<std::string>& cols, const std::vector<json>& rows) {
    if (format == "json") {
      json a = json::array();
      for (const auto& r : rows) {
        json o = json::object();
        for (std::size_t i = 0; i < cols.size(); ++i) o[cols[i]] = r[i];
        a.push_back(std::move(o));
      }
      add(stem + ".json", a.dump(2) + "\n");
      return;
    }
    std::string out;
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
    out += '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        const auto& v = r[i];
        if (v.is_number_integer())
          out += std::to_string(v.get<std::int64_t>());
        else if (v.is_number())
          out += io::format_real(v.get<double>());
        else if (v.is_string())
          out += v.get<std::string>();
        else if (v.is_null())
          out += "nan";
        else
          out += v.dump();
      }
      out += '\n';
    }
    add(stem + ".csv", out);
  }
};

json num(double v) { return std::isfinite(v) ? json(v) : json(io::format_real(v)); }

PointSequence read_sequence(const std::string& path) { return PointSequence::from_csv(io::read_file(path)); }

MeanModel model_of(const Params& p) {
  const auto kind = p.str("model");
  json m{{"kind", kind}};
  if (kind == "linear") {
    m["slope"] = p.real("slope", 1.0);
    m["x0"] = p.real("x0", 0.0);
  } else if (kind == "shifted_log_integral") {
    m["a"] = p.real("a");
  } else if (kind == "floor_step") {
    m["k"] = p.integer("step_k");
    m["x_max"] = p.real("x_max");
  } else if (kind == "template_chebyshev") {
    m["beta"] = p.real("beta", 0.75);
    m["k"] = p.integer("k_max", 6);
  }
  return model_from_json(m);
}

// ---------------------------------------------------------------------------
// Commands.

void run_construct(const Params& p, Outputs& out) {
  const auto c = p.str("construction");
  if (c == "thm2" || c == "mk") {
    const double alpha = p.real("alpha", kPi / 12.0);
    std::vector<std::int64_t> ks;
    if (p.has("k_list"))
      ks = p.ints("k_list");
    else if (!p.has("k0") || !p.has("windows"))
      throw Error(ErrorCode::ConfigInvalid, "give k_list, or k0 and windows");
    else
      ks = chain_windows(p.integer("k0"), alpha, static_cast<std::size_t>(p.integer("windows")));
    MkResult r = c == "thm2" ? build_thm2(ks, alpha, p.has("prefix") ? std::optional(read_sequence(p.str("prefix")))
                                                                       : std::nullopt)
                             : build_mk(static_cast<int>(p.integer("m")), static_cast<int>(p.integer("k")), ks, alpha);
    out.add("sequence.csv", r.seq.to_csv());
    out.add("certificate.json", r.certificate().dump(2) + "\n");
  } else if (c == "density1") {
    auto r = build_density1(p.ints("m_list"), p.real("eps", 0.1));
    out.add("sequence.csv", r.seq.to_csv());
    out.add("certificate.json", r.certificate().dump(2) + "\n");
  } else {
    throw Error(ErrorCode::ConfigInvalid, "unknown construction '" + c + "'");
  }
}

NormSpec norm_of(const Params& p, const std::string& dflt) {
  NormSpec n;
  try {
    n.kind = parse_norm(p.str("norm", dflt));
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
  n.eps = p.real("eps", 0.0);
  n.theta = p.real("theta", 0.5);
  return n;
}

void run_sample(const Params& p, std::uint64_t seed, Outputs& out) {
  json sj{{"kind", p.str("sampler", "THM5")}, {"J", p.integer("J")}, {"seed", seed}};
  const auto kind = sj["kind"].get<std::string>();
  if (kind == "THM7") {
    sj["A"] = p.real("A", 1.0);
    sj["K"] = p.real("K", 1.0);
    sj["theta"] = p.real("theta", 0.5);
  } else {
    sj["model"] = model_to_json(model_of(p));
  }
  if (kind == "THM5_BLOCK") {
    sj["block_ends"] = uniform_blocks(p.integer("J"), p.integer("block_first"), p.integer("block_size"));
    sj["block_c"] = p.real("block_c", 1.0);
  }
  const auto spec = SamplerSpec::from_json(sj);
  spec.validate();
  const auto trials = p.integer("trials", 0);
  if (trials == 0) {
    out.add("sample.csv", sample(spec, 0).to_csv());
    out.add("spec.json", spec.to_json().dump(2) + "\n");
    return;
  }
  auto rep = monte_carlo(spec, trials, p.reals("x_grid"), p.reals("t_grid"), norm_of(p, "PROB_BOUND"));
  out.add("monte_carlo.json", rep.to_json().dump(2) + "\n");
  out.add("monte_carlo.csv", rep.to_csv());
}

void run_beurling(const Params& p, Outputs& out) {
  std::vector<double> primes;
  if (p.has("primes"))
    primes = p.reals("primes");
  else
    primes = rational_primes(p.integer("rational_primes"));
  const double X = p.real("X");
  auto sys = generate(primes, X, p.real("budget", kDefaultBeurlingBudget));
  out.add("system.bin", to_binary(sys));
  json summary{{"primes", sys.primes.size()},
               {"X", X},
               {"N", sys.integers.counting(X)},
               {"distinct", sys.integers.distinct()},
               {"psi", psi(sys, X)},
               {"pi", pi_count(sys, X)}};
  out.add("summary.json", summary.dump(2) + "\n");
  if (sys.integers.distinct() <= 100000) out.add("integers.csv", to_csv(sys));
  if (p.has("x_grid")) {
    std::vector<json> rows;
    const auto xs = p.reals("x_grid");
    const auto rh = rh_deviation(sys, xs);
    for (std::size_t i = 0; i < xs.size(); ++i)
      rows.push_back(json::array({xs[i], sys.integers.counting(xs[i]), psi(sys, xs[i]), pi_count(sys, xs[i]),
                                  rh[i].value}));
    out.table("table", {"x", "N", "psi", "pi", "rh_deviation"}, rows);
  }
}

struct Source {
  std::optional<PointSequence> seq;
  std::optional<BeurlingSystem> sys;
};

Source source_of(const Params& p) {
  Source s;
  const int given = int(p.has("seq")) + int(p.has("system")) + int(p.has("integers"));
  if (given > 1) throw Error(ErrorCode::ConfigInvalid, "give one of seq, system, integers");
  if (p.has("seq")) s.seq = read_sequence(p.str("seq"));
  if (p.has("integers")) s.seq = PointSequence::integers(1, p.integer("integers"));
  if (p.has("system")) {
    s.sys = load_system(p.str("system"));
    s.seq = s.sys->integers;
  }
  return s;
}

const PointSequence& need_seq(const Source& s) {
  if (!s.seq) throw Error(ErrorCode::ConfigInvalid, "this operation needs seq, system or integers");
  return *s.seq;
}
const BeurlingSystem& need_sys(const Source& s) {
  if (!s.sys) throw Error(ErrorCode::ConfigInvalid, "this operation needs a system");
  return *s.sys;
}

void run_zeta(const Params& p, Outputs& out) {
  const auto op = p.str("op");
  const Source src = source_of(p);
  static const std::vector<std::string> zcols{"sigma", "tau", "re", "im", "abs_error_bound", "method", "x"};
  auto s_grid = [&](auto&& eval) {
    std::vector<json> rows;
    for (double sg : p.reals("sigma"))
      for (double tau : p.has("tau") ? p.reals("tau") : std::vector<double>{0.0}) {
        const ZetaValue z = eval(cplx(sg, tau));
        rows.push_back(json::array(
            {sg, tau, z.value.real(), z.value.imag(), num(z.abs_error_bound), z.method, num(z.x)}));
      }
    out.table("zeta", zcols, rows);
  };
  if (op == "series") {
    if (src.sys)
      s_grid([&](cplx s) { return zeta_series(*src.sys, s, p.real("tail_a", 1.0)); });
    else
      s_grid([&](cplx s) { return zeta_series(need_seq(src), s, p.real("tail_a", 1.0)); });
  } else if (op == "euler") {
    const auto& sys = need_sys(src);
    s_grid([&](cplx s) { return zeta_euler(sys.primes, s, sys.X, p.real("a_pi", 1.0)); });
  } else if (op == "continued") {
    const auto& seq = need_seq(src);
    s_grid([&](cplx s) {
      return zeta_continued(seq, p.real("A", 1.0), s, p.real("x", seq.cutoff()), p.real("theta", 0.5));
    });
  } else if (op == "log_deriv") {
    const auto& sys = need_sys(src);
    s_grid([&](cplx s) { return log_deriv(sys, s, p.real("x", sys.X), p.real("eps", 0.5)); });
  } else if (op == "template") {
    const auto tp = zeta::TemplateZetaParams::defaults(p.real("beta", 0.75), static_cast<int>(p.integer("k_max", 6)));
    s_grid([&](cplx s) { return template_value(tp, s); });
  } else if (op == "perron") {
    const auto w = p.str("weights", "counting");
    DirichletSeries F;
    if (w == "counting")
      F = DirichletSeries::of(need_seq(src));
    else if (w == "mangoldt")
      F = DirichletSeries::mangoldt(need_sys(src));
    else
      throw Error(ErrorCode::ConfigInvalid, "weights must be counting or mangoldt");
    const auto method = p.str("method", "termwise");
    if (method != "termwise" && method != "quadrature")
      throw Error(ErrorCode::ConfigInvalid, "method must be termwise or quadrature");
    std::vector<json> rows;
    json full = json::array();
    for (double x : p.reals("x_grid")) {
      const double kappa = p.real("kappa", perron_default_kappa(x));
      const double T = p.has("T") ? p.real("T") : perron_choose_T(F, x, kappa);
      const auto r = method == "termwise" ? perron_count(F, x, kappa, T) : perron_integral(F, x, kappa, T, 0.25, &F);
      rows.push_back(json::array({x, r.value.real(), r.value.imag(), r.truncation_bound, r.numeric_error, r.budget(), r.kappa, r.T, r.method}));
      full.push_back(r.to_json());
    }
    out.table("perron", {"x", "re", "im", "truncation_bound", "numeric_error", "budget", "kappa", "T", "method"}, rows);
    out.add("perron_budget.json", full.dump(2) + "\n");
  } else if (op == "convexity") {
    const auto rep = convexity_check(need_seq(src), p.real("A", 1.0), p.reals("sigma"), p.reals("tau"),
                                     p.real("theta", 0.5));
    out.add("convexity.json", rep.to_json().dump(2) + "\n");
  } else if (op == "critical_line") {
    const auto scan = critical_line_scan(need_seq(src), p.real("A", 1.0), p.reals("tau"), p.real("theta", 0.0));
    if (out.format == "json")
      out.add("critical_line.json", scan.to_json().dump(2) + "\n");
    else
      out.add("critical_line.csv", scan.to_csv());
  } else if (op == "lh_tilde") {
    const auto rep = lh_tilde_check(need_seq(src), p.reals("x_grid"),
                                    static_cast<std::size_t>(p.integer("t_budget", 16)), p.real("eps", 0.1));
    out.add("lh_tilde.json", rep.to_json().dump(2) + "\n");
  } else {
    throw Error(ErrorCode::ConfigInvalid, "unknown zeta op '" + op + "'");
  }
}

void run_scan(const Params& p, Outputs& out) {
  const auto seq = read_sequence(p.str("seq"));
  const auto model = model_of(p);
  TRule rule;
  if (p.has("t_power") == p.has("t_list")) throw Error(ErrorCode::ConfigInvalid, "give exactly one of t_list, t_power");
  rule = p.has("t_power") ? TRule::from_power(p.real("t_power")) : TRule::explicit_list(p.reals("t_list"));
  const auto g = scan(seq, model, p.reals("x_grid"), rule, norm_of(p, "LH_EPS"));
  if (out.format == "json")
    out.add("scan.json", g.to_json().dump(2) + "\n");
  else
    out.add("scan.csv", g.to_csv());
}

// --- report ---

struct Loaded {
  std::string schema;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // CSV cells
  std::vector<double> maxima;                  // monte_carlo
};

Loaded load_report_input(const std::string& path) {
  const auto text = io::read_file(path);
  Loaded l;
  const auto ls = io::lines(text);
  auto csv = [&](const std::string& schema) {
    l.schema = schema;
    for (auto c : io::split(ls[0])) l.header.emplace_back(c);
    for (std::size_t i = 1; i < ls.size(); ++i) {
      if (ls[i].empty()) continue;
      std::vector<std::string> r;
      for (auto c : io::split(ls[i])) r.emplace_back(c);
      require(r.size() == l.header.size(), ErrorCode::SchemaMismatch, path + ": ragged row");
      l.rows.push_back(std::move(r));
    }
  };
  if (!ls.empty() && ls[0] == "x,t,raw_dev,normalized_dev,norm,eps") {
    csv("scan");
  } else if (!ls.empty() && ls[0] == "tau,abs_zeta,method,err_bound") {
    csv("critical_line");
  } else {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception&) {
      throw Error(ErrorCode::SchemaMismatch, path + ": not a scan CSV, critical line CSV or Monte Carlo JSON");
    }
    require(j.is_object() && j.value("schema", "") == "monte_carlo", ErrorCode::SchemaMismatch,
            path + ": unrecognised JSON report");
    l.schema = "monte_carlo";
    for (const auto& m : j.at("max_normalized_dev")) l.maxima.push_back(m.is_number() ? m.get<double>() : std::nan(""));
  }
  return l;
}

json quantile_stats(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double d) { return std::isnan(d); }), v.end());
  if (v.empty()) return {{"count", 0}};
  return {{"count", v.size()},
          {"max", *std::max_element(v.begin(), v.end())},
          {"q50", empirical_quantile(v, 0.5)},
          {"q90", empirical_quantile(v, 0.9)},
          {"q99", empirical_quantile(v, 0.99)}};
}

json stats_of(const std::string& schema, const std::vector<std::vector<std::string>>& rows,
              const std::vector<double>& maxima) {
  if (schema == "monte_carlo") return quantile_stats(maxima);
  if (schema == "scan") {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(io::parse_real(r[3]));
    return quantile_stats(v);
  }
  std::vector<double> lt, lz;
  for (const auto& r : rows) {
    lt.push_back(std::log(io::parse_real(r[0])));
    lz.push_back(std::log(io::parse_real(r[1])));
  }
  json j{{"count", rows.size()}};
  if (rows.size() >= 2) {
    const auto [slope, intercept] = fit_line(lt, lz);
    j["slope"] = slope;
    j["intercept"] = intercept;
  }
  return j;
}

void run_report(const Params& p, Outputs& out) {
  const auto inputs = p.strs("inputs");
  require(!inputs.empty(), ErrorCode::ConfigInvalid, "report needs at least one input");
  std::vector<Loaded> ls;
  for (const auto& in : inputs) ls.push_back(load_report_input(in));
  for (const auto& l : ls)
    require(l.schema == ls[0].schema, ErrorCode::SchemaMismatch,
            "cannot merge " + ls[0].schema + " with " + l.schema);
  const auto schema = ls[0].schema;
  json summary{{"schema", schema}, {"inputs", json::array()}};
  std::string merged;
  std::vector<std::vector<std::string>> all_rows;
  std::vector<double> all_maxima;
  if (schema == "monte_carlo") {
    merged = "source,trial,max_normalized_dev\n";
    for (std::size_t f = 0; f < ls.size(); ++f)
      for (std::size_t i = 0; i < ls[f].maxima.size(); ++i) {
        merged += std::to_string(f) + ',' + std::to_string(i) + ',' + io::format_real(ls[f].maxima[i]) + '\n';
        all_maxima.push_back(ls[f].maxima[i]);
      }
  } else {
    struct Row {
      std::vector<double> key;
      std::size_t source;
      const std::vector<std::string>* cells;
    };
    std::vector<Row> rows;
    for (std::size_t f = 0; f < ls.size(); ++f)
      for (const auto& r : ls[f].rows) {
        std::vector<double> key{io::parse_real(r[0])};
        if (schema == "scan") key.push_back(io::parse_real(r[1]));
        rows.push_back({std::move(key), f, &r});
      }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.key < b.key; });
    for (std::size_t i = 0; i < ls[0].header.size(); ++i) merged += (i ? "," : "") + ls[0].header[i];
    merged += ",source\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.cells->size(); ++i) merged += (i ? "," : "") + (*r.cells)[i];
      merged += ',' + std::to_string(r.source) + '\n';
      all_rows.push_back(*r.cells);
    }
  }
  for (std::size_t f = 0; f < ls.size(); ++f)
    summary["inputs"].push_back(
        {{"source", f}, {"path", inputs[f]}, {"stats", stats_of(schema, ls[f].rows, ls[f].maxima)}});
  summary["merged"] = stats_of(schema, all_rows, all_maxima);
  out.add("merged.csv", merged);
  out.add("summary.json", summary.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

void run(const json& cfg) {
  Params p{cfg.value("params", json::object())};
  Outputs out;
  out.format = cfg.value("format", "csv");
  const auto cmd = cfg["command"].get<std::string>();
  const std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
  try {
    if (cmd == "construct") run_construct(p, out);
    if (cmd == "sample") run_sample(p, seed, out);
    if (cmd == "beurling") run_beurling(p, out);
    if (cmd == "zeta") run_zeta(p, out);
    if (cmd == "scan") run_scan(p, out);
    if (cmd == "report") run_report(p, out);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
  const fs::path dir = cfg["output_dir"].get<std::string>();
  json manifest{{"version", io::kVersion}, {"config", cfg}, {"outputs", json::array()}};
  for (const auto& [name, content] : out.files) {
    io::write_file(dir / name, content);
    manifest["outputs"].push_back(name);
  }
  io::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

int fail(const Error& e) {
  std::cerr << "error: " << e.what() << "\n";
  return e.code() == ErrorCode::ConfigInvalid ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"llab: exponential sums, random sequences, Beurling systems and zeta numerics"};
  app.require_subcommand(0, 1);
  std::string config_path;
  int threads = 0;
  app.add_option("--config", config_path, "run a config or manifest JSON file (no other flags allowed)");
  app.add_option("--threads", threads, "worker cap (default: LLAB_THREADS, then all cores)")
      ->check(CLI::PositiveNumber);

  struct Sub {
    CLI::App* app;
    std::map<std::string, std::vector<std::string>> values;
    std::map<std::string, bool> consts;
    std::string out, format;
    std::uint64_t seed = 0;
  };
  std::map<std::string, Sub> subs;
  static const std::map<std::string, std::string> desc{
      {"construct", "build a deterministic counterexample sequence with certificates"},
      {"sample", "draw a random sequence or run a Monte Carlo deviation study"},
      {"beurling", "generate a Beurling integer system"},
      {"zeta", "zeta function numerics"},
      {"scan", "deviation scan of a sequence against a mean model"},
      {"report", "merge scan or Monte Carlo outputs"}};
  for (const auto& [name, flags] : command_flags()) {
    auto& s = subs[name];
    s.app = app.add_subcommand(name, desc.at(name));
    for (const auto& f : flags) {
      if (f.kind == Kind::Const)
        s.app->add_flag(f.flag, s.consts[f.flag], f.help);
      else
      {
        auto* o = s.app->add_option(f.flag, s.values[f.flag], f.help);
        if (f.kind == Kind::Reals || f.kind == Kind::Ints || f.kind == Kind::Strs)
          o->allow_extra_args();
        else
          o->expected(1);
      }
    }
    s.app->add_option("--out", s.out, "output directory")->required();
    s.app->add_option("--format", s.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    s.app->add_option("--seed", s.seed, "random seed");
    s.app->add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: CONFIG_INVALID: " << e.what() << "\n";
    const CLI::App* shown = &app;
    for (const auto& [name, s] : subs)
      if (s.app->parsed()) shown = s.app;
    std::cerr << shown->help();
    return 2;
  }

  json cfg;
  try {
    const auto parsed = app.get_subcommands();
    if (!config_path.empty()) {
      if (!parsed.empty())
        throw Error(ErrorCode::ConfigInvalid, "--config cannot be combined with other flags");
      json j;
      try {
        j = json::parse(io::read_file(config_path));
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
      } catch (const Error& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("cannot read config: ") + e.what());
      }
      // a manifest carries the config it was produced from
      cfg = j.is_object() && j.contains("config") && j.contains("version") ? j["config"] : j;
    } else if (parsed.size() == 1) {
      const auto name = parsed[0]->get_name();
      const auto& s = subs.at(name);
      json params = json::object();
      for (const auto& f : command_flags().at(name)) {
        const auto k = key_of(f);
        if (f.kind == Kind::Const) {
          if (!s.consts.at(f.flag)) continue;
          if (params.contains(k) && params[k] != f.value)
            throw Error(ErrorCode::ConfigInvalid, "conflicting flags for '" + k + "'");
          params[k] = f.value;
        } else if (s.app->count(f.flag)) {
          if (params.contains(k)) throw Error(ErrorCode::ConfigInvalid, "conflicting flags for '" + k + "'");
          params[k] = flag_value(f.kind, s.values.at(f.flag));
        }
      }
      cfg = {{"command", name}, {"params", params}, {"seed", s.seed}, {"output_dir", s.out},
             {"format", s.format.empty() ? "csv" : s.format}};
    } else {
      std::cerr << app.help();
      return 2;
    }
    validate_config(cfg);
  } catch (const Error& e) {
    const int code = fail(e);
    if (config_path.empty() && !app.get_subcommands().empty()) std::cerr << app.get_subcommands()[0]->help();
    return code;
  }

  if (threads > 0) set_thread_count(threads);
  try {
    run(cfg);
  } catch (const Error& e) {
    const int code = fail(e);
    if (code == 2 && config_path.empty()) std::cerr << app.get_subcommands()[0]->help();
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error: IO_ERROR: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
