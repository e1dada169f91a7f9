#include "tpdo/cli.hpp"

#include <cmath>
#include <fstream>
#include <locale>
#include <random>
#include <set>
#include <sstream>

#include "tpdo/diffcalc.hpp"
#include "tpdo/fso.hpp"
#include "tpdo/hyperbolic.hpp"
#include "tpdo/periodise.hpp"
#include "tpdo/quantize.hpp"

namespace tpdo::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Config access with unknown-field rejection
// ---------------------------------------------------------------------------

class Config {
 public:
  explicit Config(const json& j) : j_(j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
  }

  [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    return j_.contains(key) ? convert<T>(key) : fallback;
  }

  template <class T>
  T require(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError("missing field '" + key + "'");
    return convert<T>(key);
  }

  const json* raw(const std::string& key) {
    used_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (used_.count(it.key()) == 0) throw ConfigError("unknown field '" + it.key() + "'");
  }

 private:
  template <class T>
  T convert(const std::string& key) const {
    const json& v = j_.at(key);
    if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_integer()) throw ConfigError("field '" + key + "' must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError("field '" + key + "' must be non-negative");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("field '" + key + "' must be a number");
    }
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError("field '" + key + "' has the wrong type");
    }
  }

  const json& j_;
  std::set<std::string> used_;
};

void require_range(const std::string& key, double v, double lo, double hi) {
  if (!(v >= lo && v <= hi)) {
    throw ConfigError("field '" + key + "' must lie in [" + format_real(lo) + ", " + format_real(hi) + "]");
  }
}

// ---------------------------------------------------------------------------
// Run context: output files, checks, seeded randomness
// ---------------------------------------------------------------------------

struct Context {
  fs::path out;
  fs::path base;
  std::uint64_t seed = 1;
  RunResult result;

  void check(bool ok, const std::string& what) {
    result.messages.push_back((ok ? "PASS " : "FAIL ") + what);
    if (!ok) result.exit_code = kNumericFailure;
  }

  std::ofstream open(const std::string& name) {
    fs::create_directories(out);
    const fs::path p = out / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f.imbue(std::locale::classic());
    result.files.push_back(p);
    return f;
  }

  void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }
};

// Platform-independent uniform draws from the raw engine output.
double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(gen() >> 11) * 0x1.0p-53;
}
int uniform_int(std::mt19937_64& gen, int lo, int hi) {
  return lo + static_cast<int>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
}
Complex random_complex(std::mt19937_64& gen) {
  const double re = uniform(gen, -1.0, 1.0);
  return {re, uniform(gen, -1.0, 1.0)};
}

std::string join(const LatticePoint& p) {
  std::string s;
  for (int j = 0; j < p.size(); ++j) s += (j ? ";" : "") + std::to_string(p[j]);
  return s;
}

std::string join(const MultiIndex& a) { return join(a.as_point()); }

GridFunction random_band_limited(const TorusGrid& grid, int cutoff, std::mt19937_64& gen) {
  SpectralFunction s(FrequencyWindow(grid.dim(), cutoff, true));
  for (auto& c : s.coeffs()) c = random_complex(gen);
  return inverse_transform(s, grid);
}

// ---------------------------------------------------------------------------
// Symbol presets
// ---------------------------------------------------------------------------

json normalise_spec(const json& spec) {
  if (spec.is_object()) return spec;
  if (!spec.is_string()) throw ConfigError("a symbol must be a preset string or object");
  std::istringstream words(spec.get<std::string>());
  words.imbue(std::locale::classic());
  json out = json::object();
  std::string w;
  if (!(words >> w)) throw ConfigError("empty symbol preset");
  out["kind"] = w;
  while (words >> w) {
    const auto eq = w.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("symbol parameter '" + w + "' is not key=value");
    const std::string key = w.substr(0, eq), value = w.substr(eq + 1);
    if (key == "file") {
      out[key] = value;
      continue;
    }
    std::istringstream num(value);
    num.imbue(std::locale::classic());
    double v = 0.0;
    if (!(num >> v) || !num.eof()) throw ConfigError("symbol parameter '" + w + "' is not numeric");
    out[key] = v;
  }
  return out;
}

ToroidalSymbol load_table(const fs::path& file, int dim) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read symbol table " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("symbol table " + file.string() + ": " + e.what());
  }
  Config c(j);
  const int n = c.require<int>("n");
  const int points = c.require<int>("N");
  const int k = c.require<int>("K");
  SymbolOrder order{c.get<double>("order_m", 0.0), c.get<double>("rho", 1.0), c.get<double>("delta", 0.0)};
  const json* values = c.raw("values");
  c.finish();
  if (n != dim) throw ConfigError("symbol table dimension differs from n");
  TorusGrid grid;
  FrequencyWindow window;
  try {
    grid = TorusGrid(n, points);
    window = FrequencyWindow(n, k);
  } catch (const Error& e) {
    throw ConfigError(std::string("symbol table: ") + e.what());
  }
  if (!window.fits(grid)) throw ConfigError("symbol table window does not fit its grid");
  SymbolTable table{grid, window, std::vector<Complex>(grid.size() * window.size())};
  if (values == nullptr || !values->is_array()) throw ConfigError("symbol table needs a values array");
  for (const auto& row : *values) {
    if (!row.is_array() || row.size() != 4 || !row[0].is_number_integer() || !row[1].is_number_integer() ||
        !row[2].is_number() || !row[3].is_number()) {
      throw ConfigError("symbol table rows are [x-index, xi-index, re, im]");
    }
    const long long xi = row[0].get<long long>(), ki = row[1].get<long long>();
    if (xi < 0 || ki < 0 || static_cast<std::size_t>(xi) >= grid.size() || static_cast<std::size_t>(ki) >= window.size()) {
      throw ConfigError("symbol table index out of range");
    }
    table.values[static_cast<std::size_t>(xi) * window.size() + static_cast<std::size_t>(ki)] = {row[2].get<double>(),
                                                                                               row[3].get<double>()};
  }
  return ToroidalSymbol::from_table(std::move(table), order);
}

}  // namespace

ToroidalSymbol parse_symbol(const json& spec, int dim, const fs::path& base) {
  const json s = normalise_spec(spec);
  Config c(s);
  const auto kind = c.require<std::string>("kind");
  if (kind == "tabulated") {
    fs::path file = c.require<std::string>("file");
    c.finish();
    if (file.is_relative()) file = base / file;
    return load_table(file, dim);
  }
  if (kind == "const") {
    const double v = c.get<double>("c", 1.0);
    c.finish();
    return ToroidalSymbol(dim, [v](const RealPoint&, const LatticePoint&) { return Complex(v); }, {0.0, 1.0, 0.0});
  }
  if (kind == "bracket") {
    const double m = c.require<double>("m");
    c.finish();
    return ToroidalSymbol(
        dim, [m](const RealPoint&, const LatticePoint& xi) { return Complex(std::pow(japanese_bracket(xi), m)); },
        {m, 1.0, 0.0});
  }
  if (kind == "exp" || kind == "cos" || kind == "sin") {
    const double k = c.get<double>("k", 1.0);
    const double m = c.get<double>("m", 0.0);
    const double offset = kind == "exp" ? 0.0 : c.get<double>("c", 0.0);
    c.finish();
    if (k != std::round(k)) throw ConfigError("trigonometric presets need an integer k");
    return ToroidalSymbol(
        dim,
        [kind, k, m, offset](const RealPoint& x, const LatticePoint& xi) {
          const double w = std::pow(japanese_bracket(xi), m);
          if (kind == "exp") return std::polar(w, k * x[0]);
          return Complex((offset + (kind == "cos" ? std::cos(k * x[0]) : std::sin(k * x[0]))) * w);
        },
        {m, 1.0, 0.0});
  }
  throw ConfigError("unknown symbol preset '" + kind + "'");
}

bool is_multiplier(const json& spec) {
  const json s = normalise_spec(spec);
  const auto kind = s.value("kind", std::string());
  return kind == "const" || kind == "bracket" || ((kind == "exp" || kind == "cos" || kind == "sin") && s.value("k", 1.0) == 0.0);
}

namespace {

// ---------------------------------------------------------------------------
// taylor
// ---------------------------------------------------------------------------

void cmd_taylor(Config& cfg, Context& ctx) {
  using namespace diffcalc;
  const auto preset = cfg.get<std::string>("preset", "cubic");
  const int trials = cfg.get<int>("trials", 200);
  const auto dims = cfg.get<std::vector<int>>("dims", {1, 2});
  const int max_order = cfg.get<int>("max_order", 4);
  const int max_omega = cfg.get<int>("max_omega", 2);
  const int k = cfg.get<int>("K", 12);
  cfg.finish();
  if (preset != "cubic" && preset != "linear" && preset != "random") throw ConfigError("unknown taylor preset '" + preset + "'");
  require_range("trials", trials, 1, 100000);
  require_range("max_order", max_order, 1, 4);
  require_range("max_omega", max_omega, 0, 2);
  require_range("K", k, 1, 32);
  if (dims.empty()) throw ConfigError("dims must not be empty");
  for (int d : dims) require_range("dims", d, 1, 2);

  std::mt19937_64 gen(ctx.seed);
  const int degree = preset == "cubic" ? 3 : 1;
  auto csv = ctx.open("taylor_cases.csv");
  csv << "case,dim,order,omega,xi,eta,remainder,bound,exact_zero,pass\n";
  int failures = 0, exact_checks = 0, exact_failures = 0;
  for (int t = 0; t < trials; ++t) {
    const int n = dims[static_cast<std::size_t>(t) % dims.size()];
    const int order = uniform_int(gen, 1, max_order);
    MultiIndex omega(n);
    for (int s = uniform_int(gen, 0, max_omega); s > 0; --s) {
      const int axis = uniform_int(gen, 0, n - 1);
      omega.set(axis, omega[axis] + 1);
    }
    LatticePoint xi(n), eta(n);
    for (int j = 0; j < n; ++j) {
      xi[j] = uniform_int(gen, -k, k);
      eta[j] = uniform_int(gen, -k, k) - xi[j];
    }

    double remainder = 0.0, bound = 0.0;
    std::string exact = "n/a";
    if (preset == "random") {
      std::vector<Complex> values;
      const IntBox box = IntBox::cube(n, -k - 8, k + 8);
      values.reserve(box.size());
      for (std::size_t i = 0; i < box.size(); ++i) values.push_back(random_complex(gen));
      const auto f = LatticeFunction::from_values(box, std::move(values));
      remainder = magnitude(remainder_difference(f, xi, eta, order, omega));
      bound = remainder_bound(f, xi, eta, order, omega);
    } else {
      std::vector<std::pair<MultiIndex, Rational>> coeffs;
      for (const auto& g : indices_of_order_below(n, degree + 1)) coeffs.emplace_back(g, Rational(uniform_int(gen, -5, 5)));
      const ExactLatticeFunction f(n, [coeffs](const LatticePoint& p) {
        Rational acc = 0;
        for (const auto& [g, c] : coeffs) {
          Rational term = c;
          for (int j = 0; j < p.size(); ++j)
            for (int e = 0; e < g[j]; ++e) term *= p[j];
          acc += term;
        }
        return acc;
      });
      remainder = magnitude(remainder_difference(f, xi, eta, order, omega));
      bound = remainder_bound(f, xi, eta, order, omega);
      if (order > degree) {
        ++exact_checks;
        const bool zero = taylor_remainder(f, xi, eta, order) == 0;
        if (!zero) ++exact_failures;
        exact = zero ? "yes" : "no";
      }
    }
    // absolute floor for round-off in the double tables (values are O(1))
    const bool ok = remainder <= bound * (1 + 1e-12) + 1e-12;
    if (!ok) ++failures;
    csv << t << ',' << n << ',' << order << ',' << join(omega) << ',' << join(xi) << ',' << join(eta) << ','
        << format_real(remainder) << ',' << format_real(bound) << ',' << exact << ',' << (ok ? 1 : 0) << '\n';
  }
  ctx.check(failures == 0, "remainder bound holds in " + std::to_string(trials - failures) + "/" + std::to_string(trials) + " cases");
  if (exact_checks > 0) {
    ctx.check(exact_failures == 0, "r_N = 0 exactly in " + std::to_string(exact_checks - exact_failures) + "/" +
                                       std::to_string(exact_checks) + " polynomial cases with N above the degree");
  }
  ctx.write_json("taylor_summary.json", {{"preset", preset},
                                         {"trials", trials},
                                         {"bound_failures", failures},
                                         {"exact_checks", exact_checks},
                                         {"exact_failures", exact_failures},
                                         {"pass", ctx.result.exit_code == kPass}});
}

// ---------------------------------------------------------------------------
// extend
// ---------------------------------------------------------------------------

void cmd_extend(Config& cfg, Context& ctx) {
  const json* spec = cfg.raw("symbol");
  const int n = cfg.get<int>("n", 1);
  const int points = cfg.get<int>("N", 32);
  const int k = cfg.get<int>("K", n == 1 ? 16 : 4);
  const int radius = cfg.get<int>("radius", kDefaultExtensionRadius);
  const double tolerance = cfg.get<double>("tolerance", 1e-8);
  const double sample_step = cfg.get<double>("sample_step", 0.125);
  cfg.finish();
  if (spec == nullptr) throw ConfigError("missing field 'symbol'");
  require_range("n", n, 1, 2);
  require_range("radius", radius, 1, 40);
  require_range("sample_step", sample_step, 1e-3, 1.0);
  const TorusGrid grid(n, points);
  const FrequencyWindow window(n, k);
  if (!window.fits(grid)) throw ConfigError("window K does not fit the grid N");
  const auto sigma = parse_symbol(*spec, n, ctx.base);

  const ThetaFunction theta;
  auto theta_csv = ctx.open("theta.csv");
  theta_csv << "xi,theta_hat,deviation\n";
  double theta_dev = 0.0;
  for (int xi = -10; xi <= 10; ++xi) {
    const double v = theta.transform(static_cast<double>(xi));
    const double d = std::abs(v - (xi == 0 ? 1.0 : 0.0));
    theta_dev = std::max(theta_dev, d);
    theta_csv << xi << ',' << format_real(v) << ',' << format_real(d) << '\n';
  }

  // the partition sum is checked at the truncation that meets the tolerance,
  // or at the widest one when no truncation does
  constexpr int kWidest = 80;
  int partition_radius = kWidest;
  try {
    partition_radius = extension_radius(theta, 1, tolerance, kWidest);
  } catch (const InvalidArgument&) {
  }
  auto partition_csv = ctx.open("partition.csv");
  partition_csv << "xi,sum,error\n";
  const auto unit = extend_symbol(ToroidalSymbol(1, [](const RealPoint&, const LatticePoint&) { return Complex(1.0); }), theta,
                                  partition_radius);
  double partition = 0.0;
  for (double xi : {0.0, 0.3, 0.7}) {
    const double s = unit(RealPoint{0.0}, RealPoint{xi}).real();
    partition = std::max(partition, std::abs(s - 1.0));
    partition_csv << format_real(xi) << ',' << format_real(s) << ',' << format_real(std::abs(s - 1.0)) << '\n';
  }

  const auto ext = extend_symbol(sigma, theta, radius);
  // at most 8 nodes per axis
  const int stride = std::max(1, points / 8);
  double restriction = 0.0;
  grid.index_box().for_each([&](const LatticePoint& j) {
    for (int a = 0; a < n; ++a)
      if (j[a] % stride != 0) return;
    const RealPoint x = grid.node(grid.linear_index(j));
    for (std::size_t w = 0; w < window.size(); ++w) {
      const LatticePoint xi = window.frequency(w);
      restriction = std::max(restriction, std::abs(ext(x, to_real(xi)) - sigma(x, xi)));
    }
  });

  auto samples = ctx.open("extension.csv");
  samples << "x_index,xi,re,im\n";
  for (int node : {0, points / 4}) {
    LatticePoint j(n, 0);
    j[0] = node;
    const RealPoint x = grid.node(grid.linear_index(j));
    const int count = static_cast<int>(std::lround(2.0 * k / sample_step));
    for (int s = 0; s <= count; ++s) {
      RealPoint xi(n, 0.0);
      xi[0] = -k + s * sample_step;
      const Complex v = ext(x, xi);
      samples << node << ',' << format_real(xi[0]) << ',' << format_real(v.real()) << ',' << format_real(v.imag()) << '\n';
    }
  }

  ctx.check(theta_dev < tolerance, "theta^ at integers |xi| <= 10 deviates from delta by " + format_real(theta_dev));
  ctx.check(partition < tolerance, "sum of theta^(xi - eta) over |eta - xi| <= " + std::to_string(partition_radius) +
                                       " deviates from 1 by " + format_real(partition));
  ctx.check(restriction < tolerance, "restriction error " + format_real(restriction) + " at R = " + std::to_string(radius));
  ctx.write_json("restriction.json", {{"radius", radius},
                                      {"tail", ext.tail()},
                                      {"restriction_error", restriction},
                                      {"partition_error", partition},
                                      {"partition_radius", partition_radius},
                                      {"theta_deviation", theta_dev},
                                      {"tolerance", tolerance},
                                      {"pass", ctx.result.exit_code == kPass}});
}

// ---------------------------------------------------------------------------
// l2bound
// ---------------------------------------------------------------------------

void cmd_l2bound(Config& cfg, Context& ctx) {
  const json* spec = cfg.raw("symbol");
  const int trials = cfg.get<int>("random_trials", 0);
  const int n = cfg.get<int>("n", 1);
  const int k = cfg.get<int>("K", 16);
  const int points = cfg.get<int>("N", 2 * k);
  const double multiplier_tol = cfg.get<double>("multiplier_tolerance", 1e-10);
  cfg.finish();
  if ((spec == nullptr) == (trials == 0)) throw ConfigError("give exactly one of 'symbol' and 'random_trials'");
  require_range("n", n, 1, 2);
  require_range("random_trials", trials, 0, 1000);
  const TorusGrid grid(n, points);
  const FrequencyWindow window(n, k);
  if (!window.fits(grid)) throw ConfigError("window K does not fit the grid N");

  std::mt19937_64 gen(ctx.seed);
  std::vector<ToroidalSymbol> cases;
  const bool multiplier = spec != nullptr && is_multiplier(*spec);
  if (spec != nullptr) {
    cases.push_back(parse_symbol(*spec, n, ctx.base));
  } else {
    for (int t = 0; t < trials; ++t) {
      SymbolTable table{grid, window, std::vector<Complex>(grid.size() * window.size())};
      for (auto& v : table.values) v = random_complex(gen);
      cases.push_back(ToroidalSymbol::from_table(std::move(table)));
    }
  }

  auto csv = ctx.open("l2bound.csv");
  csv << "case,bound,norm,iterations,converged,max_symbol,pass\n";
  PowerIterationOptions opts;
  opts.seed = ctx.seed;
  int failures = 0;
  double worst_multiplier = 0.0;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const auto rep = l2_bound_report(cases[c], grid, window, opts);
    const auto est = operator_norm(operator_matrix(cases[c], grid, window), opts);
    double peak = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t w = 0; w < window.size(); ++w) peak = std::max(peak, std::abs(cases[c](grid.node(i), window.frequency(w))));
    bool ok = est.converged && est.value <= rep.bound * (1 + 1e-12);
    if (multiplier) {
      worst_multiplier = std::max(worst_multiplier, std::abs(est.value - peak));
      ok = ok && std::abs(est.value - peak) <= multiplier_tol;
    }
    if (!ok) ++failures;
    csv << c << ',' << format_real(rep.bound) << ',' << format_real(est.value) << ',' << est.iterations << ','
        << (est.converged ? 1 : 0) << ',' << format_real(peak) << ',' << (ok ? 1 : 0) << '\n';
  }
  ctx.check(failures == 0, "norm <= bound in " + std::to_string(cases.size() - failures) + "/" + std::to_string(cases.size()) + " cases");
  if (multiplier) ctx.check(worst_multiplier <= multiplier_tol, "multiplier norm equals max|sigma| to " + format_real(worst_multiplier));
  ctx.write_json("l2bound_summary.json",
                 {{"cases", cases.size()}, {"failures", failures}, {"multiplier", multiplier}, {"pass", ctx.result.exit_code == kPass}});
}

// ---------------------------------------------------------------------------
// compose
// ---------------------------------------------------------------------------

double outer_table_gap(const AmplitudeTable& a, const AmplitudeTable& b) {
  double d = 0.0;
  const int k = a.window.cutoff();
  for (std::size_t i = 0; i < a.grid.size(); ++i)
    for (std::size_t z = 0; z < a.grid.size(); ++z)
      for (std::size_t w = 0; w < a.window.size(); ++w) {
        if (3 * std::abs(a.window.frequency(w)[0]) < 2 * k) continue;
        d = std::max(d, std::abs(a.at(i, z, w) - b.at(i, z, w)));
      }
  return d;
}

double outer_column_gap(const OperatorMatrix& a, const OperatorMatrix& b) {
  double d = 0.0;
  const int k = a.cols.cutoff();
  for (std::size_t c = 0; c < a.col_count(); ++c) {
    if (3 * std::abs(a.cols.frequency(c)[0]) < 2 * k) continue;
    for (std::size_t r = 0; r < a.row_count(); ++r) d = std::max(d, std::abs(a(r, c) - b(r, c)));
  }
  return d;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

void cmd_compose(Config& cfg, Context& ctx) {
  const auto preset = cfg.require<std::string>("preset");
  const int n = cfg.get<int>("n", 1);
  const int max_m = cfg.get<int>("M", 3);
  int points = 0, k = 0;
  if (preset == "tp-trivial") {
    points = 16, k = 4;
  } else if (preset == "tp") {
    points = 32, k = 12;
  } else if (preset == "pt") {
    points = 64, k = 12;
  } else {
    cfg.finish();
    throw ConfigError("unknown compose preset '" + preset + "'");
  }
  points = cfg.get<int>("N", points);
  k = cfg.get<int>("K", k);
  cfg.finish();
  if (n != 1) throw ConfigError("compose presets are one-dimensional");
  require_range("M", max_m, 1, 4);
  const TorusGrid grid(1, points);
  const FrequencyWindow window(1, k);
  if (!window.fits(grid)) throw ConfigError("window K does not fit the grid N");
  const auto full = FrequencyWindow::full(grid);

  auto csv = ctx.open("compose.csv");
  csv << "M,discrepancy\n";
  json summary = {{"preset", preset}};
  std::vector<double> gaps;

  if (preset == "tp-trivial") {
    TorusAmplitude a(1, [](const RealPoint& x, const RealPoint&, const LatticePoint& xi) {
      return (2.0 + std::cos(x[0])) * Complex(1.0, 0.5 * xi[0] / japanese_bracket(xi));
    });
    ToroidalSymbol p(1, [](const RealPoint&, const LatticePoint& e) { return Complex(1.0 / japanese_bracket(e)); });
    const auto c = compose_tp_direct(a, p, grid, window, full);
    double direct = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (std::size_t z = 0; z < grid.size(); ++z)
        for (std::size_t w = 0; w < window.size(); ++w) {
          const LatticePoint xi = window.frequency(w);
          direct = std::max(direct, std::abs(c.at(i, z, w) - a(grid.node(i), grid.node(z), xi) * p(grid.node(z), xi)));
        }
    for (int m = 1; m <= max_m; ++m) {
      gaps.push_back(outer_table_gap(c, tabulate_amplitude(compose_tp_asymptotic(a, p, m, grid), grid, window)));
      csv << m << ',' << format_real(gaps.back()) << '\n';
    }
    const double worst = *std::max_element(gaps.begin(), gaps.end());
    ctx.check(direct <= 1e-12, "direct amplitude equals a p to " + format_real(direct));
    ctx.check(worst <= 1e-12, "every truncation equals a p to " + format_real(worst));
    summary["direct_error"] = direct;
  } else if (preset == "tp") {
    TorusAmplitude a(1, [](const RealPoint& x, const RealPoint& y, const LatticePoint&) {
      return Complex(1.0) + 0.5 * std::polar(1.0, y[0]) * std::cos(x[0]);
    });
    ToroidalSymbol p(1, [](const RealPoint& y, const LatticePoint& e) {
      return Complex(2 + std::sin(y[0]), 0.3 * std::cos(2 * y[0])) / japanese_bracket(e);
    });
    const auto direct = compose_tp_direct(a, p, grid, window, full);
    for (int m = 1; m <= max_m; ++m) {
      gaps.push_back(outer_table_gap(direct, tabulate_amplitude(compose_tp_asymptotic(a, p, m, grid), grid, window)));
      csv << m << ',' << format_real(gaps.back()) << '\n';
    }
    ctx.check(strictly_decreasing(gaps), "outer discrepancy strictly decreasing in M");
  } else {
    PhaseFunction phi(
        1, [](const RealPoint& x, const LatticePoint& xi) { return 0.25 * std::sin(x[0]) * japanese_bracket(xi); }, {},
        [](const RealPoint& x, const LatticePoint& xi) { return RealPoint{0.25 * std::cos(x[0]) * japanese_bracket(xi)}; });
    TorusAmplitude a(1, [](const RealPoint& x, const RealPoint&, const LatticePoint&) { return Complex(1.0 + 0.3 * std::cos(x[0])); });
    ToroidalSymbol p(1, [](const RealPoint& x, const LatticePoint& e) { return Complex(1.0 + 0.5 * std::cos(x[0])) / japanese_bracket(e); });
    const auto pt = operator_matrix(p, grid, full) * fso_matrix(phi, a, grid, window, window);
    double leading = 0.0;
    for (int m = 1; m <= max_m; ++m) {
      const auto e = compose_pt_asymptotic(p, phi, a, m, grid, window);
      if (m == 1) {
        const auto ext = extend_symbol(p, ThetaFunction(), e.radius);
        for (std::size_t i = 0; i < grid.size(); ++i)
          for (std::size_t z = 0; z < grid.size(); ++z)
            for (std::size_t w = 0; w < window.size(); ++w) {
              const LatticePoint xi = window.frequency(w);
              const Complex expect = ext(grid.node(i), phi.gradient(grid.node(i), xi)) * a(grid.node(i), grid.node(z), xi);
              leading = std::max(leading, std::abs(e.table.at(i, z, w) - expect));
            }
      }
      gaps.push_back(outer_column_gap(fso_matrix(phi, tabulated_amplitude(e.table), grid, window, window), pt));
      csv << m << ',' << format_real(gaps.back()) << '\n';
    }
    ctx.check(leading <= 1e-12, "M = 1 equals p~(x, grad phi) a to " + format_real(leading));
    ctx.check(strictly_decreasing(gaps), "outer discrepancy strictly decreasing in M");
    summary["leading_error"] = leading;
  }
  summary["discrepancy"] = gaps;
  summary["pass"] = ctx.result.exit_code == kPass;
  ctx.write_json("compose_summary.json", summary);
}

// ---------------------------------------------------------------------------
// periodise
// ---------------------------------------------------------------------------

void cmd_periodise(Config& cfg, Context& ctx) {
  const int n = cfg.get<int>("n", 1);
  const int points = cfg.get<int>("N", n == 1 ? 64 : 16);
  const int refine = cfg.get<int>("refine", n == 1 ? 4 : 2);
  const double width = cfg.get<double>("width", 1.0);
  const double radius = cfg.get<double>("radius", 8.0);
  const int check_k = cfg.get<int>("check_K", 4);
  const double tolerance = cfg.get<double>("tolerance", 1e-6);
  const bool commutation = cfg.get<bool>("commutation", n == 1);
  cfg.finish();
  require_range("n", n, 1, 2);
  require_range("refine", refine, 1, 16);
  require_range("width", width, 0.1, 2.0);
  require_range("radius", radius, 1.0, 12.0);
  const TorusGrid grid(n, points);
  const FrequencyWindow check(n, check_k, true);
  if (!check.fits(grid)) throw ConfigError("check_K does not fit the grid N");
  if (commutation && n != 1) throw ConfigError("commutation checks are one-dimensional");
  const double h = kTwoPi / (points * refine);

  auto gaussian = [n](double w) {
    return [n, w](const RealPoint& x) {
      double r2 = 0.0;
      for (int j = 0; j < n; ++j) r2 += x[j] * x[j];
      return Complex(std::exp(-r2 / (2 * w * w)));
    };
  };
  const auto f = CompactFunction::sample(gaussian(width), RealBox{RealPoint(n, -radius), RealPoint(n, radius)}, h);
  const auto pf = periodise_function(f, grid);
  const auto spec = forward_transform(pf, check);
  auto csv = ctx.open("periodise_spectrum.csv");
  csv << "xi,re,im,exact,error\n";
  double err = 0.0;
  check.box().for_each([&](const LatticePoint& xi) {
    double r2 = 0.0;
    for (int j = 0; j < n; ++j) r2 += static_cast<double>(xi[j]) * xi[j];
    const double exact = std::pow(width, n) * std::pow(kTwoPi, -0.5 * n) * std::exp(-0.5 * width * width * r2);
    const Complex v = spec.at(xi);
    const double e = std::abs(v - exact);
    err = std::max(err, e);
    csv << join(xi) << ',' << format_real(v.real()) << ',' << format_real(v.imag()) << ',' << format_real(exact) << ','
        << format_real(e) << '\n';
  });
  ctx.check(err < tolerance, "periodised Gaussian spectrum error " + format_real(err));
  json summary = {{"spectrum_error", err}};

  if (commutation) {
    const std::vector<std::pair<std::string, EuclideanSymbol>> pairs = {
        {"one", [](const RealPoint&, const RealPoint&) { return Complex(1.0); }},
        {"derivative", [](const RealPoint&, const RealPoint& xi) { return Complex(0.0, xi[0]); }},
        {"cosine", [](const RealPoint& x, const RealPoint&) { return Complex(2.0 + std::cos(x[0])); }},
    };
    auto com = ctx.open("commutation.csv");
    com << "symbol,discrepancy,budget,pass\n";
    bool all = true;
    for (const auto& [name, a] : pairs) {
      const auto r = verify_p1(a, f, grid, FrequencyWindow::full(grid));
      all = all && r.pass;
      com << name << ',' << format_real(r.discrepancy) << ',' << format_real(r.budget) << ',' << (r.pass ? 1 : 0) << '\n';
    }
    ctx.check(all, "commutation discrepancy within budget for every symbol");

    // order -1 symbol cut off in x, against a Gaussian supported in [-pi, pi]
    const auto g = CompactFunction::sample([](const RealPoint& x) { return Complex(std::exp(-x[0] * x[0] / 0.32)); },
                                           RealBox{RealPoint{-kPi}, RealPoint{kPi}}, kTwoPi / 256);
    CompactSymbol a0{1,
                     [](const RealPoint& x, const RealPoint& xi) {
                       const double t = x[0] / 2.5;
                       const double chi = std::abs(t) >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - t * t));
                       return Complex(chi / japanese_bracket(xi));
                     },
                     RealBox{RealPoint{-2.5}, RealPoint{2.5}},
                     {-1.0, 1.0, 0.0}};
    EuclideanQuadrature q;
    q.cutoff = 24.0;
    const auto res = smoothing_residual(a0, g, RealBox{RealPoint{-2.5 * kPi}, RealPoint{2.5 * kPi}}, q);
    auto rc = ctx.open("residual.csv");
    rc << "x,re,im\n";
    for (std::size_t i = 0; i < res.residual.size(); ++i)
      rc << format_real(res.residual.node(i)[0]) << ',' << format_real(res.residual[i].real()) << ','
         << format_real(res.residual[i].imag()) << '\n';
    ctx.check(res.inside_max < 1e-8, "smoothing residual on [-pi, pi] is " + format_real(res.inside_max));
    summary["residual_inside"] = res.inside_max;
  }
  summary["pass"] = ctx.result.exit_code == kPass;
  ctx.write_json("periodise_summary.json", summary);
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

void cmd_solve(Config& cfg, Context& ctx) {
  const auto preset = cfg.require<std::string>("preset");
  if (preset != "transport" && preset != "modulus" && preset != "perturbed") {
    throw ConfigError("unknown solve preset '" + preset + "'");
  }
  const bool perturbed = preset == "perturbed";
  const int n = cfg.get<int>("n", 1);
  const int points = cfg.get<int>("N", perturbed ? 32 : 64);
  const int cutoff = cfg.get<int>("cutoff", perturbed ? 6 : points / 4);
  const double spacing = kTwoPi / points;
  const double t_final = cfg.get<double>("t_final", preset == "transport" ? 8 * spacing : 1.0);
  const double dt = cfg.get<double>("dt", perturbed ? 1.0 / 40 : 0.5 / points);
  const int snapshots = cfg.get<int>("snapshots", 4);
  const auto schedule = cfg.get<std::string>("schedule", "uniform");
  const int levels = cfg.get<int>("levels", 3);
  cfg.finish();
  if (n != 1) throw ConfigError("solve presets are one-dimensional");
  require_range("cutoff", cutoff, 0, points / 2 - 1);
  require_range("snapshots", snapshots, 1, 1000);
  require_range("levels", levels, 2, 6);
  if (!(t_final > 0.0)) throw ConfigError("t_final must be positive");
  if (schedule != "uniform" && schedule != "geometric") throw ConfigError("schedule is uniform or geometric");
  const TorusGrid grid(1, points);
  std::mt19937_64 gen(ctx.seed);

  HyperbolicProblem p;
  p.initial = random_band_limited(grid, cutoff, gen);
  p.t_final = t_final;
  p.dt = dt;
  if (preset == "modulus") {
    p.a1 = [](const LatticePoint& k) { return std::abs(static_cast<double>(k[0])); };
  } else {
    p.a1 = [](const LatticePoint& k) { return static_cast<double>(k[0]); };
  }
  if (perturbed) {
    p.a0 = ToroidalSymbol(1, [](const RealPoint& x, const LatticePoint& xi) {
      return Complex(0.3 * (1.0 + std::cos(x[0])) + 0.2 * std::sin(x[0]) / japanese_bracket(xi));
    });
  }
  if (snapshots > 1) {
    p.snapshot_times = schedule == "uniform" ? uniform_schedule(t_final, snapshots)
                                             : geometric_schedule(t_final / 100, t_final, snapshots);
  }
  if (dt * multiplier_bound(p.a1, grid) > 0.5) throw ConfigError("dt violates dt max|a1| <= 0.5");

  const auto trace = solve_perturbed(p);
  {
    auto f = ctx.open("trace.csv");
    write_trace_csv(trace, f);
  }
  {
    auto f = ctx.open("norms.csv");
    write_norms_csv(trace, f);
  }
  json summary = {{"preset", preset}, {"times", trace.times}, {"norms", trace.norms}};

  if (preset == "transport") {
    const double shifts = t_final / spacing;
    if (std::abs(shifts - std::round(shifts)) > 1e-9) throw ConfigError("transport needs t_final on the grid spacing");
    const auto s = static_cast<std::size_t>(std::llround(shifts)) % grid.size();
    double err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
      err = std::max(err, std::abs(trace.snapshots.back()[i] - p.initial[(i + grid.size() - s) % grid.size()]));
    ctx.check(err < 1e-10, "final field equals the shifted initial field to " + format_real(err));
    summary["shift_error"] = err;
  } else if (preset == "modulus") {
    double drift = 0.0;
    for (double e : trace.norms) drift = std::max(drift, std::abs(e - trace.norms.front()));
    ctx.check(drift < 1e-12, "L2 norm conserved to " + format_real(drift));
    summary["norm_drift"] = drift;
  } else {
    const auto study = self_convergence(p, levels);
    auto f = ctx.open("convergence.csv");
    f << "dt,difference,order\n";
    for (std::size_t l = 0; l < study.differences.size(); ++l) {
      f << format_real(study.steps[l]) << ',' << format_real(study.differences[l]) << ','
        << (l < study.orders.size() ? format_real(study.orders[l]) : std::string()) << '\n';
    }
    const double worst = *std::min_element(study.orders.begin(), study.orders.end());
    ctx.check(worst >= 1.9, "splitting self-convergence order " + format_real(worst));
    summary["orders"] = study.orders;
  }
  summary["pass"] = ctx.result.exit_code == kPass;
  ctx.write_json("solve_summary.json", summary);
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"taylor", "extend", "l2bound", "compose", "periodise", "solve"};
  return names;
}

RunResult run(const std::string& command, const json& config, const RunOptions& options) {
  Context ctx;
  try {
    Config cfg(config);
    ctx.base = options.config_dir;
    ctx.seed = options.seed ? *options.seed : cfg.get<std::uint64_t>("seed", 1);
    ctx.out = options.output ? *options.output : fs::path(cfg.get<std::string>("output_dir", "tpdo_out"));
    const int threads = options.threads ? *options.threads : cfg.get<int>("threads", 1);
    require_range("threads", threads, 1, 256);
    set_thread_count(threads);
    if (command == "taylor") {
      cmd_taylor(cfg, ctx);
    } else if (command == "extend") {
      cmd_extend(cfg, ctx);
    } else if (command == "l2bound") {
      cmd_l2bound(cfg, ctx);
    } else if (command == "compose") {
      cmd_compose(cfg, ctx);
    } else if (command == "periodise") {
      cmd_periodise(cfg, ctx);
    } else if (command == "solve") {
      cmd_solve(cfg, ctx);
    } else {
      throw ConfigError("unknown subcommand '" + command + "'");
    }
  } catch (const ConfigError& e) {
    ctx.result.exit_code = kUsageError;
    ctx.result.messages.push_back(std::string("config error: ") + e.what());
  } catch (const InvalidArgument& e) {
    ctx.result.exit_code = kUsageError;
    ctx.result.messages.push_back(std::string("invalid argument: ") + e.what());
  } catch (const Mismatch& e) {
    ctx.result.exit_code = kUsageError;
    ctx.result.messages.push_back(std::string("invalid argument: ") + e.what());
  } catch (const std::exception& e) {
    ctx.result.exit_code = kNumericFailure;
    ctx.result.messages.push_back(std::string("numeric failure: ") + e.what());
  }
  return ctx.result;
}

RunResult run_file(const std::string& command, const fs::path& config, const RunOptions& options) {
  std::ifstream in(config);
  if (!in) {
    RunResult r;
    r.exit_code = kUsageError;
    r.messages.push_back("cannot read config " + config.string());
    return r;
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    RunResult r;
    r.exit_code = kUsageError;
    r.messages.push_back(std::string("malformed JSON: ") + e.what());
    return r;
  }
  RunOptions opts = options;
  if (opts.config_dir.empty()) opts.config_dir = config.parent_path();
  return run(command, j, opts);
}

}  // namespace tpdo::cli
