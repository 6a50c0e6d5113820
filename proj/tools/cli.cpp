#include "cli.hpp"

#include "coca/error.hpp"
#include "coca/evalkit.hpp"
#include "coca/experiment.hpp"
#include "coca/matrix_io.hpp"
#include "coca/nonparanormal.hpp"
#include "coca/psd_project.hpp"
#include "coca/rank_stats.hpp"
#include "coca/rng.hpp"
#include "coca/sparse_eigen.hpp"
#include "coca/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <regex>
#include <set>
#include <type_traits>

namespace coca::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// A configuration value that cannot be used, tagged with its field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

template <class T>
void load_scalar(const json& j, T& out) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) throw std::invalid_argument("expected true or false");
    out = j.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw std::invalid_argument("expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (!j.is_number_unsigned()) throw std::invalid_argument("expected a nonnegative integer");
    }
    out = j.get<T>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) throw std::invalid_argument("expected a number");
    out = j.get<T>();
  } else {
    if (!j.is_string()) throw std::invalid_argument("expected a string");
    out = j.get<T>();
  }
}

template <class T>
void load_value(const json& j, T& out) {
  if constexpr (is_vector<T>::value) {
    T values;
    const auto load_one = [&](const json& e) {
      typename T::value_type v{};
      load_scalar(e, v);
      values.push_back(v);
    };
    if (j.is_array()) {
      for (const auto& e : j) load_one(e);
    } else {
      load_one(j);
    }
    out = std::move(values);
  } else {
    load_scalar(j, out);
  }
}

std::string config_key(const std::string& flag) {
  std::string key = flag;
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

/// Options whose value comes from the command line, else the config file,
/// else the built-in default.
class Bindings {
 public:
  template <class T>
  CLI::Option* option(CLI::App* app, const std::string& flag, T& var, const std::string& desc) {
    CLI::Option* opt = app->add_option("--" + flag, var, desc)->capture_default_str();
    if constexpr (is_vector<T>::value) opt->delimiter(',');
    add(flag, opt, var);
    return opt;
  }

  CLI::Option* flag(CLI::App* app, const std::string& flag, bool& var, const std::string& desc) {
    CLI::Option* opt = app->add_flag("--" + flag, var, desc);
    add(flag, opt, var);
    return opt;
  }

  void resolve(const json& config) const {
    for (const auto& b : bindings_) {
      if (b.option->count() > 0 || !config.contains(b.key)) continue;
      try {
        b.load(config.at(b.key));
      } catch (const std::exception& e) {
        throw ConfigError(b.key, b.key + ": " + e.what());
      }
    }
  }

  [[nodiscard]] bool knows(const std::string& key) const {
    return std::any_of(bindings_.begin(), bindings_.end(), [&](const auto& b) { return b.key == key; });
  }

  void dump(json& into) const {
    for (const auto& b : bindings_) into[b.key] = b.dump();
  }

 private:
  struct Binding {
    std::string key;
    CLI::Option* option;
    std::function<void(const json&)> load;
    std::function<json()> dump;
  };

  template <class T>
  void add(const std::string& flag, CLI::Option* opt, T& var) {
    bindings_.push_back({config_key(flag), opt, [&var](const json& j) { load_value(j, var); },
                         [&var] { return json(var); }});
  }

  std::vector<Binding> bindings_;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Shortest round-trip text, for file names.
std::string shortest(double x) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_text(const fs::path& p, const std::string& text) {
  ensure_parent(p);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + p.string());
  out << text;
}

void write_matrix(const fs::path& p, const Matrix& m, const std::vector<std::string>& header = {}) {
  ensure_parent(p);
  write_csv(p, m, header);
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

/// Run record written next to the primary output of every command.
class Manifest {
 public:
  Manifest() { j_["started_at"] = utc_now(); }

  json& operator[](const char* key) { return j_[key]; }
  void set_path(fs::path p) { path_ = std::move(p); }
  [[nodiscard]] bool has_path() const { return !path_.empty(); }
  void output(const fs::path& p) { j_["outputs"].push_back(p.string()); }

  void write(const std::string& status, const std::string& error = {}) {
    if (path_.empty()) return;
    j_["status"] = status;
    if (!error.empty()) j_["error"] = error;
    j_["finished_at"] = utc_now();
    write_text(path_, j_.dump(2) + "\n");
  }

 private:
  json j_;
  fs::path path_;
};

struct Globals {
  std::string config;
  std::string output_dir;
  std::size_t threads = 0;
  bool json_errors = false;
};

/// Shared state of one invocation.
struct Context {
  Globals globals;
  json config = json::object();
  Bindings global_bindings;
  std::ostream* out = nullptr;

  [[nodiscard]] fs::path output_dir() const { return globals.output_dir; }
  [[nodiscard]] fs::path resolve(const std::string& name) const {
    const fs::path p(name);
    return p.is_absolute() ? p : output_dir() / p;
  }
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "config: expected a JSON object");
  return j;
}

void check_known_keys(const json& config, const Bindings& globals, const Bindings& local,
                      const std::set<std::string>& extra = {}) {
  for (const auto& [key, value] : config.items()) {
    if (globals.knows(key) || local.knows(key) || extra.count(key)) continue;
    throw ConfigError(key, key + ": unknown field for this subcommand");
  }
}

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, field + ": " + message);
}

/// A subcommand: its options, plus the action run after resolution.
class Command {
 public:
  virtual ~Command() = default;
  CLI::App* app = nullptr;
  Bindings bindings;

  virtual std::set<std::string> extra_keys() const { return {}; }
  virtual void execute(Context& ctx, Manifest& manifest) = 0;
};

// ---------------------------------------------------------------- estimate

class EstimateCommand : public Command {
 public:
  explicit EstimateCommand(CLI::App& root) {
    app = root.add_subcommand("estimate", "Correlation estimate of a data CSV (rows are observations)");
    bindings.option(app, "input", input_, "Data CSV");
    bindings.flag(app, "header", header_, "Input has a header row");
    bindings.option(app, "method", method_,
                    "pearson | spearman (sine-transformed) | spearman-raw | spearman-covariance");
    bindings.option(app, "output", output_, "Output matrix CSV");
  }

  void execute(Context& ctx, Manifest& manifest) override {
    require(!input_.empty(), "input", "required");
    static const std::set<std::string> methods{"pearson", "spearman", "spearman-raw", "spearman-covariance"};
    require(methods.count(method_) > 0, "method", "unknown method '" + method_ + "'");
    const fs::path out = ctx.resolve(output_);
    manifest.set_path(out.string() + ".manifest.json");

    const auto table = read_csv(input_, header_);
    const DataMatrix data(table.values);
    Matrix m;
    std::string kind;
    if (method_ == "pearson") {
      const auto e = pearson_correlation(data);
      m = e.matrix;
      kind = std::string(to_string(e.kind));
    } else if (method_ == "spearman") {
      const auto e = spearman_sine_matrix(data);
      m = e.matrix;
      kind = std::string(to_string(e.kind));
    } else if (method_ == "spearman-raw") {
      const auto e = spearman_rho_matrix(data);
      m = e.matrix;
      kind = std::string(to_string(e.kind));
    } else {
      const auto e = spearman_covariance(data);
      m = e.matrix;
      kind = std::string(to_string(e.kind));
    }
    write_matrix(out, m, table.header);
    manifest.output(out);
    manifest["kind"] = kind;
    manifest["n"] = data.n();
    manifest["d"] = data.d();
    *ctx.out << "wrote " << out.string() << " (" << kind << ", " << data.d() << "x" << data.d() << ")\n";
  }

 private:
  std::string input_;
  bool header_ = false;
  std::string method_ = "spearman";
  std::string output_ = "estimate.csv";
};

// ------------------------------------------------------------- project-psd

class ProjectPsdCommand : public Command {
 public:
  explicit ProjectPsdCommand(CLI::App& root) {
    app = root.add_subcommand("project-psd", "Nearest PSD matrix in element-wise max norm");
    bindings.option(app, "input", input_, "Symmetric matrix CSV");
    bindings.flag(app, "header", header_, "Input has a header row");
    bindings.option(app, "output", output_, "Output matrix CSV; a .json sidecar holds the certificate");
    bindings.option(app, "eig-tol", opts_.eig_tol, "Inputs with min eigenvalue >= -eig-tol pass through");
    bindings.option(app, "dist-tol", opts_.dist_tol, "Width of the certified bracket at convergence");
    bindings.option(app, "max-iters", opts_.max_iters, "Iteration budget");
  }

  void execute(Context& ctx, Manifest& manifest) override {
    require(!input_.empty(), "input", "required");
    require(opts_.dist_tol > 0, "dist_tol", "must be positive");
    require(opts_.eig_tol >= 0, "eig_tol", "must be nonnegative");
    require(opts_.max_iters > 0, "max_iters", "must be positive");
    const fs::path out = ctx.resolve(output_);
    manifest.set_path(out.string() + ".manifest.json");

    const auto table = read_csv(input_, header_);
    PsdProjectionResult res;
    std::exception_ptr failure;
    try {
      res = project_psd_maxnorm(table.values, opts_);
    } catch (const NotConverged& e) {
      res = e.best();
      failure = std::current_exception();
    }

    write_matrix(out, res.matrix, table.header);
    json side;
    side["input_min_eigenvalue"] = min_eigenvalue(0.5 * (table.values + table.values.transpose()));
    side["achieved_distance"] = res.achieved_distance;
    side["lower_bound"] = res.lower_bound;
    side["min_eigenvalue"] = res.min_eigenvalue;
    side["iterations"] = res.iterations;
    side["converged"] = res.converged;
    side["trace"] = json::array();
    for (const auto& s : res.trace) side["trace"].push_back({s.iteration, s.lower, s.upper});
    const fs::path sidecar = out.string() + ".json";
    write_text(sidecar, side.dump(2) + "\n");
    manifest.output(out);
    manifest.output(sidecar);
    manifest["achieved_distance"] = res.achieved_distance;
    manifest["converged"] = res.converged;
    if (failure) std::rethrow_exception(failure);
    *ctx.out << "wrote " << out.string() << " (distance " << res.achieved_distance << ", certified >= "
             << res.lower_bound << ")\n";
  }

 private:
  std::string input_;
  bool header_ = false;
  std::string output_ = "projected.csv";
  PsdProjectionOptions opts_;
};

// -------------------------------------------------------------- sparse-pca

class SparsePcaCommand : public Command {
 public:
  explicit SparsePcaCommand(CLI::App& root) {
    app = root.add_subcommand("sparse-pca", "Sparse leading eigenvectors of a symmetric matrix CSV");
    bindings.option(app, "input", input_, "Symmetric matrix CSV");
    bindings.flag(app, "header", header_, "Input has a header row");
    bindings.option(app, "method", method_, "tpower | qtpm | pmd | spca");
    bindings.option(app, "q", q_, "qtpm: l_q exponent in (0, 1]");
    bindings.option(app, "k", k_, "tpower: support size");
    bindings.option(app, "radius", radius_, "qtpm: R_q");
    bindings.option(app, "delta", delta_, "pmd: l1 radius");
    bindings.option(app, "ridge", ridge_, "spca: ridge penalty delta1");
    bindings.option(app, "lasso", lasso_, "spca: lasso penalty delta2");
    bindings.option(app, "m", m_, "Number of components (by deflation)");
    bindings.option(app, "shift", shift_, "tpower/qtpm/spca: diagonal shift");
    bindings.flag(app, "auto-shift", auto_shift_, "Shift by max(0, -lambda_min)(1 + 1e-3)");
    bindings.option(app, "init", init_, "tpower/qtpm start: spca | power");
    bindings.option(app, "max-iters", max_iters_, "Iteration cap per component");
    bindings.option(app, "output", output_, "Output JSON");
  }

  void execute(Context& ctx, Manifest& manifest) override {
    require(!input_.empty(), "input", "required");
    static const std::set<std::string> methods{"tpower", "qtpm", "pmd", "spca"};
    require(methods.count(method_) > 0, "method", "unknown method '" + method_ + "'");
    require(init_ == "spca" || init_ == "power", "init", "expected spca or power");
    require(m_ >= 1, "m", "must be at least 1");
    require(max_iters_ > 0, "max_iters", "must be positive");
    require(shift_ >= 0, "shift", "must be nonnegative");
    const fs::path out = ctx.resolve(output_);
    manifest.set_path(out.string() + ".manifest.json");

    const Matrix gamma = read_csv(input_, header_).values;
    require(m_ <= static_cast<std::size_t>(gamma.rows()), "m", "exceeds the dimension");

    ComponentParams p;
    SparseMethod method = SparseMethod::qtpm;
    if (method_ == "tpower" || method_ == "qtpm") {
      p.qtpm.q = method_ == "tpower" ? 0.0 : q_;
      p.qtpm.radius = method_ == "tpower" ? static_cast<double>(k_) : radius_;
      p.qtpm.max_iters = max_iters_;
      p.qtpm.shift = shift_;
      p.qtpm.auto_shift = auto_shift_;
      p.qtpm.init = init_ == "spca" ? InitKind::spca : InitKind::power_method;
    } else if (method_ == "pmd") {
      method = SparseMethod::pmd;
      p.pmd_delta = delta_;
      p.pmd.max_iters = max_iters_;
    } else {
      method = SparseMethod::spca;
      p.spca_ridge = ridge_;
      p.spca_lasso = lasso_;
      p.spca.max_iters = max_iters_;
      p.spca.shift = auto_shift_ ? psd_shift(gamma) : shift_;
    }
    const std::vector<ComponentParams> params{p};
    const auto comps = top_m_eigenvectors(gamma, m_, method, params);

    json result;
    result["method"] = method_;
    result["d"] = gamma.rows();
    result["components"] = json::array();
    for (const auto& c : comps) {
      json jc;
      jc["vector"] = vector_json(c.vector);
      jc["support"] = c.support;
      jc["objective"] = c.objective;
      jc["iterations"] = c.iterations;
      jc["converged"] = c.converged;
      json trace;
      trace["length"] = c.objective_trace.size();
      if (!c.objective_trace.empty()) {
        trace["first"] = c.objective_trace.front();
        trace["last"] = c.objective_trace.back();
      }
      jc["trace"] = trace;
      result["components"].push_back(jc);
    }
    write_text(out, result.dump(2) + "\n");
    manifest.output(out);
    *ctx.out << "wrote " << out.string() << " (" << comps.size() << " component"
             << (comps.size() == 1 ? "" : "s") << ")\n";
  }

 private:
  std::string input_;
  bool header_ = false;
  std::string method_ = "tpower";
  double q_ = 0.5;
  std::size_t k_ = 10;
  double radius_ = 2.0;
  double delta_ = 3.0;
  double ridge_ = 1e-4;
  double lasso_ = 0.1;
  std::size_t m_ = 1;
  double shift_ = 0.0;
  bool auto_shift_ = false;
  std::string init_ = "spca";
  int max_iters_ = 1000;
  std::string output_ = "sparse_pca.json";
};

// ---------------------------------------------------------------- simulate

void check_model_fields(int scheme, std::size_t n, std::size_t d, std::size_t s, double r) {
  require(scheme == 1 || scheme == 2, "scheme", "expected 1 or 2");
  require(n >= 3, "n", "must be at least 3");
  require(s >= 1, "s", "must be at least 1");
  require(d >= 2 * s, "d", "must be at least 2 s");
  require(r >= 0 && r < 1, "r", "must lie in [0, 1)");
}

class SimulateCommand : public Command {
 public:
  explicit SimulateCommand(CLI::App& root) {
    app = root.add_subcommand("simulate", "Draw a (contaminated) nonparanormal sample from the spiked model");
    bindings.option(app, "scheme", scheme_, "1: identity margins, 2: h1..h5 margins");
    bindings.option(app, "n", n_, "Sample size");
    bindings.option(app, "d", d_, "Dimension");
    bindings.option(app, "s", s_, "Support size of each leading eigenvector");
    bindings.option(app, "r", r_, "Contamination rate");
    bindings.option(app, "magnitude", magnitude_, "Contamination magnitude");
    bindings.option(app, "seed", seed_, "Seed; sampling uses stream 0, contamination stream 1");
    bindings.option(app, "output", output_, "Sample CSV");
    bindings.flag(app, "latent", latent_, "Also write the latent Gaussian draws to <stem>_latent.csv");
    bindings.flag(app, "positions", positions_, "Record contaminated positions in the manifest");
  }

  void execute(Context& ctx, Manifest& manifest) override {
    check_model_fields(scheme_, n_, d_, s_, r_);
    const fs::path out = ctx.resolve(output_);
    manifest.set_path(out.string() + ".manifest.json");

    const auto model = synthesize_model(d_, s_);
    const auto transforms = scheme_transforms(scheme_, d_);
    const std::uint64_t sample_seed = derive_seed(seed_, 0);
    const std::uint64_t contamination_seed = derive_seed(seed_, 1);
    const auto sample = sample_nonparanormal(model.sigma0, transforms, n_, sample_seed);
    const ContaminationSpec spec{r_, magnitude_};
    const auto contaminated = contaminate(sample.x, spec, contamination_seed);

    write_matrix(out, contaminated.data.values());
    manifest.output(out);
    if (latent_) {
      const fs::path lat = out.parent_path() / (out.stem().string() + "_latent.csv");
      write_matrix(lat, sample.latent.values());
      manifest.output(lat);
    }

    json m;
    m["d"] = d_;
    m["s"] = s_;
    m["omega"] = {model.omega1, model.omega2};
    m["sigma0_leading_eigenvalues"] = {model.sigma0_eigenvalues(0), model.sigma0_eigenvalues(1)};
    json names = json::array();
    for (auto t : transforms) names.push_back(std::string(to_string(t)));
    m["transforms"] = names;
    manifest["model"] = m;
    manifest["seeds"] = {{"base", seed_}, {"sampling", sample_seed}, {"contamination", contamination_seed}};
    manifest["contamination"] = {{"rate", r_}, {"magnitude", magnitude_}, {"per_column", spec.count(n_)}};
    if (positions_) {
      json pos = json::array();
      for (const auto& e : contaminated.entries) pos.push_back({e.row, e.column, e.value});
      manifest["contamination"]["positions"] = pos;
    }
    *ctx.out << "wrote " << out.string() << " (" << n_ << "x" << d_ << ")\n";
  }

 private:
  int scheme_ = 1;
  std::size_t n_ = 200;
  std::size_t d_ = 100;
  std::size_t s_ = 10;
  double r_ = 0.0;
  double magnitude_ = 5.0;
  std::uint64_t seed_ = 20131001;
  std::string output_ = "sample.csv";
  bool latent_ = false;
  bool positions_ = false;
};

// -------------------------------------------------------------- experiment

template <class E>
std::vector<E> parse_names(const std::vector<std::string>& names, const std::string& field) {
  std::vector<E> out;
  for (const auto& name : names) {
    E value{};
    require(parse(name, value), field, "unknown value '" + name + "'");
    out.push_back(value);
  }
  require(!out.empty(), field, "must not be empty");
  return out;
}

json grids_json(const TuningGrids& g) {
  return {{"tpower_k", g.tpower_k},     {"qtpm_radius", g.qtpm_radius}, {"qtpm_q", g.qtpm_q},
          {"pmd_delta", g.pmd_delta},   {"spca_lasso", g.spca_lasso},   {"spca_ridge", g.spca_ridge}};
}

TuningGrids grids_from_config(const json& config, std::size_t d, double q) {
  TuningGrids g = TuningGrids::defaults(d, q);
  if (!config.contains("grids")) return g;
  const json& j = config.at("grids");
  require(j.is_object(), "grids", "expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string field = "grids." + key;
    try {
      if (key == "tpower_k") load_value(value, g.tpower_k);
      else if (key == "qtpm_radius") load_value(value, g.qtpm_radius);
      else if (key == "pmd_delta") load_value(value, g.pmd_delta);
      else if (key == "spca_lasso") load_value(value, g.spca_lasso);
      else if (key == "spca_ridge") load_value(value, g.spca_ridge);
      else if (key == "qtpm_q") require(value.is_number() && value.get<double>() == q, field,
                                         "set qtpm_q at the top level");
      else throw ConfigError(field, field + ": unknown grid");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(field, field + ": " + e.what());
    }
  }
  return g;
}

class ExperimentCommand : public Command {
 public:
  explicit ExperimentCommand(CLI::App& root) {
    app = root.add_subcommand("experiment", "Replicated sparse PCA comparison over n x r cells");
    bindings.option(app, "scheme", scheme_, "1: identity margins, 2: h1..h5 margins");
    bindings.option(app, "n", ns_, "Sample sizes (comma separated)");
    bindings.option(app, "d", d_, "Dimension");
    bindings.option(app, "s", s_, "Support size of each leading eigenvector");
    bindings.option(app, "r", rs_, "Contamination rates (comma separated)");
    bindings.option(app, "magnitude", magnitude_, "Contamination magnitude");
    bindings.option(app, "methods", methods_, "Subset of pmd, spca, tpower, qtpm");
    bindings.option(app, "estimators", estimators_, "Subset of pearson, spearman, oracle");
    bindings.option(app, "replicates", replicates_, "Replicates per cell");
    bindings.option(app, "seed", seed_, "Base seed; replicate i uses derive_seed(seed, i)");
    bindings.option(app, "spearman-psd", spearman_psd_, "projected | shifted | raw");
    bindings.option(app, "qtpm-q", qtpm_q_, "q used by the qtpm method");
    bindings.option(app, "output", output_,
                    "Table CSV; ROC CSVs roc_s<scheme>_<method>_r<r>.csv go next to it");
    app->footer("Tuning grids come from the config file key \"grids\" (tpower_k, qtpm_radius, pmd_delta,\n"
                "spca_lasso, spca_ridge); unset grids use the defaults recorded in the manifest.");
  }

  std::set<std::string> extra_keys() const override { return {"grids"}; }

  void execute(Context& ctx, Manifest& manifest) override {
    require(!ns_.empty(), "n", "must not be empty");
    require(!rs_.empty(), "r", "must not be empty");
    for (auto n : ns_) check_model_fields(scheme_, n, d_, s_, 0.0);
    for (auto r : rs_) require(r >= 0 && r < 1, "r", "must lie in [0, 1)");
    require(qtpm_q_ > 0 && qtpm_q_ <= 1, "qtpm_q", "must lie in (0, 1]");
    SpearmanPsd psd{};
    require(parse(spearman_psd_, psd), "spearman_psd", "unknown value '" + spearman_psd_ + "'");

    ExperimentConfig base;
    base.scheme = scheme_;
    base.d = d_;
    base.s = s_;
    base.magnitude = magnitude_;
    base.methods = parse_names<Method>(methods_, "methods");
    base.estimators = parse_names<Estimator>(estimators_, "estimators");
    base.grids = grids_from_config(ctx.config, d_, qtpm_q_);
    base.replicates = replicates_;
    base.base_seed = seed_;
    base.threads = ctx.globals.threads;
    base.spearman_psd = psd;

    std::vector<ExperimentConfig> configs;
    for (auto n : ns_) {
      for (auto r : rs_) {
        ExperimentConfig c = base;
        c.n = n;
        c.r = r;
        c.validate();
        configs.push_back(c);
      }
    }

    const fs::path out = ctx.resolve(output_);
    manifest.set_path(out.string() + ".manifest.json");
    manifest["grids"] = grids_json(base.grids);

    std::vector<ExperimentResult> results;
    for (const auto& c : configs) {
      *ctx.out << "running n=" << c.n << " r=" << shortest(c.r) << " (" << c.replicates << " replicates)\n";
      results.push_back(replicate_experiment(c));
    }
    manifest["replicate_seeds"] = results.front().replicate_seeds;

    // Table layout: method, n, r, estimator
    std::string table = "scheme,method,n,r,estimator,mean,sd,replicates,excluded,mean_oracle_delta\n";
    json cells = json::array();
    for (Method m : base.methods) {
      for (const auto& res : results) {
        for (const auto& cell : res.cells) {
          if (cell.key.method != m) continue;
          table += std::to_string(scheme_) + "," + std::string(to_string(m)) + "," +
                   std::to_string(cell.key.n) + "," + format_double(cell.key.r) + "," +
                   std::string(to_string(cell.key.estimator)) + "," + format_double(cell.sin_angle.mean) + "," +
                   format_double(cell.sin_angle.sd) + "," + std::to_string(cell.replicates) + "," +
                   std::to_string(cell.excluded) + "," + format_double(cell.oracle_delta.mean) + "\n";
          json jc{{"method", to_string(m)},
                  {"estimator", to_string(cell.key.estimator)},
                  {"n", cell.key.n},
                  {"r", cell.key.r},
                  {"mean", cell.sin_angle.mean},
                  {"sd", cell.sin_angle.sd},
                  {"excluded", cell.excluded},
                  {"failed_points", cell.failed_points},
                  {"unconverged_points", cell.unconverged_points}};
          if (auto it = res.roc.find(cell.key); it != res.roc.end()) {
            jc["auc"] = it->second.auc;
            jc["fpr_range"] = {it->second.fpr_min, it->second.fpr_max};
            jc["roc_degenerate"] = it->second.degenerate;
          }
          cells.push_back(jc);
        }
      }
    }
    write_text(out, table);
    manifest.output(out);
    manifest["cells"] = cells;

    json psd_fallbacks = json::array();
    for (const auto& res : results) {
      psd_fallbacks.push_back({{"n", res.config.n}, {"r", res.config.r}, {"count", res.psd_not_converged}});
    }
    manifest["psd_not_converged"] = psd_fallbacks;

    for (Method m : base.methods) {
      for (double r : rs_) {
        std::string roc = "n,estimator,delta,fpr,tpr,replicates\n";
        bool any = false;
        for (const auto& res : results) {
          if (res.config.r != r) continue;
          for (Estimator e : base.estimators) {
            const CellKey key{m, e, scheme_, res.config.n, r};
            const auto it = res.roc.find(key);
            if (it == res.roc.end()) continue;
            any = true;
            for (const auto& p : it->second.points) {
              roc += std::to_string(res.config.n) + "," + std::string(to_string(e)) + "," +
                     format_double(p.delta) + "," + format_double(p.fpr) + "," + format_double(p.tpr) + "," +
                     std::to_string(p.replicates) + "\n";
            }
          }
        }
        if (!any) continue;
        const fs::path path = out.parent_path() / ("roc_s" + std::to_string(scheme_) + "_" +
                                                   std::string(to_string(m)) + "_r" + shortest(r) + ".csv");
        write_text(path, roc);
        manifest.output(path);
      }
    }
    *ctx.out << "wrote " << out.string() << "\n";
  }

 private:
  int scheme_ = 1;
  std::vector<std::size_t> ns_{200};
  std::size_t d_ = 100;
  std::size_t s_ = 10;
  std::vector<double> rs_{0.0};
  double magnitude_ = 5.0;
  std::vector<std::string> methods_{"tpower"};
  std::vector<std::string> estimators_{"pearson", "spearman", "oracle"};
  std::size_t replicates_ = 100;
  std::uint64_t seed_ = 20131001;
  std::string spearman_psd_ = "projected";
  double qtpm_q_ = 0.5;
  std::string output_ = "table.csv";
};

// -------------------------------------------------------------- rate-check

class RateCheckCommand : public Command {
 public:
  explicit RateCheckCommand(CLI::App& root) {
    app = root.add_subcommand("rate-check", "Max-norm error of the Spearman estimate against sqrt(log d / n)");
    bindings.option(app, "ns", ns_, "Increasing sample sizes (comma separated)");
    bindings.option(app, "d", d_, "Dimension");
    bindings.option(app, "replicates", replicates_, "Replicates per n");
    bindings.option(app, "seed", seed_, "Base seed");
    bindings.option(app, "output", output_, "Output CSV");
  }

  void execute(Context& ctx, Manifest& manifest) override {
    require(d_ >= 2, "d", "must be at least 2");
    require(replicates_ >= 1, "replicates", "must be at least 1");
    require(!ns_.empty(), "ns", "must not be empty");
    const double floor_n = 21.0 / std::log(static_cast<double>(d_)) + 2.0;
    for (std::size_t i = 0; i < ns_.size(); ++i) {
      require(i == 0 || ns_[i] > ns_[i - 1], "ns", "must be increasing");
      require(static_cast<double>(ns_[i]) >= floor_n, "ns", "each n must be >= 21 / log d + 2");
    }
    const fs::path out = ctx.resolve(output_);
    manifest.set_path(out.string() + ".manifest.json");

    const auto rc = rate_check(ns_, d_, replicates_, seed_, ctx.globals.threads);
    std::string csv = "n,mean_error,sd_error,rate,scaled,bound,bound_holds,bound_vacuous\n";
    for (const auto& row : rc.rows) {
      csv += std::to_string(row.n) + "," + format_double(row.mean_error) + "," + format_double(row.sd_error) +
             "," + format_double(row.rate) + "," + format_double(row.scaled) + "," + format_double(row.bound) +
             "," + (row.bound_holds ? "true" : "false") + "," + (row.bound_vacuous ? "true" : "false") + "\n";
    }
    write_text(out, csv);
    manifest.output(out);
    *ctx.out << "wrote " << out.string() << "\n";
  }

 private:
  std::vector<std::size_t> ns_{100, 200, 400, 800, 1600};
  std::size_t d_ = 50;
  std::size_t replicates_ = 200;
  std::uint64_t seed_ = 20131001;
  std::string output_ = "rate_check.csv";
};

// ------------------------------------------------------------------ errors

std::string field_of(const std::string& message) {
  static const std::regex prefix(R"(^([A-Za-z_][A-Za-z0-9_.]*): )");
  std::smatch m;
  return std::regex_search(message, m, prefix) ? m[1].str() : std::string();
}

int report(std::ostream& err, bool as_json, const std::string& name, const std::string& message, int code,
           const std::string& field = {}) {
  if (as_json) {
    json j{{"error", name}, {"message", message}, {"exit_code", code}};
    if (!field.empty()) j["field"] = field;
    err << j.dump() << "\n";
  } else {
    err << "coca: " << name << ": " << message << "\n";
  }
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out = &out;
  ctx.globals.json_errors = std::find(args.begin(), args.end(), "--json-errors") != args.end();

  CLI::App root{"coca: copula component analysis", "coca"};
  root.set_version_flag("--version", std::string(library_version()));
  root.require_subcommand(1);
  root.add_option("--config", ctx.globals.config, "JSON config; keys are flag names with '_' for '-'");
  root.add_flag("--json-errors", ctx.globals.json_errors, "Write errors to stderr as JSON objects");
  ctx.global_bindings.option(&root, "output-dir", ctx.globals.output_dir,
                             "Directory for relative outputs (default: $COCA_OUTPUT_DIR, else .)");
  ctx.global_bindings.option(&root, "threads", ctx.globals.threads, "Worker threads, 0 for all cores");
  root.footer("Precedence: command-line flag > config file > default.\n"
              "Exit status: 0 ok, 2 configuration or input error, 3 numerical failure.");

  std::vector<std::unique_ptr<Command>> commands;
  commands.push_back(std::make_unique<EstimateCommand>(root));
  commands.push_back(std::make_unique<ProjectPsdCommand>(root));
  commands.push_back(std::make_unique<SparsePcaCommand>(root));
  commands.push_back(std::make_unique<SimulateCommand>(root));
  commands.push_back(std::make_unique<ExperimentCommand>(root));
  commands.push_back(std::make_unique<RateCheckCommand>(root));
  for (auto& c : commands) c->app->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    root.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      root.exit(e, out, err);
      return kOk;
    }
    return report(err, ctx.globals.json_errors, "UsageError", e.what(), kConfigError);
  }

  Command* command = nullptr;
  for (auto& c : commands) {
    if (c->app->parsed()) command = c.get();
  }

  Manifest manifest;
  try {
    ctx.config = load_config(ctx.globals.config);
    check_known_keys(ctx.config, ctx.global_bindings, command->bindings, command->extra_keys());
    ctx.global_bindings.resolve(ctx.config);
    command->bindings.resolve(ctx.config);
    if (ctx.globals.output_dir.empty()) {
      const char* env = std::getenv("COCA_OUTPUT_DIR");
      ctx.globals.output_dir = env != nullptr && *env != '\0' ? env : ".";
    }

    json resolved = json::object();
    ctx.global_bindings.dump(resolved);
    command->bindings.dump(resolved);
    manifest["tool"] = "coca";
    manifest["version"] = library_version();
    manifest["rng"] = kRngName;
    manifest["subcommand"] = command->app->get_name();
    manifest["resolved_config"] = resolved;
    manifest["outputs"] = json::array();

    command->execute(ctx, manifest);
    manifest.write("ok");
    return kOk;
  } catch (const ConfigError& e) {
    return report(err, ctx.globals.json_errors, "ConfigError", e.what(), kConfigError, e.field());
  } catch (const Error& e) {
    const std::string name(e.name());
    const int code = name.rfind("Invalid", 0) == 0 ? kConfigError : kNumericalError;
    manifest.write("error", name + ": " + e.what());
    return report(err, ctx.globals.json_errors, name, e.what(), code, field_of(e.what()));
  } catch (const std::exception& e) {
    manifest.write("error", e.what());
    return report(err, ctx.globals.json_errors, "Failure", e.what(), kFailure);
  }
}

}  // namespace coca::cli
