#include "drm/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>

#include "drm/error.hpp"

namespace drm::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct BadValue {
  std::string why;
};

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw BadValue{"not a number"};
  return v;
}

long long to_int(const std::string& s) {
  long long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw BadValue{"not an integer"};
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw BadValue{"expected true or false"};
}

template <class T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + f(v[i]);
  return out;
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

// Each setter parses and range-checks one value.
std::vector<Key> schema(RunConfig& c) {
  std::vector<Key> k;
  auto real = [&k](std::string sec, std::string name, double& ref, double lo, double hi, bool open_lo = false) {
    k.push_back({sec, name,
                 [&ref, lo, hi, open_lo](const std::string& s) {
                   const double v = to_double(s);
                   if (!(open_lo ? v > lo : v >= lo) || !(v <= hi))
                     throw BadValue{"out of range " + std::string(open_lo ? "(" : "[") + format_double(lo) + ", " +
                                    format_double(hi) + "]"};
                   ref = v;
                 },
                 [&ref] { return format_double(ref); }});
  };
  auto count = [&k]<class T>(std::string sec, std::string name, T& ref, long long lo) {
    k.push_back({sec, name,
                 [&ref, lo](const std::string& s) {
                   const long long v = to_int(s);
                   if (v < lo) throw BadValue{"must be >= " + std::to_string(lo)};
                   ref = static_cast<T>(v);
                 },
                 [&ref] { return std::to_string(ref); }});
  };
  auto flag = [&k](std::string sec, std::string name, bool& ref) {
    k.push_back({sec, name, [&ref](const std::string& s) { ref = to_bool(s); },
                 [&ref] { return std::string(ref ? "true" : "false"); }});
  };
  const double inf = std::numeric_limits<double>::infinity();

  k.push_back({"run", "seed",
               [&c](const std::string& s) {
                 std::uint64_t v = 0;
                 const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
                 if (ec != std::errc() || p != s.data() + s.size()) throw BadValue{"not an unsigned integer"};
                 c.seed = v;
               },
               [&c] { return std::to_string(c.seed); }});
  k.push_back({"run", "method",
               [&c](const std::string& s) {
                 static const char* known[] = {"drm", "nndrm", "ukl", "wd", "ulsif", "rulsif", "kliep"};
                 if (std::find(std::begin(known), std::end(known), s) == std::end(known))
                   throw BadValue{"unknown method"};
                 c.method = s;
               },
               [&c] { return c.method; }});

  count("data", "d", c.data.d, 1);
  count("data", "n", c.data.n, 1);
  count("data", "m", c.data.m, 1);
  real("data", "shift", c.data.shift, -inf, inf);
  count("data", "eval_points", c.data.eval_points, 1);
  k.push_back({"data", "input", [&c](const std::string& s) { c.data.input = s; }, [&c] { return c.data.input; }});

  count("model", "hidden", c.model.hidden, 1);
  k.push_back({"model", "mode",
               [&c](const std::string& s) {
                 try {
                   c.model.mode = output_mode_from_string(s);
                 } catch (const Error&) {
                   throw BadValue{"expected exponential or clipped_softplus"};
                 }
               },
               [&c] { return std::string(to_string(c.model.mode)); }});
  real("model", "clip_bound", c.model.clip_bound, 1.0, inf, true);
  flag("model", "spectral_norm", c.model.spectral_norm);

  count("train", "epochs", c.train.epochs, 0);
  count("train", "batch_size", c.train.batch_size, 1);
  real("train", "lr", c.train.lr, 0.0, inf, true);
  real("train", "beta1", c.train.beta1, 0.0, 1.0);
  real("train", "beta2", c.train.beta2, 0.0, 1.0);
  count("train", "eval_every", c.train.eval_every, 1);

  real("objective", "lambda", c.train.spec.lambda, 0.0, 1.0);
  k.push_back({"objective", "variant",
               [&c](const std::string& s) {
                 try {
                   c.train.spec.variant = variant_from_string(s);
                 } catch (const Error&) {
                   throw BadValue{"unknown variant"};
                 }
               },
               [&c] { return std::string(to_string(c.train.spec.variant)); }});
  real("objective", "C", c.train.spec.C, 0.0, inf);
  flag("objective", "sum_form", c.train.spec.sum_form);

  real("baselines", "alpha", c.baseline.alpha, 0.0, 0.999999);
  count("baselines", "max_centers", c.baseline.max_centers, 1);
  count("baselines", "folds", c.baseline.folds, 2);
  auto grid = [&k](std::string name, std::vector<double>& ref) {
    k.push_back({"baselines", name,
                 [&ref](const std::string& s) {
                   std::vector<double> v;
                   for (const auto& item : split_list(s)) {
                     v.push_back(to_double(item));
                     if (!(v.back() >= 0.0)) throw BadValue{"entries must be >= 0"};
                   }
                   if (v.empty()) throw BadValue{"empty list"};
                   ref = v;
                 },
                 [&ref] { return join<double>(ref, format_double); }});
  };
  grid("sigma_factors", c.baseline.sigma_factors);
  grid("reg_grid", c.baseline.reg_grid);
  count("baselines", "kliep_iterations", c.kliep.iterations, 0);
  real("baselines", "kliep_step", c.kliep.step, 0.0, inf, true);

  k.push_back({"benchmark", "methods",
               [&c](const std::string& s) {
                 static const char* known[] = {"drm", "nndrm", "ukl", "wd", "ulsif", "rulsif", "kliep"};
                 auto v = split_list(s);
                 for (const auto& m : v)
                   if (std::find(std::begin(known), std::end(known), m) == std::end(known))
                     throw BadValue{"unknown method '" + m + "'"};
                 if (v.empty()) throw BadValue{"empty list"};
                 c.benchmark.methods = v;
               },
               [&c] { return join<std::string>(c.benchmark.methods, [](const std::string& x) { return x; }); }});
  k.push_back({"benchmark", "dims",
               [&c](const std::string& s) {
                 std::vector<std::size_t> v;
                 for (const auto& item : split_list(s)) {
                   const long long d = to_int(item);
                   if (d < 1) throw BadValue{"dimensions must be >= 1"};
                   v.push_back(static_cast<std::size_t>(d));
                 }
                 if (v.empty()) throw BadValue{"empty list"};
                 c.benchmark.dims = v;
               },
               [&c] { return join<std::size_t>(c.benchmark.dims, [](const std::size_t& x) { return std::to_string(x); }); }});
  k.push_back({"benchmark", "lambdas",
               [&c](const std::string& s) {
                 std::vector<double> v;
                 for (const auto& item : split_list(s)) {
                   v.push_back(to_double(item));
                   if (!(v.back() >= 0.0 && v.back() <= 1.0)) throw BadValue{"entries must lie in [0, 1]"};
                 }
                 if (v.empty()) throw BadValue{"empty list"};
                 c.benchmark.lambdas = v;
               },
               [&c] { return join<double>(c.benchmark.lambdas, format_double); }});
  count("benchmark", "trials", c.benchmark.trials, 1);

  k.push_back({"gan", "shape",
               [&c](const std::string& s) {
                 try {
                   c.gan_shape = shape_from_string(s);
                 } catch (const Error&) {
                   throw BadValue{"unknown shape"};
                 }
               },
               [&c] { return std::string(to_string(c.gan_shape)); }});
  real("gan", "lambda", c.gan.lambda, 0.0, 1.0);
  count("gan", "disc_steps", c.gan.disc_steps, 1);
  count("gan", "epochs", c.gan.epochs, 0);
  count("gan", "batch_size", c.gan.batch_size, 1);
  count("gan", "noise_dim", c.gan.noise_dim, 1);
  count("gan", "gen_hidden", c.gan.gen_hidden, 1);
  count("gan", "disc_hidden", c.gan.disc_hidden, 1);
  real("gan", "disc_lr", c.gan.disc_lr, 0.0, inf, true);
  real("gan", "gen_lr", c.gan.gen_lr, 0.0, inf, true);
  real("gan", "beta1", c.gan.beta1, 0.0, 1.0);
  real("gan", "beta2", c.gan.beta2, 0.0, 1.0);
  real("gan", "clip_bound", c.gan.clip_bound, 1.0, inf, true);
  count("gan", "n_real", c.gan.n_real, 1);
  count("gan", "n_validation", c.gan.n_validation, 2);
  count("gan", "eval_samples", c.gan.eval_samples, 2);
  count("gan", "eval_every", c.gan.eval_every, 1);

  count("drm", "trials", c.drm_trials, 1);
  return k;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

RunConfig default_config() {
  RunConfig c;
  c.train.eval_every = 10;
  c.baseline.alpha = 0.1;
  return c;
}

RunConfig parse_config(std::istream& is) {
  RunConfig cfg = default_config();
  std::vector<Key> keys = schema(cfg);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (text.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (text.front() == '[') {
      if (text.back() != ']') throw Error(ErrorCode::ParseError, where + "unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      const bool known = std::any_of(keys.begin(), keys.end(), [&](const Key& k) { return k.section == section; });
      if (!known) throw Error(ErrorCode::UnknownKey, where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ParseError, where + "expected key = value");
    if (section.empty()) throw Error(ErrorCode::ParseError, where + "key outside of a section");
    const std::string name = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    auto it = std::find_if(keys.begin(), keys.end(), [&](const Key& k) { return k.section == section && k.name == name; });
    if (it == keys.end()) throw Error(ErrorCode::UnknownKey, where + "unknown key " + section + "." + name);
    try {
      it->set(value);
    } catch (const BadValue& bad) {
      throw Error(ErrorCode::RangeError, where + section + "." + name + " = " + value + ": " + bad.why);
    }
  }
  cfg.train.spec.clip_bound = cfg.model.clip_bound;
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
  return parse_config(in);
}

void print_config(std::ostream& os, const RunConfig& cfg) {
  RunConfig copy = cfg;
  std::string section;
  for (const Key& k : schema(copy)) {
    if (k.section != section) {
      os << (section.empty() ? "" : "\n") << '[' << k.section << "]\n";
      section = k.section;
    }
    os << k.name << " = " << k.get() << '\n';
  }
}

}  // namespace drm::cli
