#include "privae/config.hpp"

#include "privae/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace privae {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw std::invalid_argument("expected a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_unsigned(const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true or false, got '" + v + "'");
}

std::string list_to_string(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += format_double(xs[i]);
  }
  return out;
}

struct Binding {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// The kernel text and its multiple are separate keys; they are combined
// after the whole file is read so key order does not matter.
struct KernelText {
  std::string kernel = "median";
  double multiple = 1.0;
  std::string pri_kernel = "median";
  double pri_multiple = 1.0;
};

const std::vector<std::pair<std::string, Binding>>& bindings() {
  using C = RunConfig;
  using S = const std::string&;
  static const std::vector<std::pair<std::string, Binding>> table = {
      {"loss", {[](C& c, S v) { c.loss.kind = vae::parse_loss_kind(v); },
                [](const C& c) { return std::string(vae::loss_kind_name(c.loss.kind)); }}},
      {"alpha", {[](C& c, S v) { c.loss.alpha = to_double(v); },
                 [](const C& c) { return format_double(c.loss.alpha); }}},
      {"beta", {[](C& c, S v) { c.loss.beta = to_double(v); },
                [](const C& c) { return format_double(c.loss.beta); }}},
      {"gamma", {[](C& c, S v) { c.loss.gamma = to_double(v); },
                 [](const C& c) { return format_double(c.loss.gamma); }}},
      {"lambda", {[](C& c, S v) { c.loss.lambda = to_double(v); },
                  [](const C& c) { return format_double(c.loss.lambda); }}},
      {"c_max", {[](C& c, S v) { c.loss.c_max = to_double(v); },
                 [](const C& c) { return format_double(c.loss.c_max); }}},
      {"c_steps", {[](C& c, S v) { c.loss.c_steps = to_unsigned(v); },
                   [](const C& c) { return std::to_string(c.loss.c_steps); }}},
      {"force", {[](C& c, S v) { c.force = to_bool(v); },
                 [](const C& c) { return std::string(c.force ? "true" : "false"); }}},
      {"seed", {[](C& c, S v) { c.seed = to_unsigned(v); },
                [](const C& c) { return std::to_string(c.seed); }}},
      {"steps", {[](C& c, S v) { c.steps = to_unsigned(v); },
                 [](const C& c) { return std::to_string(c.steps); }}},
      {"batch_size", {[](C& c, S v) { c.batch_size = to_unsigned(v); },
                      [](const C& c) { return std::to_string(c.batch_size); }}},
      {"log_every", {[](C& c, S v) { c.log_every = to_unsigned(v); },
                     [](const C& c) { return std::to_string(c.log_every); }}},
      {"lr", {[](C& c, S v) { c.lr = to_double(v); },
              [](const C& c) { return format_double(c.lr); }}},
      {"latent_dim", {[](C& c, S v) { c.latent_dim = to_unsigned(v); },
                      [](const C& c) { return std::to_string(c.latent_dim); }}},
      {"dataset_size", {[](C& c, S v) { c.dataset_size = to_unsigned(v); },
                        [](const C& c) { return std::to_string(c.dataset_size); }}},
      {"info_samples", {[](C& c, S v) { c.info_samples = to_unsigned(v); },
                        [](const C& c) { return std::to_string(c.info_samples); }}},
      {"info_batch", {[](C& c, S v) { c.info_batch = to_unsigned(v); },
                      [](const C& c) { return std::to_string(c.info_batch); }}},
      {"alphas", {[](C& c, S v) { c.alphas = parse_double_list(v); },
                  [](const C& c) { return list_to_string(c.alphas); }}},
      {"mig_bins", {[](C& c, S v) { c.mig_bins = to_unsigned(v); },
                    [](const C& c) { return std::to_string(c.mig_bins); }}},
      {"smooth_window", {[](C& c, S v) { c.smooth_window = to_unsigned(v); },
                         [](const C& c) { return std::to_string(c.smooth_window); }}},
      {"keep_latents", {[](C& c, S v) { c.keep_latents = to_unsigned(v); },
                        [](const C& c) { return std::to_string(c.keep_latents); }}},
      {"pri_data", {[](C& c, S v) { c.pri_data = v; }, [](const C& c) { return c.pri_data; }}},
      {"pri_samples", {[](C& c, S v) { c.pri_samples = to_unsigned(v); },
                       [](const C& c) { return std::to_string(c.pri_samples); }}},
      {"gammas", {[](C& c, S v) { c.gammas = parse_double_list(v); },
                  [](const C& c) { return list_to_string(c.gammas); }}},
      {"pri_max_iters", {[](C& c, S v) { c.pri_max_iters = to_unsigned(v); },
                         [](const C& c) { return std::to_string(c.pri_max_iters); }}},
      {"pri_tol", {[](C& c, S v) { c.pri_tol = to_double(v); },
                   [](const C& c) { return format_double(c.pri_tol); }}},
      {"pri_record_every", {[](C& c, S v) { c.pri_record_every = to_unsigned(v); },
                            [](const C& c) { return std::to_string(c.pri_record_every); }}},
      {"out", {[](C& c, S v) { c.out = v; }, [](const C& c) { return c.out.string(); }}},
  };
  return table;
}

}  // namespace

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) throw std::invalid_argument("empty entry in list '" + text + "'");
    out.push_back(to_double(t));
  }
  return out;
}

KernelSpec parse_kernel(const std::string& text, double multiple) {
  if (text == "median") return KernelSpec::median(multiple);
  if (text == "silverman") return KernelSpec::silverman();
  const double sigma = to_double(text);
  if (!(sigma > 0.0)) throw std::invalid_argument("kernel width must be > 0");
  return KernelSpec::fixed(sigma);
}

std::string format_kernel(const KernelSpec& k) {
  if (k.sigma) return format_double(*k.sigma);
  return k.rule.kind == WidthRule::Kind::silverman ? "silverman" : "median";
}

RunConfig RunConfig::parse(std::istream& in, const std::string& source) {
  RunConfig cfg;
  KernelText kt;
  std::map<std::string, std::size_t> seen;
  std::string raw;
  std::size_t line_no = 0;

  auto fail = [&](const std::string& msg) -> ConfigError {
    return ConfigError(source + ":" + std::to_string(line_no) + ": " + msg);
  };

  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw fail("expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw fail("missing key before '='");
    if (auto it = seen.find(key); it != seen.end()) {
      throw fail("duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")");
    }
    seen[key] = line_no;

    try {
      if (key == "kernel") {
        kt.kernel = value;
        parse_kernel(value, 1.0);
      } else if (key == "kernel_multiple") {
        kt.multiple = to_double(value);
      } else if (key == "pri_kernel") {
        kt.pri_kernel = value;
        parse_kernel(value, 1.0);
      } else if (key == "pri_kernel_multiple") {
        kt.pri_multiple = to_double(value);
      } else {
        const auto& table = bindings();
        auto it = std::find_if(table.begin(), table.end(),
                               [&](const auto& b) { return b.first == key; });
        if (it == table.end()) throw std::invalid_argument("unknown key '" + key + "'");
        it->second.set(cfg, value);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw fail(std::string("'") + key + "': " + e.what());
    }
  }

  try {
    cfg.kernel = parse_kernel(kt.kernel, kt.multiple);
    cfg.pri_kernel = parse_kernel(kt.pri_kernel, kt.pri_multiple);
    if (!(kt.multiple > 0.0) || !(kt.pri_multiple > 0.0)) {
      throw std::invalid_argument("kernel multiples must be > 0");
    }
  } catch (const std::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse(in, path.string());
}

void RunConfig::write(std::ostream& os) const {
  for (const auto& [key, b] : bindings()) {
    os << key << " = " << b.get(*this) << "\n";
    if (key == "alphas") {
      os << "kernel = " << format_kernel(kernel) << "\n";
      os << "kernel_multiple = " << format_double(kernel.rule.multiple) << "\n";
    } else if (key == "gammas") {
      os << "pri_kernel = " << format_kernel(pri_kernel) << "\n";
      os << "pri_kernel_multiple = " << format_double(pri_kernel.rule.multiple) << "\n";
    }
  }
}

}  // namespace privae
