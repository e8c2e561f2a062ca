#include "aliasfree/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "aliasfree/errors.hpp"

namespace aliasfree {
namespace {

using Block = std::map<std::string, std::string, std::less<>>;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class BlockReader {
 public:
  BlockReader(Block b, int line) : block_(std::move(b)), line_(line) {}

  std::string where() const {
    auto it = block_.find("name");
    return "config block at line " + std::to_string(line_) +
           (it != block_.end() ? " ('" + it->second + "')" : std::string());
  }

  const std::string* raw(std::string_view key) {
    used_.insert(std::string(key));
    auto it = block_.find(key);
    return it == block_.end() ? nullptr : &it->second;
  }

  std::string required(std::string_view key) {
    const auto* v = raw(key);
    if (!v || v->empty()) throw ConfigError(where() + ": missing '" + std::string(key) + "'");
    return *v;
  }

  void number(std::string_view key, double& out) {
    if (const auto* v = raw(key)) {
      double d{};
      auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), d);
      if (ec != std::errc{} || p != v->data() + v->size()) bad(key, *v);
      out = d;
    }
  }

  template <class Int>
  void integer(std::string_view key, Int& out) {
    if (const auto* v = raw(key)) {
      Int d{};
      auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), d);
      if (ec != std::errc{} || p != v->data() + v->size()) bad(key, *v);
      out = d;
    }
  }

  void boolean(std::string_view key, bool& out) {
    if (const auto* v = raw(key)) {
      if (*v == "true" || *v == "1" || *v == "on") out = true;
      else if (*v == "false" || *v == "0" || *v == "off") out = false;
      else bad(key, *v);
    }
  }

  void filter(FilterDesignSpec& f) {
    number("stopband_db", f.stopband_atten_db);
    number("transition", f.transition_width);
  }

  void finish() const {
    for (const auto& [k, v] : block_) {
      if (!used_.count(k)) throw ConfigError(where() + ": unknown key '" + k + "'");
    }
  }

  [[noreturn]] void bad(std::string_view key, const std::string& v) const {
    throw ConfigError(where() + ": invalid value '" + v + "' for '" + std::string(key) + "'");
  }

 private:
  Block block_;
  int line_;
  std::set<std::string> used_;
};

bool is_activation_kind(std::string_view k) {
  try {
    parse_activation_kind(k);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

NamedActivation read_activation(BlockReader& r, const std::string& kind) {
  NamedActivation a;
  a.name = r.required("name");
  a.spec.kind = parse_activation_kind(kind);
  if (const auto* b = r.raw("base")) {
    try {
      a.spec.base = parse_activation_kind(*b);
    } catch (const std::invalid_argument&) {
      r.bad("base", *b);
    }
  }
  r.number("slope", a.spec.slope);
  r.number("elu_a", a.spec.elu_a);
  r.number("alpha", a.spec.alpha);
  r.number("beta", a.spec.beta);
  r.integer("oversample", a.spec.oversample);
  r.number("adaa_tol", a.spec.adaa_tol);
  r.filter(a.spec.filter);
  if (const auto* g = r.raw("group")) {
    if (*g == "main") a.group = ReportGroup::Main;
    else if (*g == "oversampling") a.group = ReportGroup::Oversampling;
    else r.bad("group", *g);
  }
  r.finish();
  try {
    a.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.where() + ": " + e.what());
  }
  return a;
}

NamedUpsampler read_upsampler(BlockReader& r, const std::string& kind) {
  NamedUpsampler u;
  u.name = r.required("name");
  u.spec.kind = parse_upsampler_kind(kind);
  r.integer("factor", u.spec.factor);
  r.integer("kernel_size", u.spec.kernel_size);
  r.integer("seed", u.spec.seed);
  r.boolean("noise_prior", u.spec.noise_prior);
  r.integer("prior_kernel_size", u.spec.prior_kernel_size);
  r.filter(u.spec.filter);
  r.finish();
  try {
    u.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(r.where() + ": " + e.what());
  }
  return u;
}

}  // namespace

ConfigSet parse_config(std::string_view text) {
  ConfigSet out;
  std::set<std::string, std::less<>> names;
  Block block;
  int block_line = 0;
  int line_no = 0;

  const auto flush = [&] {
    if (block.empty()) return;
    BlockReader r(std::move(block), block_line);
    block.clear();
    const std::string kind = r.required("kind");
    std::string name;
    if (is_activation_kind(kind)) {
      out.activations.push_back(read_activation(r, kind));
      name = out.activations.back().name;
    } else {
      try {
        parse_upsampler_kind(kind);
      } catch (const std::invalid_argument&) {
        throw ConfigError(r.where() + ": unknown kind '" + kind + "'");
      }
      out.upsamplers.push_back(read_upsampler(r, kind));
      name = out.upsamplers.back().name;
    }
    if (!names.insert(name).second) throw ConfigError("duplicate config name '" + name + "'");
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    const bool blank = trim(line).empty();
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      // comment-only lines do not end a block
      if (blank) flush();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (block.empty()) block_line = line_no;
    if (!block.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  flush();
  if (out.empty()) throw ConfigError("configuration contains no blocks");
  return out;
}

ConfigSet load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize(const NamedActivation& a) {
  const auto& s = a.spec;
  std::ostringstream o;
  o << "name=" << a.name << '\n'
    << "kind=" << to_string(s.kind) << '\n';
  if (s.kind == ActivationKind::AdaaGeneric) o << "base=" << to_string(s.base) << '\n';
  o << "slope=" << fmt(s.slope) << '\n'
    << "elu_a=" << fmt(s.elu_a) << '\n'
    << "alpha=" << fmt(s.alpha) << '\n'
    << "beta=" << fmt(s.beta) << '\n'
    << "oversample=" << s.oversample << '\n'
    << "adaa_tol=" << fmt(s.adaa_tol) << '\n'
    << "stopband_db=" << fmt(s.filter.stopband_atten_db) << '\n'
    << "transition=" << fmt(s.filter.transition_width) << '\n'
    << "group=" << (a.group == ReportGroup::Main ? "main" : "oversampling") << '\n';
  return o.str();
}

std::string serialize(const NamedUpsampler& u) {
  const auto& s = u.spec;
  std::ostringstream o;
  o << "name=" << u.name << '\n'
    << "kind=" << to_string(s.kind) << '\n'
    << "factor=" << s.factor << '\n'
    << "kernel_size=" << s.kernel_size << '\n'
    << "seed=" << s.seed << '\n'
    << "noise_prior=" << (s.noise_prior ? "true" : "false") << '\n'
    << "prior_kernel_size=" << s.prior_kernel_size << '\n'
    << "stopband_db=" << fmt(s.filter.stopband_atten_db) << '\n'
    << "transition=" << fmt(s.filter.transition_width) << '\n';
  return o.str();
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {
std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}
}  // namespace

std::string config_hash(const NamedActivation& a) { return hex16(fnv1a64(serialize(a))); }
std::string config_hash(const NamedUpsampler& u) { return hex16(fnv1a64(serialize(u))); }

std::vector<NamedActivation> default_activation_configs() {
  const auto make = [](std::string name, ActivationKind k, int c, ReportGroup g) {
    NamedActivation a;
    a.name = std::move(name);
    a.spec.kind = k;
    a.spec.oversample = c;
    a.group = g;
    return a;
  };
  auto lrelu = make("LeakyReLU", ActivationKind::LeakyReLU, 1, ReportGroup::Main);
  lrelu.spec.slope = 0.1;
  auto elu = make("ELU", ActivationKind::ELU, 1, ReportGroup::Main);
  elu.spec.elu_a = 1.0;
  return {
      lrelu,
      elu,
      make("SnakeBeta", ActivationKind::SnakeBeta, 1, ReportGroup::Main),
      make("AdaaSnakeBeta_c2", ActivationKind::AdaaSnakeBeta, 2, ReportGroup::Main),
      make("SnakeBeta_c2", ActivationKind::SnakeBeta, 2, ReportGroup::Oversampling),
      make("SnakeBeta_c4", ActivationKind::SnakeBeta, 4, ReportGroup::Oversampling),
      make("AdaaSnakeBeta_c1", ActivationKind::AdaaSnakeBeta, 1, ReportGroup::Oversampling),
  };
}

std::vector<NamedUpsampler> default_upsampler_configs(std::size_t factor, std::uint64_t seed) {
  std::vector<NamedUpsampler> out;
  const auto add = [&](std::string name, UpsamplerKind k) {
    NamedUpsampler u;
    u.name = std::move(name);
    u.spec.kind = k;
    u.spec.factor = factor;
    u.spec.kernel_size = 2 * factor;
    u.spec.seed = seed;
    out.push_back(u);
  };
  add("ConvTranspose", UpsamplerKind::ConvTranspose);
  add("LinearInterp", UpsamplerKind::LinearInterp);
  add("NearestInterp", UpsamplerKind::NearestInterp);
  add("AntiAliasedResample", UpsamplerKind::AntiAliasedResample);
  return out;
}

}  // namespace aliasfree
