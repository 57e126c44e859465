#include "loqi/model/registry.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <sstream>

#include "loqi/core/errors.hpp"
#include "loqi/core/process.hpp"
#include "loqi/model/external_extractor.hpp"
#include "loqi/model/toy_extractor.hpp"

namespace loqi {
namespace {

std::string env_name_for(const std::string& method) {
  std::string s = "LOQI_ENCODER_";
  for (char ch : method) s += static_cast<char>(std::isalnum(static_cast<unsigned char>(ch)) ? std::toupper(ch) : '_');
  return s;
}

std::shared_ptr<Extractor> make_external(const std::string& method, const ExtractorSpec& spec) {
  std::string command = spec.get("command", "");
  if (command.empty()) {
    const std::string var = method == "external" ? "LOQI_EXTERNAL_ENCODER" : env_name_for(method);
    const char* env = std::getenv(var.c_str());
    if (env == nullptr || *env == '\0') {
      throw EnvironmentError("encoder '" + method + "' is not installed: set " + var +
                             " to a feature-extraction executable");
    }
    command = env;
  }
  const auto exe = find_executable(command);
  if (!exe) throw EnvironmentError("encoder '" + method + "': executable not found: " + command);
  return std::make_shared<ExternalExtractor>(method, *exe);
}

void register_builtins(std::map<std::string, ExtractorFactory>& f) {
  f["toy"] = [](const ExtractorSpec& spec) -> std::shared_ptr<Extractor> {
    if (spec.version != 0 && spec.version != ToyExtractor::kVersion) {
      throw ValidationError("toy extractor version " + std::to_string(spec.version) + " is not supported");
    }
    for (const auto& [k, v] : spec.options) {
      if (k != "channels" && k != "dim" && k != "seed") throw ValidationError("toy extractor has no option '" + k + "'");
    }
    ToyOptions opt;
    opt.seed = static_cast<std::uint64_t>(spec.get_int("seed", 0));
    opt.channels = static_cast<int>(spec.get_int("channels", opt.channels));
    opt.descriptor_dim = static_cast<int>(spec.get_int("dim", opt.descriptor_dim));
    return std::make_shared<ToyExtractor>(opt);
  };
  f["external"] = [](const ExtractorSpec& spec) { return make_external(spec.get("method", "external"), spec); };
  for (const std::string& m : known_external_methods()) {
    f[m] = [m](const ExtractorSpec& spec) { return make_external(m, spec); };
  }
}

}  // namespace

const std::vector<std::string>& known_external_methods() {
  static const std::vector<std::string> names = {"netvlad", "mixvpr", "cricavpr", "salad", "anyloc"};
  return names;
}

ExtractorSpec ExtractorSpec::parse(const std::string& text) {
  std::istringstream in(text);
  std::string head;
  if (!(in >> head)) throw ValidationError("empty extractor spec");
  ExtractorSpec spec;
  const auto slash = head.find('/');
  spec.name = head.substr(0, slash);
  if (slash != std::string::npos) {
    const std::string v = head.substr(slash + 1);
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), spec.version);
    if (ec != std::errc() || p != v.data() + v.size() || spec.version < 1) {
      throw ValidationError("bad extractor version in '" + text + "'");
    }
  }
  if (spec.name.empty()) throw ValidationError("extractor spec has no name: '" + text + "'");
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("extractor option must be key=value: '" + tok + "'");
    spec.options[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return spec;
}

std::string ExtractorSpec::to_string() const {
  std::string s = name;
  if (version != 0) s += "/" + std::to_string(version);
  for (const auto& [k, v] : options) s += " " + k + "=" + v;
  return s;
}

std::string ExtractorSpec::get(const std::string& key, const std::string& fallback) const {
  const auto it = options.find(key);
  return it == options.end() ? fallback : it->second;
}

long long ExtractorSpec::get_int(const std::string& key, long long fallback) const {
  const auto it = options.find(key);
  if (it == options.end()) return fallback;
  long long v = 0;
  const auto& s = it->second;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ValidationError("extractor option " + key + " must be an integer, got '" + s + "'");
  }
  return v;
}

ExtractorRegistry& ExtractorRegistry::global() {
  static ExtractorRegistry* reg = [] {
    auto* r = new ExtractorRegistry;
    register_builtins(r->factories_);
    return r;
  }();
  return *reg;
}

void ExtractorRegistry::add(const std::string& name, ExtractorFactory factory) {
  if (name.empty() || !factory) throw ValidationError("extractor plugins need a name and a factory");
  std::lock_guard lock(mu_);
  factories_[name] = std::move(factory);
}

bool ExtractorRegistry::contains(const std::string& name) const {
  std::lock_guard lock(mu_);
  return factories_.count(name) != 0;
}

std::vector<std::string> ExtractorRegistry::names() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [k, v] : factories_) out.push_back(k);
  return out;
}

ExtractorHandle ExtractorRegistry::create(const ExtractorSpec& spec) const {
  ExtractorFactory f;
  {
    std::lock_guard lock(mu_);
    const auto it = factories_.find(spec.name);
    if (it == factories_.end()) {
      std::string known;
      for (const auto& [k, v] : factories_) known += (known.empty() ? "" : ", ") + k;
      throw ValidationError("unknown extractor '" + spec.name + "' (available: " + known + ")");
    }
    f = it->second;
  }
  return ExtractorHandle(f(spec));
}

}  // namespace loqi
