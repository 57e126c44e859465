#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "loqi/model/extractor.hpp"

namespace loqi {

/// "name[/version] key=value ...", the same shape as Extractor::identity().
struct ExtractorSpec {
  std::string name;
  int version = 0;  // 0: any
  std::map<std::string, std::string> options;

  static ExtractorSpec parse(const std::string& text);
  std::string to_string() const;

  std::string get(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
};

using ExtractorFactory = std::function<std::shared_ptr<Extractor>(const ExtractorSpec&)>;

/// Name -> factory map. The process-wide instance knows "toy" and
/// "external"; the published VPR methods resolve to "external" when
/// LOQI_ENCODER_<NAME> points at a feature-extraction executable.
class ExtractorRegistry {
 public:
  static ExtractorRegistry& global();

  void add(const std::string& name, ExtractorFactory factory);
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

  /// Throws ValidationError for an unknown name and EnvironmentError for a
  /// known method whose executable is not configured.
  ExtractorHandle create(const ExtractorSpec& spec) const;
  ExtractorHandle create(const std::string& spec) const { return create(ExtractorSpec::parse(spec)); }

 private:
  mutable std::mutex mu_;
  std::map<std::string, ExtractorFactory> factories_;
};

/// Names of third-party methods that can be bound through the environment.
const std::vector<std::string>& known_external_methods();

}  // namespace loqi
