#include "loqi/model/extractor.hpp"

#include <algorithm>

#include "loqi/core/binary.hpp"
#include "loqi/core/errors.hpp"

namespace loqi {

LatentCode Extractor::soft_assignment(const LatentCode& latent) const {
  latent.validate();
  LatentCode w(latent.channels(), latent.height(), latent.width());
  const double u = 1.0 / latent.channels();
  for (double& v : w.data()) v = u;
  return w;
}

std::uint64_t parameter_hash(const Extractor& extractor) { return fnv1a64_of(extractor.parameters()); }

ExtractorHandle::ExtractorHandle(std::shared_ptr<Extractor> extractor, bool encoder_trainable,
                                 bool aggregator_trainable)
    : extractor_(std::move(extractor)),
      encoder_trainable_(encoder_trainable),
      aggregator_trainable_(aggregator_trainable) {
  if (!extractor_) throw ValidationError("extractor handle needs a model");
}

Extractor& ExtractorHandle::model() {
  if (!extractor_) throw ValidationError("empty extractor handle");
  return *extractor_;
}

const Extractor& ExtractorHandle::model() const {
  if (!extractor_) throw ValidationError("empty extractor handle");
  return *extractor_;
}

std::vector<std::uint8_t> ExtractorHandle::trainable_mask() const {
  std::vector<std::uint8_t> mask(model().parameters().size(), 0);
  for (const ParamGroup& g : model().groups()) {
    if (!trainable(g.part)) continue;
    std::fill(mask.begin() + static_cast<std::ptrdiff_t>(g.offset),
              mask.begin() + static_cast<std::ptrdiff_t>(g.offset + g.size), 1);
  }
  return mask;
}

BranchPair clone_as_branch_pair(const ExtractorHandle& handle) {
  BranchPair pair;
  pair.teacher = ExtractorHandle(std::shared_ptr<Extractor>(handle.model().clone()), false, false);
  pair.student = ExtractorHandle(std::shared_ptr<Extractor>(handle.model().clone()), handle.trainable(Part::encoder),
                                 handle.trainable(Part::aggregator));
  return pair;
}

}  // namespace loqi
