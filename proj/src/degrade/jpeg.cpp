#include "loqi/core/errors.hpp"
#include "loqi/core/image_io.hpp"
#include "loqi/degrade/degrade.hpp"

namespace loqi {

JpegDegradeResult jpeg_degrade(const Image& image, int quality) {
  if (quality < 1 || quality > 100) throw ValidationError("JPEG quality must be in [1, 100]");
  if (image.width() < 8 || image.height() < 8) throw ValidationError("jpeg_degrade needs at least 8x8 pixels");
  JpegDegradeResult result;
  result.encoded = encode_jpeg(image, quality);
  result.image = decode_jpeg(result.encoded);
  result.encoder = jpeg_encoder_identity() + " quality=" + std::to_string(quality);
  return result;
}

}  // namespace loqi
