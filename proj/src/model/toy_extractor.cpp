#include "loqi/model/toy_extractor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "loqi/core/errors.hpp"
#include "loqi/simd/kernels.hpp"

namespace loqi {
namespace {

struct Tensor3 {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor3() = default;
  Tensor3(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, 0.0) {}
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
};

int conv_out(int n, int stride) { return (n - 1) / stride + 1; }

// cols[(ci * 9 + ky * 3 + kx) * P + oy * Wo + ox], zero padding of 1.
std::vector<double> im2col(const Tensor3& x, int stride, int ho, int wo) {
  const std::size_t P = static_cast<std::size_t>(ho) * wo;
  std::vector<double> cols(static_cast<std::size_t>(x.c) * 9 * P, 0.0);
  for (int ci = 0; ci < x.c; ++ci) {
    const double* src = x.v.data() + ci * x.plane();
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        double* row = cols.data() + (static_cast<std::size_t>(ci) * 9 + ky * 3 + kx) * P;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride + ky - 1;
          if (iy < 0 || iy >= x.h) continue;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride + kx - 1;
            if (ix >= 0 && ix < x.w) row[oy * wo + ox] = src[iy * x.w + ix];
          }
        }
      }
    }
  }
  return cols;
}

void col2im_add(const std::vector<double>& dcols, int stride, int ho, int wo, Tensor3& dx) {
  const std::size_t P = static_cast<std::size_t>(ho) * wo;
  for (int ci = 0; ci < dx.c; ++ci) {
    double* dst = dx.v.data() + ci * dx.plane();
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const double* row = dcols.data() + (static_cast<std::size_t>(ci) * 9 + ky * 3 + kx) * P;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride + ky - 1;
          if (iy < 0 || iy >= dx.h) continue;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride + kx - 1;
            if (ix >= 0 && ix < dx.w) dst[iy * dx.w + ix] += row[oy * wo + ox];
          }
        }
      }
    }
  }
}

struct LayerTrace {
  int in_h = 0, in_w = 0;
  int out_h = 0, out_w = 0;
  std::vector<double> cols;
  Tensor3 out;  // post-ReLU
};

struct ToyTrace final : ForwardTrace {
  LayerTrace layers[3];
  std::vector<double> pooled;
  std::vector<double> projected;
  double proj_norm = 0.0;
};

Tensor3 image_tensor(const Image& image) {
  if (image.width() < ToyExtractor::kMinInputSize || image.height() < ToyExtractor::kMinInputSize) {
    throw ValidationError("toy extractor needs inputs of at least " + std::to_string(ToyExtractor::kMinInputSize) +
                          "x" + std::to_string(ToyExtractor::kMinInputSize) + " pixels, got " +
                          std::to_string(image.width()) + "x" + std::to_string(image.height()));
  }
  Tensor3 t(3, image.height(), image.width());
  const auto px = image.data();
  const std::size_t n = t.plane();
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) t.v[c * n + i] = px[i * 3 + c] / 255.0 - 0.5;
  }
  return t;
}

}  // namespace

void ToyOptions::validate() const {
  if (channels < 2) throw ValidationError("toy extractor needs channels >= 2");
  if (descriptor_dim < 4) throw ValidationError("toy extractor needs descriptor_dim >= 4");
  if (channels > 4096 || descriptor_dim > 65536) throw ValidationError("toy extractor dimensions are unreasonably large");
}

ToyExtractor::ToyExtractor(const ToyOptions& options) : options_(options) {
  options_.validate();
  const int c = options_.channels;
  const int d = options_.descriptor_dim;
  std::size_t offset = 0;
  const int ins[3] = {3, c, c};
  const int strides[3] = {2, 2, 1};
  for (int l = 0; l < 3; ++l) {
    Conv& cv = convs_[l];
    cv.in = ins[l];
    cv.out = c;
    cv.stride = strides[l];
    cv.weight_offset = offset;
    offset += static_cast<std::size_t>(cv.out) * cv.in * 9;
    cv.bias_offset = offset;
    offset += static_cast<std::size_t>(cv.out);
  }
  encoder_size_ = offset;
  proj_offset_ = offset;
  offset += static_cast<std::size_t>(d) * c;
  proj_bias_offset_ = offset;
  offset += static_cast<std::size_t>(d);
  params_.assign(offset, 0.0);

  std::mt19937_64 rng(options_.seed);
  for (const Conv& cv : convs_) {
    std::normal_distribution<double> he(0.0, std::sqrt(2.0 / (cv.in * 9)));
    const std::size_t n = static_cast<std::size_t>(cv.out) * cv.in * 9;
    for (std::size_t i = 0; i < n; ++i) params_[cv.weight_offset + i] = he(rng);
    // small positive bias keeps ReLU units alive on flat image regions
    for (int o = 0; o < cv.out; ++o) params_[cv.bias_offset + o] = 0.01;
  }
  std::normal_distribution<double> proj(0.0, std::sqrt(1.0 / c));
  for (std::size_t i = 0; i < static_cast<std::size_t>(d) * c; ++i) params_[proj_offset_ + i] = proj(rng);
}

std::string ToyExtractor::identity() const {
  return std::string(kName) + "/" + std::to_string(kVersion) + " channels=" + std::to_string(options_.channels) +
         " dim=" + std::to_string(options_.descriptor_dim) + " seed=" + std::to_string(options_.seed);
}

std::unique_ptr<Extractor> ToyExtractor::clone() const { return std::make_unique<ToyExtractor>(*this); }

std::vector<ParamGroup> ToyExtractor::groups() const {
  return {{Part::encoder, 0, encoder_size_}, {Part::aggregator, encoder_size_, params_.size() - encoder_size_}};
}

std::unique_ptr<ForwardTrace> ToyExtractor::forward(const Image& image) const {
  auto trace = std::make_unique<ToyTrace>();
  Tensor3 x = image_tensor(image);
  for (int l = 0; l < 3; ++l) {
    const Conv& cv = convs_[l];
    LayerTrace& lt = trace->layers[l];
    lt.in_h = x.h;
    lt.in_w = x.w;
    lt.out_h = conv_out(x.h, cv.stride);
    lt.out_w = conv_out(x.w, cv.stride);
    lt.cols = im2col(x, cv.stride, lt.out_h, lt.out_w);
    const std::size_t P = static_cast<std::size_t>(lt.out_h) * lt.out_w;
    const std::size_t K = static_cast<std::size_t>(cv.in) * 9;
    lt.out = Tensor3(cv.out, lt.out_h, lt.out_w);
    for (int o = 0; o < cv.out; ++o) {
      std::span<double> dst(lt.out.v.data() + o * P, P);
      std::fill(dst.begin(), dst.end(), params_[cv.bias_offset + o]);
      const double* w = params_.data() + cv.weight_offset + o * K;
      for (std::size_t k = 0; k < K; ++k) {
        if (w[k] != 0.0) simd::axpy(w[k], std::span<const double>(lt.cols.data() + k * P, P), dst);
      }
      for (double& v : dst) v = std::max(v, 0.0);
    }
    x = lt.out;
  }
  trace->latent = LatentCode(x.c, x.h, x.w, x.v);

  const int c = options_.channels;
  const int d = options_.descriptor_dim;
  const std::size_t P = trace->latent.spatial();
  trace->pooled.resize(static_cast<std::size_t>(c));
  for (int k = 0; k < c; ++k) {
    double s = 0.0;
    for (double v : trace->latent.channel(k)) s += v;
    trace->pooled[static_cast<std::size_t>(k)] = s / static_cast<double>(P);
  }
  trace->projected.resize(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    trace->projected[static_cast<std::size_t>(i)] =
        params_[proj_bias_offset_ + i] +
        simd::dot(std::span<const double>(params_.data() + proj_offset_ + static_cast<std::size_t>(i) * c, c),
                  std::span<const double>(trace->pooled));
  }
  trace->proj_norm = std::sqrt(simd::dot(std::span<const double>(trace->projected), trace->projected));
  trace->descriptor = Descriptor(trace->projected).normalized();
  return trace;
}

LatentCode ToyExtractor::encode(const Image& image) const { return forward(image)->latent; }

Descriptor ToyExtractor::aggregate(const LatentCode& latent) const {
  latent.validate();
  const int c = options_.channels;
  if (latent.channels() != c) {
    throw ValidationError("aggregator expects " + std::to_string(c) + " channels, got " +
                          std::to_string(latent.channels()));
  }
  std::vector<double> pooled(static_cast<std::size_t>(c));
  for (int k = 0; k < c; ++k) {
    double s = 0.0;
    for (double v : latent.channel(k)) s += v;
    pooled[static_cast<std::size_t>(k)] = s / static_cast<double>(latent.spatial());
  }
  std::vector<double> u(static_cast<std::size_t>(options_.descriptor_dim));
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = params_[proj_bias_offset_ + i] +
           simd::dot(std::span<const double>(params_.data() + proj_offset_ + i * c, c), std::span<const double>(pooled));
  }
  return Descriptor(std::move(u)).normalized();
}

void ToyExtractor::backward(const ForwardTrace& base, const LatentCode* d_latent, const Descriptor* d_descriptor,
                            std::span<double> grad) const {
  const auto* trace = dynamic_cast<const ToyTrace*>(&base);
  if (trace == nullptr) throw ValidationError("trace was not produced by a toy extractor");
  if (grad.size() != params_.size()) throw ValidationError("gradient buffer does not match the parameter count");
  const int c = options_.channels;
  const int d = options_.descriptor_dim;
  const LatentCode& z = trace->latent;
  const std::size_t P = z.spatial();
  if (d_latent != nullptr && (d_latent->channels() != c || d_latent->spatial() != P)) {
    throw ValidationError("latent gradient shape does not match the forward pass");
  }
  if (d_descriptor != nullptr && d_descriptor->size() != static_cast<std::size_t>(d)) {
    throw ValidationError("descriptor gradient length does not match the forward pass");
  }

  Tensor3 g(c, z.height(), z.width());
  if (d_latent != nullptr) std::copy(d_latent->data().begin(), d_latent->data().end(), g.v.begin());

  if (d_descriptor != nullptr && trace->proj_norm > 0.0) {
    // v = u / |u|
    const Descriptor& v = trace->descriptor;
    const double vg = simd::dot(v.data(), d_descriptor->data());
    std::vector<double> du(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) du[i] = ((*d_descriptor)[i] - vg * v[i]) / trace->proj_norm;
    std::vector<double> dm(static_cast<std::size_t>(c), 0.0);
    for (int i = 0; i < d; ++i) {
      grad[proj_bias_offset_ + i] += du[i];
      simd::axpy(du[i], std::span<const double>(trace->pooled), grad.subspan(proj_offset_ + static_cast<std::size_t>(i) * c, c));
      simd::axpy(du[i], std::span<const double>(params_.data() + proj_offset_ + static_cast<std::size_t>(i) * c, c), dm);
    }
    for (int k = 0; k < c; ++k) {
      const double share = dm[k] / static_cast<double>(P);
      double* row = g.v.data() + k * P;
      for (std::size_t p = 0; p < P; ++p) row[p] += share;
    }
  }

  for (int l = 2; l >= 0; --l) {
    const Conv& cv = convs_[l];
    const LayerTrace& lt = trace->layers[l];
    const std::size_t Pl = static_cast<std::size_t>(lt.out_h) * lt.out_w;
    const std::size_t K = static_cast<std::size_t>(cv.in) * 9;
    for (std::size_t i = 0; i < g.v.size(); ++i) {
      if (lt.out.v[i] <= 0.0) g.v[i] = 0.0;
    }
    std::vector<double> dcols;
    if (l > 0) dcols.assign(K * Pl, 0.0);
    for (int o = 0; o < cv.out; ++o) {
      const std::span<const double> go(g.v.data() + o * Pl, Pl);
      double gb = 0.0;
      for (double v : go) gb += v;
      grad[cv.bias_offset + o] += gb;
      if (gb == 0.0 && std::all_of(go.begin(), go.end(), [](double v) { return v == 0.0; })) continue;
      const double* w = params_.data() + cv.weight_offset + o * K;
      for (std::size_t k = 0; k < K; ++k) {
        grad[cv.weight_offset + o * K + k] += simd::dot(go, std::span<const double>(lt.cols.data() + k * Pl, Pl));
        if (l > 0 && w[k] != 0.0) simd::axpy(w[k], go, std::span<double>(dcols.data() + k * Pl, Pl));
      }
    }
    if (l == 0) break;
    Tensor3 dx(cv.in, lt.in_h, lt.in_w);
    col2im_add(dcols, cv.stride, lt.out_h, lt.out_w, dx);
    g = std::move(dx);
  }
}

LatentCode ToyExtractor::soft_assignment(const LatentCode& latent) const {
  latent.validate();
  const int c = latent.channels();
  const std::size_t P = latent.spatial();
  LatentCode w(c, latent.height(), latent.width());
  for (std::size_t p = 0; p < P; ++p) {
    double mx = latent.data()[p];
    for (int k = 1; k < c; ++k) mx = std::max(mx, latent.data()[k * P + p]);
    double s = 0.0;
    for (int k = 0; k < c; ++k) {
      const double e = std::exp(latent.data()[k * P + p] - mx);
      w.data()[k * P + p] = e;
      s += e;
    }
    for (int k = 0; k < c; ++k) w.data()[k * P + p] /= s;
  }
  return w;
}

ExtractorHandle make_toy_extractor(std::uint64_t seed, int channels, int descriptor_dim) {
  ToyOptions opt;
  opt.seed = seed;
  opt.channels = channels;
  opt.descriptor_dim = descriptor_dim;
  return ExtractorHandle(std::make_shared<ToyExtractor>(opt));
}

}  // namespace loqi
