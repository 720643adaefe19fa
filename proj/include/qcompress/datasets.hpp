#pragma once

// Binary pixel-image datasets and their signed equal-superposition encoding.
//
// Pixel (row r, column c) of a W x H image lives at row-major index r*W + c,
// and that index is also its basis-state label. With qubit 0 as the least
// significant bit this puts the column bits on the low qubits and the row
// bits above them: for 4x4 images the ket |c1 c2 r1 r2> has c1 on qubit 0,
// and the column label "c1c2" in {00,10,01,11} runs left to right
// (c = c1 + 2*c2); rows run top to bottom the same way.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcompress/core.hpp"
#include "qcompress/random.hpp"

namespace qcompress {

struct PixelImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major; 0 = black, 1 = white

  std::uint8_t at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row * width + col)];
  }

  void validate() const {
    if (width < 1 || height < 1 || !std::has_single_bit(static_cast<unsigned>(width)) ||
        !std::has_single_bit(static_cast<unsigned>(height)) || width * height < 2) {
      throw std::domain_error("image sides must be powers of two with at least two pixels, got " +
                              std::to_string(width) + "x" + std::to_string(height));
    }
    if (pixels.size() != static_cast<std::size_t>(width * height)) {
      throw std::domain_error("pixel count does not match image size");
    }
    for (auto p : pixels) {
      if (p > 1) throw std::domain_error("pixels must be 0 or 1");
    }
  }

  bool operator==(const PixelImage&) const = default;
};

struct EncodedImage {
  int id = 0;  // position in the generating dataset
  PixelImage image;
  StateVector state{1};
};

/// All 4x4 images with a uniform 12-pixel frame and free 2x2 center.
/// Index = frame * 16 + center, where bit k of center is the k-th central
/// pixel in row-major order.
inline std::vector<PixelImage> framed_4x4_dataset() {
  std::vector<PixelImage> out;
  for (int frame = 0; frame < 2; ++frame) {
    for (int center = 0; center < 16; ++center) {
      PixelImage img{4, 4, std::vector<std::uint8_t>(16, static_cast<std::uint8_t>(frame))};
      const int central[4] = {5, 6, 9, 10};
      for (int k = 0; k < 4; ++k) {
        img.pixels[static_cast<std::size_t>(central[k])] =
            static_cast<std::uint8_t>((center >> k) & 1);
      }
      out.push_back(std::move(img));
    }
  }
  return out;
}

inline bool is_bar_or_stripe(const PixelImage& img) {
  bool rows_uniform = true;
  bool cols_uniform = true;
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      rows_uniform = rows_uniform && img.at(r, c) == img.at(r, 0);
      cols_uniform = cols_uniform && img.at(r, c) == img.at(0, c);
    }
  }
  return rows_uniform || cols_uniform;
}

/// Every 2-row x 4-column bar or stripe pattern, ordered by the integer
/// whose bit p is pixel p. Yields 18 images.
inline std::vector<PixelImage> bars_and_stripes_2x4() {
  std::vector<PixelImage> out;
  for (unsigned bits = 0; bits < 256; ++bits) {
    PixelImage img{4, 2, std::vector<std::uint8_t>(8)};
    for (int p = 0; p < 8; ++p) img.pixels[static_cast<std::size_t>(p)] = (bits >> p) & 1u;
    if (is_bar_or_stripe(img)) out.push_back(std::move(img));
  }
  return out;
}

/// Amplitude of pixel p is (-1)^pixel[p] / sqrt(pixel count).
inline EncodedImage encode(const PixelImage& image, int id = 0) {
  image.validate();
  const auto count = static_cast<Eigen::Index>(image.pixels.size());
  const double mag = 1.0 / std::sqrt(static_cast<double>(count));
  Eigen::VectorXcd amps(count);
  for (Eigen::Index p = 0; p < count; ++p) {
    amps(p) = image.pixels[static_cast<std::size_t>(p)] ? -mag : mag;
  }
  return EncodedImage{id, image, StateVector::normalized(std::move(amps))};
}

/// Reads pixels back off the amplitude signs.
inline PixelImage decode(const StateVector& state, int width, int height) {
  if (static_cast<std::size_t>(width * height) != state.dimension()) {
    throw std::domain_error("decode: image size does not match state dimension");
  }
  PixelImage img{width, height, std::vector<std::uint8_t>(state.dimension())};
  for (std::size_t p = 0; p < state.dimension(); ++p) {
    img.pixels[p] = state[p].real() < 0.0 ? 1 : 0;
  }
  return img;
}

inline std::vector<EncodedImage> encode_all(const std::vector<PixelImage>& images) {
  std::vector<EncodedImage> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) out.push_back(encode(images[i], static_cast<int>(i)));
  return out;
}

struct DatasetSplit {
  std::vector<EncodedImage> train;  // augmented and shuffled
  std::vector<EncodedImage> test;
  std::vector<int> train_ids;       // selected originals, ascending
  int batch_size = 1;
  std::uint64_t seed = 0;
};

struct SplitOptions {
  int train_count = 0;
  int replication = 1;
  int batch_size = 1;
  std::uint64_t seed = 0;
  // Overrides the seeded selection when set.
  std::optional<std::vector<int>> train_indices;
};

/// Picks the training images (seeded, without replacement), replicates them
/// and shuffles; the rest become the test set in original order.
inline DatasetSplit make_split(const std::vector<PixelImage>& images, const SplitOptions& opt) {
  const int total = static_cast<int>(images.size());
  if (opt.replication < 1) throw std::domain_error("replication must be >= 1");
  if (opt.batch_size < 1) throw std::domain_error("batch size must be >= 1");

  std::vector<int> chosen;
  if (opt.train_indices) {
    chosen = *opt.train_indices;
    std::sort(chosen.begin(), chosen.end());
    if (std::adjacent_find(chosen.begin(), chosen.end()) != chosen.end()) {
      throw std::domain_error("duplicate training index");
    }
    for (int i : chosen) {
      if (i < 0 || i >= total) throw std::out_of_range("training index out of range");
    }
  } else {
    if (opt.train_count < 1 || opt.train_count > total) {
      throw std::domain_error("train count must be in [1, " + std::to_string(total) + "]");
    }
    std::vector<int> order(static_cast<std::size_t>(total));
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_stream(opt.seed, 0x5e1ec7);
    std::shuffle(order.begin(), order.end(), rng);
    chosen.assign(order.begin(), order.begin() + opt.train_count);
    std::sort(chosen.begin(), chosen.end());
  }
  if (chosen.empty()) throw std::domain_error("training set is empty");

  const auto augmented = chosen.size() * static_cast<std::size_t>(opt.replication);
  if (augmented % static_cast<std::size_t>(opt.batch_size) != 0) {
    throw std::domain_error("batch size " + std::to_string(opt.batch_size) +
                            " does not divide augmented training size " +
                            std::to_string(augmented));
  }

  DatasetSplit split;
  split.batch_size = opt.batch_size;
  split.seed = opt.seed;
  split.train_ids = chosen;
  for (int rep = 0; rep < opt.replication; ++rep) {
    for (int i : chosen) split.train.push_back(encode(images[static_cast<std::size_t>(i)], i));
  }
  auto rng = make_stream(opt.seed, 0x5f0ff1e);
  std::shuffle(split.train.begin(), split.train.end(), rng);
  for (int i = 0; i < total; ++i) {
    if (!std::binary_search(chosen.begin(), chosen.end(), i)) {
      split.test.push_back(encode(images[static_cast<std::size_t>(i)], i));
    }
  }
  return split;
}

inline nlohmann::json dataset_to_json(const std::string& name,
                                      const std::vector<PixelImage>& images) {
  nlohmann::json out;
  out["dataset"] = name;
  out["images"] = nlohmann::json::array();
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto enc = encode(images[i], static_cast<int>(i));
    nlohmann::json amps = nlohmann::json::array();
    for (std::size_t k = 0; k < enc.state.dimension(); ++k) amps.push_back(enc.state[k].real());
    out["images"].push_back({{"id", i},
                             {"width", images[i].width},
                             {"height", images[i].height},
                             {"pixels", images[i].pixels},
                             {"amplitudes", amps}});
  }
  return out;
}

}  // namespace qcompress
