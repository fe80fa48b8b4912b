#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "uwf/forward_map.hpp"

namespace uwf {

struct Sample {
  RVec rho_star;  // row-major H x W image
  RVec d;         // intensities, possibly noisy
};

/// Named tensor; matrices are stored row-major with shape {rows, cols}.
struct Tensor {
  std::string name;
  std::string dtype;  // "f64" or "c128"
  std::vector<std::int64_t> shape;
  std::vector<double> f64;
  std::vector<cd> c128;

  std::size_t numel() const;

  static Tensor from(const std::string& name, const RVec& v);
  static Tensor from(const std::string& name, const RMat& m);
  static Tensor from(const std::string& name, const CMat& m);
  static Tensor from(const std::string& name, const CVec& v);
  RVec to_rvec() const;
  RMat to_rmat() const;
  CMat to_cmat() const;
  CVec to_cvec() const;
};

/// "UWFD" | u32 LE version | u64 LE header_len | JSON header | LE payload.
struct Container {
  static constexpr std::uint32_t kVersion = 1;

  std::vector<Tensor> tensors;  // order is preserved on disk
  nlohmann::json meta = nlohmann::json::object();

  const Tensor* find(const std::string& name) const;
  const Tensor& at(const std::string& name) const;
  void put(Tensor t);  // replaces a tensor of the same name in place
};

std::string serialize(const Container& c);
Container deserialize(const std::string& bytes);
void store(const std::string& path, const Container& c);
Container load(const std::string& path);

/// Uniform background in [0.1, 0.3] with one square of amplitude [0.7, 1.0].
std::vector<RVec> gen_squares(std::size_t count, int H, int W, std::uint64_t seed);

struct IdxData {
  std::vector<std::int64_t> dims;
  std::vector<RVec> images;          // magic 0x803, scaled by 1/255
  std::vector<std::int64_t> labels;  // magic 0x801
};
IdxData load_idx(const std::string& path);
IdxData parse_idx(const std::string& bytes);

/// d = |A rho|^2 + n with ||n|| set so that 10 log10(||intensity||^2/||n||^2) = snr_db.
/// The noise direction depends only on (seed, sample index), so sweeps over SNR are nested.
std::vector<Sample> synthesize(const ForwardMap& F, const std::vector<RVec>& images,
                               std::optional<double> snr_db, std::uint64_t seed);

Container dataset_container(const std::vector<Sample>& samples, const nlohmann::json& meta);
std::vector<Sample> dataset_from_container(const Container& c);

Container map_container(const ForwardMap& F);
ForwardMap map_from_container(const Container& c);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace uwf
