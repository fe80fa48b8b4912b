#include "uwf/data_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "uwf/errors.hpp"
#include "uwf/rng.hpp"

namespace uwf {
namespace {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

template <typename T>
void put_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get_le(const std::string& in, std::size_t off) {
  T v;
  std::memcpy(&v, in.data() + off, sizeof(T));
  return v;
}

std::size_t width(const std::string& dtype) {
  if (dtype == "f64") return 8;
  if (dtype == "c128") return 16;
  throw IoError("unknown dtype: " + dtype);
}

std::size_t shape_numel(const std::vector<std::int64_t>& shape) {
  std::size_t n = 1;
  for (auto s : shape) {
    if (s < 0) throw IoError("negative tensor dimension");
    n *= static_cast<std::size_t>(s);
  }
  return n;
}

}  // namespace

std::size_t Tensor::numel() const { return shape_numel(shape); }

Tensor Tensor::from(const std::string& name, const RVec& v) {
  Tensor t{name, "f64", {static_cast<std::int64_t>(v.size())}, {}, {}};
  t.f64.assign(v.data(), v.data() + v.size());
  return t;
}

Tensor Tensor::from(const std::string& name, const RMat& m) {
  Tensor t{name, "f64", {m.rows(), m.cols()}, {}, {}};
  t.f64.reserve(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) t.f64.push_back(m(i, j));
  return t;
}

Tensor Tensor::from(const std::string& name, const CMat& m) {
  Tensor t{name, "c128", {m.rows(), m.cols()}, {}, {}};
  t.c128.reserve(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) t.c128.push_back(m(i, j));
  return t;
}

Tensor Tensor::from(const std::string& name, const CVec& v) {
  Tensor t{name, "c128", {static_cast<std::int64_t>(v.size())}, {}, {}};
  t.c128.assign(v.data(), v.data() + v.size());
  return t;
}

RVec Tensor::to_rvec() const {
  if (dtype != "f64") throw IoError(name + ": expected f64");
  return Eigen::Map<const RVec>(f64.data(), static_cast<Eigen::Index>(f64.size()));
}

RMat Tensor::to_rmat() const {
  if (dtype != "f64" || shape.size() != 2) throw IoError(name + ": expected 2-d f64");
  RMat m(shape[0], shape[1]);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = f64[k++];
  return m;
}

CMat Tensor::to_cmat() const {
  if (dtype != "c128" || shape.size() != 2) throw IoError(name + ": expected 2-d c128");
  CMat m(shape[0], shape[1]);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = c128[k++];
  return m;
}

CVec Tensor::to_cvec() const {
  if (dtype != "c128") throw IoError(name + ": expected c128");
  return Eigen::Map<const CVec>(c128.data(), static_cast<Eigen::Index>(c128.size()));
}

const Tensor* Container::find(const std::string& name) const {
  for (const Tensor& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

const Tensor& Container::at(const std::string& name) const {
  if (const Tensor* t = find(name)) return *t;
  throw IoError("container has no tensor named " + name);
}

void Container::put(Tensor t) {
  for (Tensor& existing : tensors)
    if (existing.name == t.name) {
      existing = std::move(t);
      return;
    }
  tensors.push_back(std::move(t));
}

std::string serialize(const Container& c) {
  nlohmann::json header;
  header["tensors"] = nlohmann::json::array();
  for (const Tensor& t : c.tensors) {
    width(t.dtype);
    const std::size_t n = t.numel();
    if ((t.dtype == "f64" ? t.f64.size() : t.c128.size()) != n)
      throw IoError(t.name + ": data length does not match shape");
    header["tensors"].push_back({{"name", t.name}, {"dtype", t.dtype}, {"shape", t.shape}});
  }
  header["meta"] = c.meta;
  const std::string h = header.dump();

  std::string out = "UWFD";
  put_le<std::uint32_t>(out, Container::kVersion);
  put_le<std::uint64_t>(out, h.size());
  out += h;
  for (const Tensor& t : c.tensors) {
    if (t.dtype == "f64") {
      out.append(reinterpret_cast<const char*>(t.f64.data()), t.f64.size() * 8);
    } else {
      // std::complex<double> is laid out as (re, im)
      out.append(reinterpret_cast<const char*>(t.c128.data()), t.c128.size() * 16);
    }
  }
  return out;
}

Container deserialize(const std::string& bytes) {
  if (bytes.size() < 16) throw IoError("container truncated: " + std::to_string(bytes.size()) + " bytes");
  if (bytes.compare(0, 4, "UWFD") != 0) throw IoError("bad container magic");
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != Container::kVersion)
    throw IoError("unsupported container version " + std::to_string(version));
  const auto header_len = get_le<std::uint64_t>(bytes, 8);
  if (header_len > bytes.size() - 16) throw IoError("header_len exceeds file size");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed container header: ") + e.what());
  }
  Container c;
  std::size_t off = 16 + header_len;
  try {
    if (header.contains("meta")) c.meta = header.at("meta");
    for (const auto& jt : header.at("tensors")) {
      Tensor t;
      t.name = jt.at("name").get<std::string>();
      t.dtype = jt.at("dtype").get<std::string>();
      t.shape = jt.at("shape").get<std::vector<std::int64_t>>();
      const std::size_t n = t.numel();
      const std::size_t w = width(t.dtype);
      if (n > (bytes.size() - off) / w) throw IoError("payload truncated at tensor " + t.name);
      if (t.dtype == "f64") {
        t.f64.resize(n);
        std::memcpy(t.f64.data(), bytes.data() + off, n * 8);
      } else {
        t.c128.resize(n);
        std::memcpy(reinterpret_cast<char*>(t.c128.data()), bytes.data() + off, n * 16);
      }
      off += n * w;
      c.tensors.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed container header: ") + e.what());
  }
  if (off != bytes.size()) throw IoError("payload length mismatch: trailing bytes");
  return c;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

void store(const std::string& path, const Container& c) { write_file(path, serialize(c)); }
Container load(const std::string& path) { return deserialize(read_file(path)); }

std::vector<RVec> gen_squares(std::size_t count, int H, int W, std::uint64_t seed) {
  if (H < 4 || W < 4) throw ConfigError("gen_squares: H, W must be >= 4");
  std::vector<RVec> out;
  out.reserve(count);
  const int max_side = std::max(2, std::min(H, W) / 3);
  for (std::size_t i = 0; i < count; ++i) {
    SplitMix64 rng(derive_seed(seed, i));
    const double bg = rng.uniform(0.1, 0.3);
    const int side = static_cast<int>(rng.uniform_int(2, max_side));
    const double amp = rng.uniform(0.7, 1.0);
    const int r0 = static_cast<int>(rng.uniform_int(0, H - side));
    const int c0 = static_cast<int>(rng.uniform_int(0, W - side));
    RVec img = RVec::Constant(static_cast<Eigen::Index>(H) * W, bg);
    for (int r = r0; r < r0 + side; ++r)
      for (int c = c0; c < c0 + side; ++c) img(r * W + c) = amp;
    out.push_back(std::move(img));
  }
  return out;
}

IdxData parse_idx(const std::string& bytes) {
  auto be32 = [&](std::size_t off) {
    if (off + 4 > bytes.size()) throw IoError("IDX truncated at offset " + std::to_string(off));
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + off);
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
           std::uint32_t{p[3]};
  };
  const std::uint32_t magic = be32(0);
  if (magic != 0x803 && magic != 0x801)
    throw IoError("bad IDX magic at offset 0");
  const std::size_t ndim = magic & 0xff;
  IdxData out;
  std::size_t total = 1;
  for (std::size_t k = 0; k < ndim; ++k) {
    out.dims.push_back(be32(4 + 4 * k));
    total *= static_cast<std::size_t>(out.dims.back());
  }
  const std::size_t off = 4 + 4 * ndim;
  if (bytes.size() < off + total)
    throw IoError("IDX payload truncated at offset " + std::to_string(bytes.size()) + " (need " +
                  std::to_string(off + total) + ")");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + off);
  if (magic == 0x801) {
    for (std::size_t i = 0; i < total; ++i) out.labels.push_back(p[i]);
    return out;
  }
  const std::size_t count = static_cast<std::size_t>(out.dims[0]);
  const std::size_t per = count ? total / count : 0;
  for (std::size_t i = 0; i < count; ++i) {
    RVec img(static_cast<Eigen::Index>(per));
    for (std::size_t j = 0; j < per; ++j) img(static_cast<Eigen::Index>(j)) = p[i * per + j] / 255.0;
    out.images.push_back(std::move(img));
  }
  return out;
}

IdxData load_idx(const std::string& path) { return parse_idx(read_file(path)); }

std::vector<Sample> synthesize(const ForwardMap& F, const std::vector<RVec>& images,
                               std::optional<double> snr_db, std::uint64_t seed) {
  std::vector<Sample> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].size() != F.N()) throw ConfigError("synthesize: image dimension != N");
    Sample s{images[i], intensity(F, images[i])};
    if (snr_db) {
      SplitMix64 rng(derive_seed(seed, i));
      RVec n(F.M());
      for (Eigen::Index m = 0; m < F.M(); ++m) n(m) = rng.normal();
      const double clean = s.d.norm();
      const double target = (clean > 0.0 ? clean : 1.0) * std::pow(10.0, -*snr_db / 20.0);
      s.d += n * (target / n.norm());
    }
    out.push_back(std::move(s));
  }
  return out;
}

Container dataset_container(const std::vector<Sample>& samples, const nlohmann::json& meta) {
  Container c;
  c.meta = meta;
  c.meta["count"] = samples.size();
  if (samples.empty()) return c;
  const auto N = samples[0].rho_star.size(), M = samples[0].d.size();
  RMat R(static_cast<Eigen::Index>(samples.size()), N), D(static_cast<Eigen::Index>(samples.size()), M);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    R.row(static_cast<Eigen::Index>(i)) = samples[i].rho_star.transpose();
    D.row(static_cast<Eigen::Index>(i)) = samples[i].d.transpose();
  }
  c.put(Tensor::from("data.rho_star", R));
  c.put(Tensor::from("data.d", D));
  return c;
}

std::vector<Sample> dataset_from_container(const Container& c) {
  std::vector<Sample> out;
  if (!c.find("data.rho_star")) return out;
  const RMat R = c.at("data.rho_star").to_rmat();
  const RMat D = c.at("data.d").to_rmat();
  if (R.rows() != D.rows()) throw IoError("dataset tensors disagree on sample count");
  for (Eigen::Index i = 0; i < R.rows(); ++i) out.push_back({R.row(i).transpose(), D.row(i).transpose()});
  return out;
}

Container map_container(const ForwardMap& F) {
  Container c;
  c.meta["kind"] = F.kind();
  c.meta["seed"] = F.seed();
  c.put(Tensor::from("forward.A", F.matrix()));
  return c;
}

ForwardMap map_from_container(const Container& c) {
  const std::string kind = c.meta.value("kind", std::string("file"));
  const auto seed = c.meta.value("seed", std::uint64_t{0});
  return ForwardMap(c.at("forward.A").to_cmat(), kind, seed);
}

}  // namespace uwf
