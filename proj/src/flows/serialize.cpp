#include "eflow/flows/serialize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "eflow/core/error.hpp"

namespace eflow::flows {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

namespace {

class Writer {
 public:
  void bytes(std::string_view s) { out_.append(s); }

  template <class T>
  void put(T value) {
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    out_.append(reinterpret_cast<const char *>(raw), sizeof(T));
  }

  void u8(std::uint8_t v) { put(v); }
  void u16(std::uint16_t v) { put(v); }
  void u32(Index v) { put(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v) { put(v); }
  void f64(double v) { put(v); }
  void matrix(const Matrix &m) {
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) f64(m(i, j));
  }

  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  void section(std::string name) { section_ = std::move(name); }

  [[noreturn]] void fail(const std::string &why) const {
    raise(ErrorKind::format, "model file section '" + section_ + "': " + why);
  }

  void expect(std::string_view tag) {
    if (data_.size() - pos_ < tag.size() || data_.substr(pos_, tag.size()) != tag) {
      fail("missing tag " + std::string(tag));
    }
    pos_ += tag.size();
  }

  template <class T>
  T get() {
    if (data_.size() - pos_ < sizeof(T)) fail("truncated");
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, data_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  std::uint8_t u8() { return get<std::uint8_t>(); }
  std::uint16_t u16() { return get<std::uint16_t>(); }
  Index u32(Index max = 1 << 24) {
    const auto v = static_cast<Index>(get<std::uint32_t>());
    if (v > max) fail("implausible size " + std::to_string(v));
    return v;
  }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  double f64() {
    const double v = get<double>();
    if (!std::isfinite(v)) fail("non-finite value");
    return v;
  }
  void matrix(Matrix &m) {
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) m(i, j) = f64();
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
  std::string section_ = "header";
};

Activation activation_from(Reader &r) {
  const auto tag = r.u8();
  if (tag > static_cast<std::uint8_t>(Activation::identity)) r.fail("unknown activation tag");
  return static_cast<Activation>(tag);
}

void write_dif(Writer &w, const DenseInvertibleFlow &m) {
  w.u32(m.dim);
  w.u32(static_cast<Index>(m.layers.size()));
  w.f64(m.sigma);
  w.f64(m.activity_weight);
  w.f64(m.leaky_alpha);
  for (const auto &layer : m.layers) w.u8(static_cast<std::uint8_t>(layer.activation));
}

DenseInvertibleFlow read_dif(Reader &r) {
  DenseInvertibleFlow m;
  m.dim = r.u32(1 << 16);
  const Index n_layers = r.u32(1 << 12);
  m.sigma = r.f64();
  m.activity_weight = r.f64();
  m.leaky_alpha = r.f64();
  for (Index l = 0; l < n_layers; ++l) {
    DenseLayer layer;
    layer.weight = Matrix::Zero(m.dim, m.dim);
    layer.bias = Matrix::Zero(1, m.dim);
    layer.activation = activation_from(r);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

void write_descriptor(Writer &w, const FlowModel &model) {
  if (const auto *dif = std::get_if<DenseInvertibleFlow>(&model)) {
    write_dif(w, *dif);
  } else if (const auto *ref = std::get_if<RectangularFlow>(&model)) {
    w.u32(static_cast<Index>(ref->widths.size()));
    for (Index width : ref->widths) w.u32(width);
    w.f64(ref->activity_weight);
    w.f64(ref->leaky_alpha);
    for (const auto &layer : ref->layers) w.u8(static_cast<std::uint8_t>(layer.activation));
  } else {
    const auto &saef = std::get<SemiAutoregressiveFlow>(model);
    w.u32(saef.block_count());
    for (Index s : saef.partition.sizes) w.u32(s);
    for (const auto &t : saef.transformers) write_dif(w, t);
    for (Index b = 1; b < saef.block_count(); ++b) w.u32(saef.conditioners[b].w1.rows());
  }
}

FlowModel read_descriptor(Reader &r, Architecture arch) {
  switch (arch) {
    case Architecture::dif:
      return read_dif(r);
    case Architecture::ref: {
      RectangularFlow m;
      const Index n = r.u32(1 << 12);
      if (n < 2) r.fail("rectangular flow needs two widths");
      for (Index i = 0; i < n; ++i) m.widths.push_back(r.u32(1 << 16));
      m.activity_weight = r.f64();
      m.leaky_alpha = r.f64();
      for (Index l = 0; l + 1 < n; ++l) {
        DenseLayer layer;
        layer.weight = Matrix::Zero(m.widths[l + 1], m.widths[l]);
        layer.bias = Matrix::Zero(1, m.widths[l + 1]);
        layer.activation = activation_from(r);
        m.layers.push_back(std::move(layer));
      }
      return m;
    }
    case Architecture::saef: {
      SemiAutoregressiveFlow m;
      const Index blocks = r.u32(1 << 16);
      for (Index b = 0; b < blocks; ++b) m.partition.sizes.push_back(r.u32(1 << 16));
      for (Index b = 0; b < blocks; ++b) m.transformers.push_back(read_dif(r));
      for (Index b = 0; b < blocks; ++b) {
        const auto &t = m.transformers[b];
        const Index h = static_cast<Index>(t.layers.size()) * t.dim;
        Conditioner c;
        c.b2 = Matrix::Zero(1, h);
        m.conditioners.push_back(std::move(c));
      }
      for (Index b = 1; b < blocks; ++b) {
        const Index hidden = r.u32(1 << 16);
        const Index in = m.partition.start(b);
        auto &c = m.conditioners[b];
        c.w1 = Matrix::Zero(hidden, in);
        c.b1 = Matrix::Zero(1, hidden);
        c.w2 = Matrix::Zero(c.b2.cols(), hidden);
      }
      return m;
    }
  }
  r.fail("unknown architecture");
}

std::uint64_t total_size(const std::vector<Matrix *> &params) {
  std::uint64_t n = 0;
  for (const auto *p : params) n += static_cast<std::uint64_t>(p->size());
  return n;
}

}  // namespace

std::string encode_model(const ModelFile &file) {
  validate(file.model);
  Writer w;
  w.bytes("EFLW");
  w.u16(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(architecture(file.model)));

  w.bytes("DESC");
  write_descriptor(w, file.model);

  w.bytes("WGHT");
  const auto values = parameter_values(file.model);
  std::uint64_t count = 0;
  for (const auto &v : values) count += static_cast<std::uint64_t>(v.size());
  w.u64(count);
  for (const auto &v : values) w.matrix(v);

  w.bytes("XFRM");
  const auto &t = file.transform;
  if (t.model_dim() != data_dim(file.model)) {
    raise(ErrorKind::dimension, "data transform does not match the model dimension");
  }
  w.u32(t.raw_dim);
  for (Index c = 0; c < t.raw_dim; ++c) w.f64(t.means(c));
  for (Index c = 0; c < t.raw_dim; ++c) w.f64(t.stds(c));
  w.u32(t.padding);
  w.u32(static_cast<Index>(t.permutation.size()));
  for (Index p : t.permutation) w.u32(p);

  w.bytes("OPTM");
  w.u8(file.optimizer.has_value() ? 1 : 0);
  if (file.optimizer) {
    const auto &opt = *file.optimizer;
    if (opt.first_moment.size() != values.size() || opt.second_moment.size() != values.size()) {
      raise(ErrorKind::contract, "optimizer state does not match the model parameters");
    }
    w.u64(opt.step);
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (opt.first_moment[i].rows() != values[i].rows() ||
          opt.first_moment[i].cols() != values[i].cols() ||
          opt.second_moment[i].rows() != values[i].rows() ||
          opt.second_moment[i].cols() != values[i].cols()) {
        raise(ErrorKind::contract, "optimizer moment shape mismatch");
      }
      w.matrix(opt.first_moment[i]);
      w.matrix(opt.second_moment[i]);
    }
  }
  return w.take();
}

ModelFile decode_model(std::string_view bytes) {
  Reader r(bytes);
  r.section("header");
  r.expect("EFLW");
  const auto version = r.u16();
  if (version != kFormatVersion) r.fail("unsupported version " + std::to_string(version));
  const auto tag = r.u8();
  if (tag > static_cast<std::uint8_t>(Architecture::saef)) r.fail("unknown architecture tag");

  r.section("descriptor");
  r.expect("DESC");
  FlowModel model = read_descriptor(r, static_cast<Architecture>(tag));
  try {
    validate(model);
  } catch (const Error &e) {
    r.fail(e.what());
  }

  r.section("weights");
  r.expect("WGHT");
  auto params = parameters(model);
  if (r.u64() != total_size(params)) r.fail("weight count does not match the descriptor");
  for (auto *p : params) r.matrix(*p);

  r.section("transform");
  r.expect("XFRM");
  data::DataTransform t;
  t.raw_dim = r.u32();
  t.means.resize(t.raw_dim);
  t.stds.resize(t.raw_dim);
  for (Index c = 0; c < t.raw_dim; ++c) t.means(c) = r.f64();
  for (Index c = 0; c < t.raw_dim; ++c) {
    t.stds(c) = r.f64();
    if (t.stds(c) < 0.0) r.fail("negative standard deviation");
  }
  t.padding = r.u32();
  const Index perm = r.u32();
  std::vector<bool> seen(static_cast<std::size_t>(perm), false);
  for (Index i = 0; i < perm; ++i) {
    const Index p = r.u32();
    if (p >= perm || seen[p]) r.fail("column order is not a permutation");
    seen[p] = true;
    t.permutation.push_back(p);
  }
  if (t.model_dim() != data_dim(model) || (perm != 0 && perm != t.model_dim())) {
    r.fail("transform does not match the model dimension");
  }

  r.section("optimizer");
  r.expect("OPTM");
  std::optional<OptimizerSection> optimizer;
  const auto flag = r.u8();
  if (flag > 1) r.fail("bad presence flag");
  if (flag == 1) {
    OptimizerSection opt;
    opt.step = r.u64();
    for (const auto *p : params) {
      opt.first_moment.emplace_back(p->rows(), p->cols());
      opt.second_moment.emplace_back(p->rows(), p->cols());
      r.matrix(opt.first_moment.back());
      r.matrix(opt.second_moment.back());
    }
    optimizer = std::move(opt);
  }
  r.section("trailer");
  if (!r.done()) r.fail("unexpected trailing bytes");
  return ModelFile{std::move(model), std::move(t), std::move(optimizer)};
}

void save_model(const std::string &path, const ModelFile &file) {
  const std::string bytes = encode_model(file);
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::ingestion, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(ErrorKind::ingestion, "failed writing " + path);
}

ModelFile load_model(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::ingestion, "cannot open model file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return decode_model(buffer.str());
}

}  // namespace eflow::flows
