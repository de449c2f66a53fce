#include "aquacast/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>

#include "aquacast/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

namespace aquacast {

namespace {

constexpr char kMagic[4] = {'A', 'Q', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

constexpr std::uint32_t kLayerDense = 0;
constexpr std::uint32_t kLayerGru = 1;

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot write " + path);
  }
  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void i32(std::int32_t v) { bytes(&v, 4); }
  void f64(double v) { bytes(&v, 8); }
  void matrix(const nn::Matrix& m) {  // row-major
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
  }
  void finish(const std::string& path) {
    out_.flush();
    if (!out_) throw DataError("write failed: " + path);
  }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw DataError("cannot open " + path);
  }
  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw DataError("truncated checkpoint");
  }
  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return v;
  }
  std::int32_t i32() {
    std::int32_t v;
    bytes(&v, 4);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, 8);
    return v;
  }
  void matrix(nn::Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = f64();
  }

 private:
  std::ifstream in_;
};

void write_layer(Writer& w, const nn::Layer& layer) {
  if (const auto* d = dynamic_cast<const nn::DenseLayer*>(&layer)) {
    w.u32(kLayerDense);
    w.i32(d->input_width());
    w.i32(d->output_width());
    w.u32(static_cast<std::uint32_t>(d->activation()));
    w.matrix(d->weight);
    w.matrix(d->bias);
    return;
  }
  if (const auto* g = dynamic_cast<const nn::GRULayer*>(&layer)) {
    w.u32(kLayerGru);
    w.i32(g->input_width());
    w.i32(g->units());
    w.u32(static_cast<std::uint32_t>(g->gate_activation()));
    w.u32(static_cast<std::uint32_t>(g->output_activation()));
    w.u8(g->return_sequences() ? 1 : 0);
    w.matrix(g->w_z);
    w.matrix(g->u_z);
    w.matrix(g->b_z);
    w.matrix(g->w_r);
    w.matrix(g->u_r);
    w.matrix(g->b_r);
    w.matrix(g->w_h);
    w.matrix(g->u_h);
    w.matrix(g->b_h);
    return;
  }
  throw std::logic_error("unknown layer kind");
}

nn::Activation read_activation(Reader& r) {
  const std::uint32_t v = r.u32();
  if (v > 3) throw DataError("bad activation id in checkpoint");
  return static_cast<nn::Activation>(v);
}

std::unique_ptr<nn::Layer> read_layer(Reader& r) {
  const std::uint32_t type = r.u32();
  if (type == kLayerDense) {
    const int in = r.i32();
    const int out = r.i32();
    if (in < 1 || out < 1) throw DataError("bad dense shape in checkpoint");
    const nn::Activation act = read_activation(r);
    auto layer = std::make_unique<nn::DenseLayer>(in, out, act);
    r.matrix(layer->weight);
    r.matrix(layer->bias);
    return layer;
  }
  if (type == kLayerGru) {
    const int in = r.i32();
    const int units = r.i32();
    if (in < 1 || units < 1) throw DataError("bad GRU shape in checkpoint");
    const nn::Activation gate = read_activation(r);
    const nn::Activation out = read_activation(r);
    const bool ret_seq = r.u8() != 0;
    auto layer = std::make_unique<nn::GRULayer>(in, units, gate, out, ret_seq);
    r.matrix(layer->w_z);
    r.matrix(layer->u_z);
    r.matrix(layer->b_z);
    r.matrix(layer->w_r);
    r.matrix(layer->u_r);
    r.matrix(layer->b_r);
    r.matrix(layer->w_h);
    r.matrix(layer->u_h);
    r.matrix(layer->b_h);
    return layer;
  }
  throw DataError("unknown layer type in checkpoint");
}

void write_network(Writer& w, const nn::Network& net) {
  w.u32(static_cast<std::uint32_t>(net.branch_count()));
  for (std::size_t b = 0; b < net.branch_count(); ++b) {
    const nn::InputSpec spec = net.input_specs()[b];
    w.i32(spec.steps);
    w.i32(spec.width);
    w.u32(static_cast<std::uint32_t>(net.branch(b).size()));
    for (const auto& layer : net.branch(b)) write_layer(w, *layer);
  }
  w.u32(static_cast<std::uint32_t>(net.head().size()));
  for (const auto& layer : net.head()) write_layer(w, *layer);
}

nn::Network read_network(Reader& r) {
  nn::Network net;
  const std::uint32_t branches = r.u32();
  if (branches == 0 || branches > 16)
    throw DataError("bad branch count in checkpoint");
  for (std::uint32_t b = 0; b < branches; ++b) {
    const int steps = r.i32();
    const int width = r.i32();
    if (steps < 1 || width < 1) throw DataError("bad input spec");
    net.start_branch({steps, width});
    const std::uint32_t layers = r.u32();
    for (std::uint32_t l = 0; l < layers; ++l) net.add_layer(read_layer(r));
  }
  net.start_head();
  const std::uint32_t head_layers = r.u32();
  for (std::uint32_t l = 0; l < head_layers; ++l)
    net.add_layer(read_layer(r));
  return net;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  Writer w(path);
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(ckpt.model.kind));
  w.i32(ckpt.model.m_classes);
  w.i32(ckpt.model.rho);
  w.f64(ckpt.scaler.lo);
  w.f64(ckpt.scaler.hi);
  w.u8(ckpt.kmeans ? 1 : 0);
  if (ckpt.kmeans) {
    w.u32(static_cast<std::uint32_t>(ckpt.kmeans->centers.size()));
    w.f64(ckpt.kmeans->sse);
    for (double c : ckpt.kmeans->centers) w.f64(c);
  }
  w.u32(ckpt.model.correction ? 2u : 1u);
  write_network(w, ckpt.model.net);
  if (ckpt.model.correction) write_network(w, *ckpt.model.correction);
  w.finish(path);
}

Checkpoint load_checkpoint(const std::string& path) {
  Reader r(path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not a checkpoint file: " + path);
  if (r.u32() != kVersion) throw DataError("unsupported checkpoint version");

  Checkpoint ckpt{Model{ModelKind::BGRU, 0, 0, nn::Network{}, std::nullopt},
                  Scaler{}, std::nullopt};
  const std::uint32_t kind = r.u32();
  if (kind > 3) throw DataError("bad model kind in checkpoint");
  ckpt.model.kind = static_cast<ModelKind>(kind);
  ckpt.model.m_classes = r.i32();
  ckpt.model.rho = r.i32();
  if (ckpt.model.m_classes < 0 || ckpt.model.rho < 0)
    throw DataError("bad hyperparameters in checkpoint");
  ckpt.scaler.lo = r.f64();
  ckpt.scaler.hi = r.f64();
  if (!(ckpt.scaler.hi > ckpt.scaler.lo))
    throw DataError("bad scaler bounds in checkpoint");
  if (r.u8() != 0) {
    KMeansModel km;
    const std::uint32_t m = r.u32();
    if (m < 2 || m > 4096) throw DataError("bad center count in checkpoint");
    km.sse = r.f64();
    km.centers.resize(m);
    for (double& c : km.centers) c = r.f64();
    ckpt.kmeans = std::move(km);
  }
  const std::uint32_t networks = r.u32();
  if (networks != 1 && networks != 2)
    throw DataError("bad network count in checkpoint");
  ckpt.model.net = read_network(r);
  if (networks == 2) ckpt.model.correction = read_network(r);
  return ckpt;
}

}  // namespace aquacast
