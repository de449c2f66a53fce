#include "aquacast/models.hpp"

#include <memory>
#include <stdexcept>

#include "aquacast/series.hpp"

namespace aquacast {

using nn::Activation;
using nn::DenseLayer;
using nn::GRULayer;

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::BGRU:
      return "bgru";
    case ModelKind::DCGRU:
      return "dcgru";
    case ModelKind::EDCGRU:
      return "edcgru";
    case ModelKind::GRUN:
      return "grun";
  }
  return "bgru";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "bgru") return ModelKind::BGRU;
  if (name == "dcgru") return ModelKind::DCGRU;
  if (name == "edcgru") return ModelKind::EDCGRU;
  if (name == "grun") return ModelKind::GRUN;
  throw std::invalid_argument("unknown model kind: " + name);
}

int Model::sequence_steps() const {
  if (kind == ModelKind::GRUN) return 5;
  return kSamplesPerDay * (rho + 1);
}

int Model::history_len() const {
  switch (kind) {
    case ModelKind::BGRU:
    case ModelKind::DCGRU:
      return kSamplesPerDay;
    case ModelKind::EDCGRU:
      // A window of 96*(rho+1) expanded values ending at the last actual
      // reading reaches back into the gap before reading t-96, so one
      // extra actual reading is required to interpolate it.
      return rho == 0 ? kSamplesPerDay : kSamplesPerDay + 1;
    case ModelKind::GRUN:
      return kGrunHistory;
  }
  return kSamplesPerDay;
}

std::size_t Model::param_count() const {
  std::size_t total = net.param_count();
  if (correction) total += correction->param_count();
  return total;
}

namespace {

// Shared tail of BGRU/DCGRU/EDCGRU: GRU(32) into a 1-unit linear GRU.
void add_gru_stack(nn::Network& net) {
  net.add_layer(std::make_unique<GRULayer>(1, 32, Activation::Sigmoid,
                                           Activation::Tanh,
                                           /*return_sequences=*/true));
  net.add_layer(std::make_unique<GRULayer>(32, 1, Activation::Sigmoid,
                                           Activation::Linear,
                                           /*return_sequences=*/false));
}

Model build_dense_class_gru(ModelKind kind, int m, int rho,
                            std::uint64_t seed) {
  if (m < 2) throw std::invalid_argument("m must be >= 2");
  if (rho < 0) throw std::invalid_argument("rho must be >= 0");
  Model model{kind, m, rho, nn::Network{}, std::nullopt};
  const int steps = kSamplesPerDay * (rho + 1);
  model.net.start_branch({steps, m + 1});
  model.net.add_layer(
      std::make_unique<DenseLayer>(m + 1, 50, Activation::Relu));
  model.net.add_layer(std::make_unique<DenseLayer>(50, 10, Activation::Relu));
  model.net.add_layer(std::make_unique<DenseLayer>(10, 1, Activation::Linear));
  add_gru_stack(model.net);
  nn::init_xavier(model.net, seed);
  return model;
}

}  // namespace

Model build_bgru(std::uint64_t seed) {
  Model model{ModelKind::BGRU, 0, 0, nn::Network{}, std::nullopt};
  model.net.start_branch({kSamplesPerDay, 1});
  add_gru_stack(model.net);
  nn::init_xavier(model.net, seed);
  return model;
}

Model build_dcgru(int m, std::uint64_t seed) {
  return build_dense_class_gru(ModelKind::DCGRU, m, 0, seed);
}

Model build_edcgru(int m, int rho, std::uint64_t seed) {
  return build_dense_class_gru(ModelKind::EDCGRU, m, rho, seed);
}

Model build_grun(std::uint64_t seed) {
  Model model{ModelKind::GRUN, 0, 0, nn::Network{}, std::nullopt};
  for (int units : {48, 32, 32}) {
    model.net.start_branch({5, 1});
    model.net.add_layer(std::make_unique<GRULayer>(
        1, units, Activation::Relu, Activation::Tanh,
        /*return_sequences=*/false));
  }
  model.net.start_head();
  int in = 48 + 32 + 32;
  for (int units : {64, 32, 16, 8, 4, 2}) {
    model.net.add_layer(
        std::make_unique<DenseLayer>(in, units, Activation::Relu));
    in = units;
  }
  model.net.add_layer(std::make_unique<DenseLayer>(in, 1, Activation::Linear));
  nn::init_xavier(model.net, seed);
  return model;
}

GRUNFeatureWindow extract_grun_window(std::span<const double> series,
                                      std::size_t t) {
  if (t < static_cast<std::size_t>(kGrunHistory) || t >= series.size() + 1)
    throw std::invalid_argument("target index outside usable range");
  GRUNFeatureWindow w{};
  for (int i = 0; i < 5; ++i) {
    w.recent[i] = series[t - kGrunRecentLags[i]];
    w.near[i] = series[t - kGrunNearLags[i]];
    w.distant[i] = series[t - kGrunDistantLags[i]];
  }
  return w;
}

nn::Network build_grun_correction(std::uint64_t seed) {
  nn::Network net;
  net.start_branch({1, kSamplesPerDay});
  net.add_layer(std::make_unique<DenseLayer>(kSamplesPerDay, kSamplesPerDay,
                                             Activation::Linear));
  nn::init_xavier(net, seed);
  return net;
}

}  // namespace aquacast
