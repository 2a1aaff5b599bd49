#include "lml/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "lml/errors.hpp"

namespace lml {
namespace {

constexpr const char* kMagic = "lassomlp-model";
constexpr int kVersion = 1;
constexpr std::size_t kValuesPerLine = 8;

void write_values(std::ostream& out, const Vector& v) {
  char buf[40];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
    out << buf;
    out << ((i + 1 == v.size() || (i + 1) % kValuesPerLine == 0) ? '\n' : ' ');
  }
}

void read_values(std::istream& in, Vector& v, const std::string& what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(in >> v[i])) {
      throw DataError("model file truncated while reading " + what + " (value " +
                      std::to_string(i) + " of " + std::to_string(v.size()) + ")");
    }
  }
}

std::string expect_token(std::istream& in, const std::string& what) {
  std::string tok;
  if (!(in >> tok)) throw DataError("model file truncated before " + what);
  return tok;
}

std::size_t expect_size(std::istream& in, const std::string& what) {
  long long n = 0;
  if (!(in >> n) || n < 1) throw DataError("model file: bad " + what);
  return static_cast<std::size_t>(n);
}

DenseLayer read_dense(std::istream& in, const std::string& which) {
  const std::string tag = expect_token(in, which);
  if (tag != "dense") throw DataError("model file: expected 'dense' for " + which +
                                      ", got '" + tag + "'");
  const std::size_t out_dim = expect_size(in, which + " out_dim");
  const std::size_t in_dim = expect_size(in, which + " in_dim");
  DenseLayer layer;
  layer.activation = activation_from_string(expect_token(in, which + " activation"));
  layer.weights = Matrix(out_dim, in_dim);
  layer.bias.assign(out_dim, 0.0);
  read_values(in, layer.bias, which + " bias");
  read_values(in, layer.weights.data, which + " weights");
  return layer;
}

}  // namespace

void save_lassomlp(const LassoMLPModel& model, std::ostream& out) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "loss " << to_string(model.loss) << '\n';
  out << "lasso " << model.lasso.dim() << ' ' << to_string(model.lasso.sigma_in) << ' '
      << to_string(model.lasso.sigma_out) << '\n';
  write_values(out, model.lasso.w);
  for (const DenseLayer* layer : {&model.layer1, &model.layer2}) {
    out << "dense " << layer->out_dim() << ' ' << layer->in_dim() << ' '
        << to_string(layer->activation) << '\n';
    write_values(out, layer->bias);
    write_values(out, layer->weights.data);
  }
  out << "end\n";
  if (!out) throw DataError("model file: write failed");
}

void save_lassomlp(const LassoMLPModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open model file for writing: " + path);
  save_lassomlp(model, out);
}

LassoMLPModel load_lassomlp(std::istream& in) {
  const std::string magic = expect_token(in, "header");
  if (magic != kMagic) {
    throw DataError("model file: bad magic '" + magic + "' (expected '" + kMagic + "')");
  }
  int version = 0;
  if (!(in >> version)) throw DataError("model file truncated before version");
  if (version != kVersion) {
    throw DataError("model file: unsupported version " + std::to_string(version) +
                    " (this build reads version " + std::to_string(kVersion) + ")");
  }

  LassoMLPModel model;
  if (expect_token(in, "loss tag") != "loss") throw DataError("model file: expected 'loss'");
  model.loss = loss_from_string(expect_token(in, "loss name"));

  if (expect_token(in, "lasso tag") != "lasso") throw DataError("model file: expected 'lasso'");
  const std::size_t n = expect_size(in, "lasso dim");
  model.lasso.sigma_in = activation_from_string(expect_token(in, "lasso sigma_in"));
  model.lasso.sigma_out = activation_from_string(expect_token(in, "lasso sigma_out"));
  model.lasso.w.assign(n, 0.0);
  read_values(in, model.lasso.w, "lasso weights");

  model.layer1 = read_dense(in, "layer1");
  model.layer2 = read_dense(in, "layer2");
  if (model.layer1.in_dim() != n) {
    throw DataError("model file: layer1 input dim " + std::to_string(model.layer1.in_dim()) +
                    " does not match lasso dim " + std::to_string(n));
  }
  if (model.layer2.in_dim() != model.layer1.out_dim()) {
    throw DataError("model file: layer2 input dim " + std::to_string(model.layer2.in_dim()) +
                    " does not match layer1 output dim " +
                    std::to_string(model.layer1.out_dim()));
  }

  if (expect_token(in, "trailer") != "end") throw DataError("model file: missing 'end' trailer");
  return model;
}

LassoMLPModel load_lassomlp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  return load_lassomlp(in);
}

}  // namespace lml
