#include <algorithm>
#include <cmath>
#include <limits>

#include "fieldlink/common/error.hpp"
#include "fieldlink/neuralnet/model.hpp"

namespace fieldlink::neuralnet {
namespace {

struct ConvGeometry {
  std::size_t in_h, in_w, in_c;
  std::size_t out_h, out_w, out_c;
  std::size_t kernel, stride;
  std::ptrdiff_t pad_top, pad_left;
};

ConvGeometry conv_geometry(const Conv2D& c, const Shape& in, const Shape& out) {
  ConvGeometry g{in[0], in[1], in[2], out[0], out[1], out[2], c.kernel, c.stride, 0, 0};
  // Same padding: total = max((out - 1) * stride + k - in, 0), split low side first.
  const auto pad_total = [&](std::size_t in_n, std::size_t out_n) {
    const auto need = static_cast<std::ptrdiff_t>((out_n - 1) * c.stride + c.kernel) - static_cast<std::ptrdiff_t>(in_n);
    return std::max<std::ptrdiff_t>(need, 0);
  };
  g.pad_top = pad_total(g.in_h, g.out_h) / 2;
  g.pad_left = pad_total(g.in_w, g.out_w) / 2;
  return g;
}

void conv_forward(const ConvGeometry& g, const double* in, const double* w, const double* b, double* out) {
  for (std::size_t oy = 0; oy < g.out_h; ++oy) {
    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
      double* o = out + (oy * g.out_w + ox) * g.out_c;
      std::copy(b, b + g.out_c, o);
      for (std::size_t ky = 0; ky < g.kernel; ++ky) {
        const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - g.pad_top;
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
        for (std::size_t kx = 0; kx < g.kernel; ++kx) {
          const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - g.pad_left;
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
          const double* ip = in + (static_cast<std::size_t>(iy) * g.in_w + static_cast<std::size_t>(ix)) * g.in_c;
          const double* wp = w + (ky * g.kernel + kx) * g.in_c * g.out_c;
          for (std::size_t ci = 0; ci < g.in_c; ++ci) {
            const double v = ip[ci];
            const double* wr = wp + ci * g.out_c;
            for (std::size_t co = 0; co < g.out_c; ++co) o[co] += v * wr[co];
          }
        }
      }
    }
  }
}

// `dout` is the gradient w.r.t. the pre-activation output.
void conv_backward(const ConvGeometry& g, const double* in, const double* w, const double* dout, double* dw,
                   double* db, double* din) {
  for (std::size_t oy = 0; oy < g.out_h; ++oy) {
    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
      const double* d = dout + (oy * g.out_w + ox) * g.out_c;
      for (std::size_t co = 0; co < g.out_c; ++co) db[co] += d[co];
      for (std::size_t ky = 0; ky < g.kernel; ++ky) {
        const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - g.pad_top;
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
        for (std::size_t kx = 0; kx < g.kernel; ++kx) {
          const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - g.pad_left;
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
          const std::size_t in_off = (static_cast<std::size_t>(iy) * g.in_w + static_cast<std::size_t>(ix)) * g.in_c;
          const std::size_t w_off = (ky * g.kernel + kx) * g.in_c * g.out_c;
          for (std::size_t ci = 0; ci < g.in_c; ++ci) {
            const double v = in[in_off + ci];
            const double* wr = w + w_off + ci * g.out_c;
            double* dwr = dw + w_off + ci * g.out_c;
            double acc = 0.0;
            for (std::size_t co = 0; co < g.out_c; ++co) {
              dwr[co] += v * d[co];
              acc += wr[co] * d[co];
            }
            if (din != nullptr) din[in_off + ci] += acc;
          }
        }
      }
    }
  }
}

void maxpool_forward(const Shape& in, const Shape& out, std::size_t window, const double* x, double* y) {
  const std::size_t c_n = in[2];
  for (std::size_t oy = 0; oy < out[0]; ++oy) {
    for (std::size_t ox = 0; ox < out[1]; ++ox) {
      for (std::size_t c = 0; c < c_n; ++c) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t dy = 0; dy < window; ++dy) {
          for (std::size_t dx = 0; dx < window; ++dx) {
            const std::size_t iy = oy * window + dy;
            const std::size_t ix = ox * window + dx;
            best = std::max(best, x[(iy * in[1] + ix) * c_n + c]);
          }
        }
        y[(oy * out[1] + ox) * c_n + c] = best;
      }
    }
  }
}

// Routes each output gradient to the first maximal input of its window.
void maxpool_backward(const Shape& in, const Shape& out, std::size_t window, const double* x, const double* dy,
                      double* dx) {
  const std::size_t c_n = in[2];
  for (std::size_t oy = 0; oy < out[0]; ++oy) {
    for (std::size_t ox = 0; ox < out[1]; ++ox) {
      for (std::size_t c = 0; c < c_n; ++c) {
        std::size_t arg = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t wy = 0; wy < window; ++wy) {
          for (std::size_t wx = 0; wx < window; ++wx) {
            const std::size_t idx = ((oy * window + wy) * in[1] + (ox * window + wx)) * c_n + c;
            if (x[idx] > best) {
              best = x[idx];
              arg = idx;
            }
          }
        }
        dx[arg] += dy[(oy * out[1] + ox) * c_n + c];
      }
    }
  }
}

Activation activation_of(const LayerSpec& layer) {
  if (const auto* c = std::get_if<Conv2D>(&layer)) return c->activation;
  if (const auto* d = std::get_if<Dense>(&layer)) return d->activation;
  return Activation::linear;
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

std::size_t argmax(std::span<const double> values) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

ForwardPass forward(const Model& model, const Tensor& input, Mode mode, Rng* rng) {
  const auto& spec = model.spec();
  if (input.shape() != spec.input_shape) {
    throw Error(Errc::shape_error, "input shape " + shape_string(input.shape()) + " does not match network input " +
                                       shape_string(spec.input_shape));
  }
  const auto& shapes = model.output_shapes();
  const auto& params = model.parameters();

  ForwardPass pass;
  pass.activations.reserve(spec.layers.size() + 1);
  pass.activations.push_back(input);
  pass.dropout_scale.resize(spec.layers.size());

  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const Tensor& x = pass.activations.back();
    Tensor y(shapes[i]);
    const auto& layer = spec.layers[i];

    if (const auto* c = std::get_if<Conv2D>(&layer)) {
      conv_forward(conv_geometry(*c, x.shape(), y.shape()), x.data(), params[i].weights.data(),
                   params[i].bias.data(), y.data());
    } else if (const auto* p = std::get_if<MaxPool2D>(&layer)) {
      maxpool_forward(x.shape(), y.shape(), p->window, x.data(), y.data());
    } else if (const auto* d = std::get_if<Dropout>(&layer)) {
      std::copy(x.values().begin(), x.values().end(), y.values().begin());
      if (mode == Mode::train && d->rate > 0.0) {
        if (rng == nullptr) throw Error(Errc::invalid_argument, "train-mode dropout needs a random source");
        auto& scale = pass.dropout_scale[i];
        scale.resize(y.size());
        const double keep = 1.0 - d->rate;
        for (std::size_t k = 0; k < y.size(); ++k) {
          scale[k] = uniform01(*rng) < keep ? 1.0 / keep : 0.0;
          y[k] *= scale[k];
        }
      }
    } else if (std::holds_alternative<Flatten>(layer)) {
      std::copy(x.values().begin(), x.values().end(), y.values().begin());
    } else if (const auto* dn = std::get_if<Dense>(&layer)) {
      const std::size_t in_n = x.size();
      const std::size_t out_n = dn->units;
      const double* w = params[i].weights.data();
      std::copy(params[i].bias.values().begin(), params[i].bias.values().end(), y.values().begin());
      for (std::size_t a = 0; a < in_n; ++a) {
        const double v = x[a];
        if (v == 0.0) continue;
        const double* wr = w + a * out_n;
        for (std::size_t o = 0; o < out_n; ++o) y[o] += v * wr[o];
      }
    }

    const bool last = i + 1 == spec.layers.size();
    switch (activation_of(layer)) {
      case Activation::relu:
        for (auto& v : y.values()) v = v > 0.0 ? v : 0.0;
        break;
      case Activation::softmax: {
        pass.logits.assign(y.values().begin(), y.values().end());
        auto probs = softmax(pass.logits);
        std::copy(probs.begin(), probs.end(), y.values().begin());
        break;
      }
      case Activation::linear:
        break;
    }
    if (last && pass.logits.empty()) pass.logits.assign(y.values().begin(), y.values().end());
    pass.activations.push_back(std::move(y));
  }
  if (spec.layers.empty()) pass.logits.assign(input.values().begin(), input.values().end());
  pass.probabilities = softmax(pass.logits);
  return pass;
}

double cross_entropy(const ForwardPass& pass, std::size_t label) {
  // log-softmax straight from the logits avoids log(0) on confident outputs.
  const auto& z = pass.logits;
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  return -(z.at(label) - m - std::log(sum));
}

double backward(const Model& model, const ForwardPass& pass, std::size_t label, Gradients& grads) {
  const auto& spec = model.spec();
  const auto& params = model.parameters();
  const std::size_t n_layers = spec.layers.size();
  if (pass.probabilities.empty() || label >= pass.probabilities.size()) {
    throw Error(Errc::invalid_argument, "label outside the network's output range");
  }
  const double loss = cross_entropy(pass, label);
  if (n_layers == 0) return loss;

  // Gradient w.r.t. the final pre-softmax logits.
  Tensor delta(pass.activations.back().shape());
  for (std::size_t k = 0; k < delta.size(); ++k) delta[k] = pass.probabilities[k] - (k == label ? 1.0 : 0.0);
  // Softmax and linear heads already give the pre-activation gradient.
  bool delta_is_pre_activation = activation_of(spec.layers.back()) != Activation::relu;

  for (std::size_t li = n_layers; li-- > 0;) {
    const auto& layer = spec.layers[li];
    const Tensor& x = pass.activations[li];
    const Tensor& y = pass.activations[li + 1];

    if (!delta_is_pre_activation && activation_of(layer) == Activation::relu) {
      for (std::size_t k = 0; k < delta.size(); ++k) {
        if (y[k] <= 0.0) delta[k] = 0.0;
      }
    }
    delta_is_pre_activation = false;

    const bool need_input_grad = li > 0;
    Tensor dx(x.shape());

    if (const auto* c = std::get_if<Conv2D>(&layer)) {
      conv_backward(conv_geometry(*c, x.shape(), y.shape()), x.data(), params[li].weights.data(), delta.data(),
                    grads[li].weights.data(), grads[li].bias.data(), need_input_grad ? dx.data() : nullptr);
    } else if (const auto* p = std::get_if<MaxPool2D>(&layer)) {
      maxpool_backward(x.shape(), y.shape(), p->window, x.data(), delta.data(), dx.data());
    } else if (std::holds_alternative<Dropout>(layer)) {
      const auto& scale = pass.dropout_scale[li];
      for (std::size_t k = 0; k < dx.size(); ++k) dx[k] = scale.empty() ? delta[k] : delta[k] * scale[k];
    } else if (std::holds_alternative<Flatten>(layer)) {
      std::copy(delta.values().begin(), delta.values().end(), dx.values().begin());
    } else if (const auto* dn = std::get_if<Dense>(&layer)) {
      const std::size_t in_n = x.size();
      const std::size_t out_n = dn->units;
      const double* w = params[li].weights.data();
      double* dw = grads[li].weights.data();
      double* db = grads[li].bias.data();
      for (std::size_t o = 0; o < out_n; ++o) db[o] += delta[o];
      for (std::size_t a = 0; a < in_n; ++a) {
        const double v = x[a];
        const double* wr = w + a * out_n;
        double* dwr = dw + a * out_n;
        double acc = 0.0;
        for (std::size_t o = 0; o < out_n; ++o) {
          dwr[o] += v * delta[o];
          acc += wr[o] * delta[o];
        }
        dx[a] = acc;
      }
    }
    if (!need_input_grad) break;
    delta = std::move(dx);
  }
  return loss;
}

Prediction predict(const Model& model, const Tensor& input) {
  auto pass = forward(model, input, Mode::infer);
  Prediction p;
  p.top_index = argmax(pass.probabilities);
  p.probabilities = std::move(pass.probabilities);
  return p;
}

}  // namespace fieldlink::neuralnet
