#include "fieldlink/neuralnet/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "fieldlink/common/crypto.hpp"
#include "fieldlink/common/error.hpp"

namespace fieldlink::neuralnet {
namespace {

constexpr std::uint8_t kMagic[8] = {'F', 'L', 'D', 'C', 'N', 'N', 0, 1};

static_assert(std::endian::native == std::endian::little, "model container assumes a little-endian host");

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof v);
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <class T>
  T get(const char* what) {
    T v;
    std::memcpy(&v, take(sizeof v, what), sizeof v);
    return v;
  }

  const std::uint8_t* take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw Error(Errc::format_error, std::string("model container truncated while reading ") + what);
    }
    const auto* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> save_model(const Model& model) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put<std::uint32_t>(out, kModelFormatVersion);
  const auto spec = to_json(model.spec()).dump();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(spec.size()));
  out.insert(out.end(), spec.begin(), spec.end());
  put<std::uint64_t>(out, model.parameter_count());
  out.reserve(out.size() + model.parameter_count() * sizeof(double));
  for (const auto& p : model.parameters()) {
    for (const Tensor* t : {&p.weights, &p.bias}) {
      const auto* raw = reinterpret_cast<const std::uint8_t*>(t->data());
      out.insert(out.end(), raw, raw + t->size() * sizeof(double));
    }
  }
  return out;
}

Model load_model(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (std::memcmp(r.take(sizeof kMagic, "magic"), kMagic, sizeof kMagic) != 0) {
    throw Error(Errc::format_error, "not a model container (bad magic)");
  }
  const auto version = r.get<std::uint32_t>("format version");
  if (version != kModelFormatVersion) {
    throw Error(Errc::format_error, "unsupported model format version: expected " +
                                        std::to_string(kModelFormatVersion) + ", found " + std::to_string(version));
  }
  const auto spec_len = r.get<std::uint32_t>("spec length");
  const auto* spec_bytes = r.take(spec_len, "spec");
  NetworkSpec spec;
  try {
    spec = spec_from_json(nlohmann::json::parse(spec_bytes, spec_bytes + spec_len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::format_error, std::string("model spec is not valid JSON: ") + e.what());
  } catch (const Error& e) {
    throw Error(Errc::format_error, e.what());
  }
  const auto count = r.get<std::uint64_t>("parameter count");

  std::vector<Shape> shapes;
  try {
    shapes = layer_output_shapes(spec);
  } catch (const Error& e) {
    throw Error(Errc::format_error, e.what());
  }
  if (count != count_parameters(spec)) {
    throw Error(Errc::format_error, "parameter count " + std::to_string(count) + " does not match the stored spec");
  }
  if (r.remaining() != count * sizeof(double)) {
    throw Error(Errc::format_error, "weight payload length " + std::to_string(r.remaining()) + " bytes, expected " +
                                        std::to_string(count * sizeof(double)));
  }
  std::vector<LayerParameters> params(spec.layers.size());
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const Shape& in = i == 0 ? spec.input_shape : shapes[i - 1];
    auto [w_shape, b_shape] = parameter_shapes(spec.layers[i], in);
    if (w_shape.empty()) continue;
    for (auto [shape, target] : {std::pair{&w_shape, &params[i].weights}, std::pair{&b_shape, &params[i].bias}}) {
      Tensor t(*shape);
      std::memcpy(t.data(), r.take(t.size() * sizeof(double), "weights"), t.size() * sizeof(double));
      *target = std::move(t);
    }
  }
  return Model(std::move(spec), std::move(params));
}

void save_model_file(const Model& model, const std::filesystem::path& path) {
  const auto bytes = save_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io_error, "cannot write model file " + path.string());
}

Model load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open model file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_model(bytes);
}

std::string model_version_id(const Model& model) { return sha256_hex(save_model(model)).substr(0, 16); }

}  // namespace fieldlink::neuralnet
