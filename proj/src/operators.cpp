#include "npgd/operators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "npgd/rng.hpp"

namespace npgd {

std::size_t MaskSpec::kept_count() const {
  return std::count(keep.begin(), keep.end(), std::uint8_t{1});
}

MaskSpec MaskSpec::centered_square(std::size_t height, std::size_t width, std::size_t size) {
  if (size > height || size > width)
    throw std::invalid_argument("centered_square mask larger than image");
  MaskSpec m;
  m.kind = Kind::centered_square;
  m.height = height;
  m.width = width;
  m.square_size = size;
  m.keep.assign(height * width, 1);
  const std::size_t r0 = (height - size) / 2;
  const std::size_t c0 = (width - size) / 2;
  for (std::size_t r = r0; r < r0 + size; ++r)
    for (std::size_t c = c0; c < c0 + size; ++c) m.keep[r * width + c] = 0;
  return m;
}

MaskSpec MaskSpec::scattered(std::size_t height, std::size_t width, double keep_fraction,
                             std::uint64_t seed) {
  if (keep_fraction < 0.0 || keep_fraction > 1.0)
    throw std::invalid_argument("scattered mask: keep_fraction outside [0, 1]");
  MaskSpec m;
  m.kind = Kind::scattered;
  m.height = height;
  m.width = width;
  m.keep_fraction = keep_fraction;
  m.seed = seed;
  const std::size_t pixels = height * width;
  const std::size_t kept = static_cast<std::size_t>(std::llround(keep_fraction * double(pixels)));
  std::vector<std::size_t> order(pixels);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng.engine());
  m.keep.assign(pixels, 0);
  for (std::size_t i = 0; i < kept; ++i) m.keep[order[i]] = 1;
  return m;
}

LinearOperator make_dense_operator(Matrix a) {
  if (!a.all_finite()) throw std::invalid_argument("dense operator: non-finite entries");
  LinearOperator op;
  op.kind = LinearOperator::Kind::dense;
  op.m = a.rows;
  op.n = a.cols;
  op.dense = std::move(a);
  return op;
}

LinearOperator make_gaussian_operator(std::uint64_t seed, std::size_t m, std::size_t n) {
  if (m == 0 || n == 0) throw std::invalid_argument("gaussian operator: zero dimension");
  LinearOperator op;
  op.kind = LinearOperator::Kind::gaussian;
  op.m = m;
  op.n = n;
  op.seed = seed;
  op.dense = Matrix(m, n);
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(double(m));
  for (double& v : op.dense.data) v = scale * rng.normal();
  return op;
}

LinearOperator make_downsample_operator(std::size_t height, std::size_t width,
                                        std::size_t channels, std::size_t factor) {
  if (factor == 0 || height % factor != 0 || width % factor != 0)
    throw std::invalid_argument("downsample: image " + std::to_string(height) + "x" +
                                std::to_string(width) + " not divisible by factor " +
                                std::to_string(factor));
  LinearOperator op;
  op.kind = LinearOperator::Kind::downsample;
  op.height = height;
  op.width = width;
  op.channels = channels;
  op.factor = factor;
  op.n = height * width * channels;
  op.m = (height / factor) * (width / factor) * channels;
  return op;
}

LinearOperator make_inpaint_operator(std::size_t height, std::size_t width,
                                     std::size_t channels, MaskSpec mask) {
  if (mask.height != height || mask.width != width)
    throw std::invalid_argument("inpaint: mask geometry mismatch");
  LinearOperator op;
  op.kind = LinearOperator::Kind::inpaint;
  op.height = height;
  op.width = width;
  op.channels = channels;
  op.n = height * width * channels;
  op.m = mask.kept_count() * channels;
  op.mask = std::move(mask);
  return op;
}

Vec apply(const LinearOperator& op, const Vec& x) {
  if (x.size() != op.n)
    throw std::invalid_argument("apply: expected input of length " + std::to_string(op.n) +
                                ", got " + std::to_string(x.size()));
  switch (op.kind) {
    case LinearOperator::Kind::dense:
    case LinearOperator::Kind::gaussian:
      return matvec(op.dense, x);
    case LinearOperator::Kind::downsample: {
      const std::size_t f = op.factor;
      const std::size_t oh = op.height / f, ow = op.width / f;
      Vec y(op.m, 0.0);
      const double inv = 1.0 / double(f * f);
      for (std::size_t ch = 0; ch < op.channels; ++ch) {
        const std::size_t xoff = ch * op.height * op.width;
        const std::size_t yoff = ch * oh * ow;
        for (std::size_t r = 0; r < oh; ++r)
          for (std::size_t c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (std::size_t dr = 0; dr < f; ++dr)
              for (std::size_t dc = 0; dc < f; ++dc)
                acc += x[xoff + (r * f + dr) * op.width + (c * f + dc)];
            y[yoff + r * ow + c] = acc * inv;
          }
      }
      return y;
    }
    case LinearOperator::Kind::inpaint: {
      Vec y(op.m, 0.0);
      std::size_t j = 0;
      for (std::size_t ch = 0; ch < op.channels; ++ch) {
        const std::size_t xoff = ch * op.height * op.width;
        for (std::size_t p = 0; p < op.mask.keep.size(); ++p)
          if (op.mask.keep[p]) y[j++] = x[xoff + p];
      }
      return y;
    }
  }
  throw std::logic_error("apply: bad operator kind");
}

Vec adjoint(const LinearOperator& op, const Vec& y) {
  if (y.size() != op.m)
    throw std::invalid_argument("adjoint: expected input of length " + std::to_string(op.m) +
                                ", got " + std::to_string(y.size()));
  switch (op.kind) {
    case LinearOperator::Kind::dense:
    case LinearOperator::Kind::gaussian:
      return matvec_transpose(op.dense, y);
    case LinearOperator::Kind::downsample: {
      const std::size_t f = op.factor;
      const std::size_t oh = op.height / f, ow = op.width / f;
      Vec x(op.n, 0.0);
      const double inv = 1.0 / double(f * f);
      for (std::size_t ch = 0; ch < op.channels; ++ch) {
        const std::size_t xoff = ch * op.height * op.width;
        const std::size_t yoff = ch * oh * ow;
        for (std::size_t r = 0; r < oh; ++r)
          for (std::size_t c = 0; c < ow; ++c) {
            const double v = y[yoff + r * ow + c] * inv;
            for (std::size_t dr = 0; dr < f; ++dr)
              for (std::size_t dc = 0; dc < f; ++dc)
                x[xoff + (r * f + dr) * op.width + (c * f + dc)] = v;
          }
      }
      return x;
    }
    case LinearOperator::Kind::inpaint: {
      Vec x(op.n, 0.0);
      std::size_t j = 0;
      for (std::size_t ch = 0; ch < op.channels; ++ch) {
        const std::size_t xoff = ch * op.height * op.width;
        for (std::size_t p = 0; p < op.mask.keep.size(); ++p)
          if (op.mask.keep[p]) x[xoff + p] = y[j++];
      }
      return x;
    }
  }
  throw std::logic_error("adjoint: bad operator kind");
}

Vec add_noise(const Vec& y, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("add_noise: sigma must be >= 0");
  if (sigma == 0.0) return y;
  Rng rng(seed);
  Vec out(y);
  for (double& v : out) v += sigma * rng.normal();
  return out;
}

std::string operator_to_json(const LinearOperator& op) {
  nlohmann::json doc;
  doc["m"] = op.m;
  doc["n"] = op.n;
  switch (op.kind) {
    case LinearOperator::Kind::dense:
      doc["kind"] = "dense";
      doc["matrix"] = op.dense.data;
      break;
    case LinearOperator::Kind::gaussian:
      doc["kind"] = "gaussian";
      doc["seed"] = op.seed;
      break;
    case LinearOperator::Kind::downsample:
      doc["kind"] = "downsample";
      doc["height"] = op.height;
      doc["width"] = op.width;
      doc["channels"] = op.channels;
      doc["factor"] = op.factor;
      break;
    case LinearOperator::Kind::inpaint: {
      doc["kind"] = "inpaint";
      doc["height"] = op.height;
      doc["width"] = op.width;
      doc["channels"] = op.channels;
      nlohmann::json jm;
      jm["kind"] = op.mask.kind == MaskSpec::Kind::centered_square ? "centered_square" : "scattered";
      jm["height"] = op.mask.height;
      jm["width"] = op.mask.width;
      if (op.mask.kind == MaskSpec::Kind::centered_square) {
        jm["size"] = op.mask.square_size;
      } else {
        jm["keep_fraction"] = op.mask.keep_fraction;
        jm["seed"] = op.mask.seed;
      }
      jm["keep"] = op.mask.keep;
      doc["mask"] = std::move(jm);
      break;
    }
  }
  return doc.dump();
}

LinearOperator operator_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "dense") {
    Matrix a(doc.at("m").get<std::size_t>(), doc.at("n").get<std::size_t>());
    a.data = doc.at("matrix").get<std::vector<double>>();
    if (a.data.size() != a.rows * a.cols)
      throw std::invalid_argument("dense operator json: matrix length != m*n");
    return make_dense_operator(std::move(a));
  }
  if (kind == "gaussian")
    return make_gaussian_operator(doc.at("seed").get<std::uint64_t>(),
                                  doc.at("m").get<std::size_t>(),
                                  doc.at("n").get<std::size_t>());
  if (kind == "downsample")
    return make_downsample_operator(doc.at("height").get<std::size_t>(),
                                    doc.at("width").get<std::size_t>(),
                                    doc.at("channels").get<std::size_t>(),
                                    doc.at("factor").get<std::size_t>());
  if (kind == "inpaint") {
    const auto& jm = doc.at("mask");
    MaskSpec mask;
    mask.height = jm.at("height").get<std::size_t>();
    mask.width = jm.at("width").get<std::size_t>();
    const std::string mkind = jm.at("kind").get<std::string>();
    if (mkind == "centered_square") {
      mask.kind = MaskSpec::Kind::centered_square;
      mask.square_size = jm.at("size").get<std::size_t>();
    } else if (mkind == "scattered") {
      mask.kind = MaskSpec::Kind::scattered;
      mask.keep_fraction = jm.at("keep_fraction").get<double>();
      mask.seed = jm.at("seed").get<std::uint64_t>();
    } else {
      throw std::invalid_argument("unknown mask kind: " + mkind);
    }
    mask.keep = jm.at("keep").get<std::vector<std::uint8_t>>();
    if (mask.keep.size() != mask.height * mask.width)
      throw std::invalid_argument("inpaint json: keep map length != height*width");
    return make_inpaint_operator(doc.at("height").get<std::size_t>(),
                                 doc.at("width").get<std::size_t>(),
                                 doc.at("channels").get<std::size_t>(), std::move(mask));
  }
  throw std::invalid_argument("unknown operator kind: " + kind);
}

void save_operator(const LinearOperator& op, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << operator_to_json(op);
}

LinearOperator load_operator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return operator_from_json(text);
}

}  // namespace npgd
