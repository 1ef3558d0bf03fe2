#include "glyphsmith/tensor.hpp"

#include "glyphsmith/error.hpp"

namespace glyphsmith {

Tensor::Tensor(std::vector<std::size_t> s, const std::vector<double>& values)
    : shape(std::move(s)), data(values.begin(), values.end()) {
  if (data.size() != count(shape)) {
    throw ShapeError("tensor " + shape_string() + " given " + std::to_string(data.size()) + " values");
  }
}

Tensor Tensor::reshaped(std::vector<std::size_t> s) const {
  if (count(s) != numel()) throw ShapeError("cannot reshape " + shape_string());
  Tensor out = *this;
  out.shape = std::move(s);
  return out;
}

std::string Tensor::shape_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

void require_shape(const Tensor& t, const std::vector<std::size_t>& expected, const char* what) {
  if (t.shape != expected) {
    throw ShapeError(std::string(what) + ": expected " + Tensor(expected).shape_string() + ", got " + t.shape_string());
  }
}

}  // namespace glyphsmith
