#pragma once

#include <cstddef>
#include <new>
#include <numeric>
#include <string>
#include <vector>

namespace glyphsmith {

/// Cache-line aligned storage. Vectorized kernels peel differently for
/// different start alignments, which changes summation order; a fixed
/// alignment keeps results independent of where the heap put a buffer.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, alignment); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

using Buffer = std::vector<double, AlignedAllocator<double>>;

/// Dense row-major array of doubles.
struct Tensor {
  std::vector<std::size_t> shape;
  Buffer data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s, double fill = 0.0)
      : shape(std::move(s)), data(count(shape), fill) {}
  Tensor(std::vector<std::size_t> s, const std::vector<double>& values);

  static std::size_t count(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t numel() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }
  Tensor reshaped(std::vector<std::size_t> s) const;
  std::string shape_string() const;
  bool operator==(const Tensor&) const = default;
};

/// Throws ShapeError unless `t` has exactly `expected` as its shape.
void require_shape(const Tensor& t, const std::vector<std::size_t>& expected, const char* what);

}  // namespace glyphsmith
