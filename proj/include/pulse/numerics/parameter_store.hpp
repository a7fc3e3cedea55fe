#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pulse/numerics/tensor.hpp"

namespace pulse::num {

/// Named, ordered collection of learnable tensors.
///
/// Iteration follows registration order, so two stores built by the same
/// sequence of `add` calls are laid out identically.
class ParameterStore {
 public:
  struct Entry {
    std::string path;
    Tensor value;
  };

  std::size_t add(std::string path, Tensor value);

  std::optional<std::size_t> find(std::string_view path) const;
  std::size_t index(std::string_view path) const;

  Tensor& at(std::size_t i) { return entries_[i].value; }
  const Tensor& at(std::size_t i) const { return entries_[i].value; }
  Tensor& operator[](std::string_view path) { return at(index(path)); }
  const Tensor& operator[](std::string_view path) const { return at(index(path)); }
  const std::string& path(std::size_t i) const { return entries_[i].path; }

  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;
  /// Number of scalars whose path starts with `prefix`.
  std::size_t scalar_count(std::string_view prefix) const;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const ParameterStore& a, const ParameterStore& b);

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Copies values from `src` into `dst`. Both stores must hold the same
/// paths with the same shapes, in any order; throws std::invalid_argument.
void copy_values(ParameterStore& dst, const ParameterStore& src);

/// Gradient accumulator aligned slot-for-slot with a ParameterStore.
class GradientBuffer {
 public:
  GradientBuffer() = default;
  explicit GradientBuffer(const ParameterStore& store);

  std::size_t size() const { return slots_.size(); }
  std::span<double> operator[](std::size_t i) { return slots_[i]; }
  std::span<const double> operator[](std::size_t i) const { return slots_[i]; }

  void zero();
  void add(std::size_t i, std::span<const double> values, double scale = 1.0);
  void add(const GradientBuffer& other);
  void scale(double factor);
  double global_norm() const;

 private:
  std::vector<std::vector<double>> slots_;
};

}  // namespace pulse::num
