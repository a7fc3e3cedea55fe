#include "pulse/numerics/parameter_store.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pulse::num {

std::size_t ParameterStore::add(std::string path, Tensor value) {
  if (index_.contains(path)) {
    throw std::invalid_argument("duplicate parameter path: " + path);
  }
  const std::size_t i = entries_.size();
  index_.emplace(path, i);
  entries_.push_back({std::move(path), std::move(value)});
  return i;
}

std::optional<std::size_t> ParameterStore::find(std::string_view path) const {
  auto it = index_.find(std::string(path));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ParameterStore::index(std::string_view path) const {
  auto found = find(path);
  if (!found) throw std::out_of_range("unknown parameter path: " + std::string(path));
  return *found;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

std::size_t ParameterStore::scalar_count(std::string_view prefix) const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    if (std::string_view(e.path).starts_with(prefix)) n += e.value.size();
  }
  return n;
}

bool operator==(const ParameterStore& a, const ParameterStore& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    if (a.entries_[i].path != b.entries_[i].path) return false;
    if (!(a.entries_[i].value == b.entries_[i].value)) return false;
  }
  return true;
}

GradientBuffer::GradientBuffer(const ParameterStore& store) {
  slots_.reserve(store.size());
  for (const auto& e : store) slots_.emplace_back(e.value.size(), 0.0);
}

void GradientBuffer::zero() {
  for (auto& s : slots_) std::fill(s.begin(), s.end(), 0.0);
}

void GradientBuffer::add(std::size_t i, std::span<const double> values, double scale) {
  auto& slot = slots_.at(i);
  if (slot.size() != values.size()) {
    throw ShapeError("gradient slot " + std::to_string(i) + " size mismatch");
  }
  for (std::size_t k = 0; k < slot.size(); ++k) slot[k] += scale * values[k];
}

void GradientBuffer::add(const GradientBuffer& other) {
  for (std::size_t i = 0; i < slots_.size(); ++i) add(i, other.slots_[i]);
}

void GradientBuffer::scale(double factor) {
  for (auto& s : slots_)
    for (double& v : s) v *= factor;
}

double GradientBuffer::global_norm() const {
  double sq = 0.0;
  for (const auto& s : slots_)
    for (double v : s) sq += v * v;
  return std::sqrt(sq);
}

void copy_values(ParameterStore& dst, const ParameterStore& src) {
  if (dst.size() != src.size())
    throw std::invalid_argument("parameters: expected " + std::to_string(dst.size()) + " tensors, got " +
                                std::to_string(src.size()));
  for (std::size_t i = 0; i < dst.size(); ++i) {
    auto j = src.find(dst.path(i));
    if (!j) throw std::invalid_argument("parameters: missing " + dst.path(i));
    if (src.at(*j).shape() != dst.at(i).shape()) throw std::invalid_argument("parameters: shape mismatch at " + dst.path(i));
    dst.at(i).storage() = src.at(*j).storage();
  }
}

}  // namespace pulse::num
