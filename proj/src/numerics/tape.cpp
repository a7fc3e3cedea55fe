#include "pulse/numerics/tape.hpp"

namespace pulse::num {

std::size_t Var::rows() const { return tape->rows(id); }
std::size_t Var::cols() const { return tape->cols(id); }
std::span<const double> Var::value() const { return tape->value(id); }
bool Var::requires_grad() const { return tape->requires_grad(id); }

double Var::item() const {
  auto v = value();
  if (v.size() != 1) throw ShapeError("item() on a non-scalar node");
  return v[0];
}

Var Tape::push(Node node) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(std::move(node));
  return Var{this, id};
}

Var Tape::constant(std::size_t rows, std::size_t cols, std::vector<double> values) {
  if (rows * cols != values.size()) throw ShapeError("constant: shape/value count mismatch");
  Node n;
  n.rows = static_cast<std::uint32_t>(rows);
  n.cols = static_cast<std::uint32_t>(cols);
  n.value = std::move(values);
  return push(std::move(n));
}

Var Tape::constant(const Tensor& t) { return constant(t.rows(), t.cols(), t.storage()); }

Var Tape::variable(std::size_t rows, std::size_t cols, std::vector<double> values) {
  Var v = constant(rows, cols, std::move(values));
  nodes_[v.id].requires_grad = true;
  return v;
}

Var Tape::param(const ParameterStore& store, std::size_t index) {
  auto key = std::make_pair(&store, index);
  if (auto it = param_nodes_.find(key); it != param_nodes_.end()) return Var{this, it->second};
  const Tensor& t = store.at(index);
  Node n;
  n.rows = static_cast<std::uint32_t>(t.rows());
  n.cols = static_cast<std::uint32_t>(t.cols());
  n.external = t.data().data();
  n.requires_grad = true;
  n.store = &store;
  n.param_index = index;
  Var v = push(std::move(n));
  param_nodes_.emplace(key, v.id);
  return v;
}

Var Tape::param(const ParameterStore& store, std::string_view path) {
  return param(store, store.index(path));
}

Var Tape::emit(std::size_t rows, std::size_t cols, std::vector<double> value,
               std::initializer_list<Var> inputs, Backward backward) {
  if (rows * cols != value.size()) throw ShapeError("emit: shape/value count mismatch");
  Node n;
  n.rows = static_cast<std::uint32_t>(rows);
  n.cols = static_cast<std::uint32_t>(cols);
  n.value = std::move(value);
  for (const Var& in : inputs) {
    if (in.tape != this) throw std::logic_error("emit: input belongs to another tape");
    n.requires_grad = n.requires_grad || nodes_[in.id].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

std::span<const double> Tape::value(std::uint32_t id) const {
  const Node& n = nodes_[id];
  if (n.external) return {n.external, static_cast<std::size_t>(n.rows) * n.cols};
  return n.value;
}

std::span<double> Tape::grad(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(static_cast<std::size_t>(n.rows) * n.cols, 0.0);
  return n.grad;
}

void Tape::backward(Var scalar_root, double seed) {
  if (scalar_root.size() != 1) throw ShapeError("backward: root must be a scalar");
  grad(scalar_root.id)[0] += seed;
  run_backward();
}

void Tape::backward(std::span<const Seed> seeds) {
  for (const Seed& s : seeds) {
    auto g = grad(s.var.id);
    if (g.size() != s.grad.size()) throw ShapeError("backward: seed size mismatch");
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s.grad[i];
  }
  run_backward();
}

void Tape::run_backward() {
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    n.backward(*this, static_cast<std::uint32_t>(i));
  }
}

void Tape::accumulate_into(GradientBuffer& out, const ParameterStore& store, double scale) const {
  for (const Node& n : nodes_) {
    if (n.store != &store || n.grad.empty()) continue;
    out.add(n.param_index, n.grad, scale);
  }
}

}  // namespace pulse::num
