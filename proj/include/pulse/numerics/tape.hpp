#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "pulse/numerics/parameter_store.hpp"
#include "pulse/numerics/tensor.hpp"

namespace pulse::num {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  bool valid() const { return tape != nullptr; }
  std::size_t rows() const;
  std::size_t cols() const;
  std::size_t size() const { return rows() * cols(); }
  std::span<const double> value() const;
  double item() const;
  bool requires_grad() const;
};

/// Gradient seed for a non-scalar output node.
struct Seed {
  Var var;
  std::vector<double> grad;
};

/// Reverse-mode recording of one forward evaluation.
///
/// Every node is a row-major rows x cols matrix. Nodes are appended in
/// evaluation order; backward() walks them in reverse, so a node's closure
/// runs only after all of its consumers have deposited their gradients.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::uint32_t self)>;

  Tape() { nodes_.reserve(1024); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(std::size_t rows, std::size_t cols, std::vector<double> values);
  Var constant(const Tensor& t);
  /// Leaf that collects a gradient (used by grad_check and loss heads).
  Var variable(std::size_t rows, std::size_t cols, std::vector<double> values);
  /// Read-only view of a stored parameter; repeated calls return the same node.
  Var param(const ParameterStore& store, std::size_t index);
  Var param(const ParameterStore& store, std::string_view path);

  Var emit(std::size_t rows, std::size_t cols, std::vector<double> value,
           std::initializer_list<Var> inputs, Backward backward);

  std::size_t rows(std::uint32_t id) const { return nodes_[id].rows; }
  std::size_t cols(std::uint32_t id) const { return nodes_[id].cols; }
  std::span<const double> value(std::uint32_t id) const;
  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }
  /// Gradient buffer of a node, zero-allocated on first access.
  std::span<double> grad(std::uint32_t id);
  /// Same as grad() but empty when the node takes no gradient.
  std::span<double> grad_if(std::uint32_t id) {
    return nodes_[id].requires_grad ? grad(id) : std::span<double>{};
  }
  std::span<const double> grad_value(std::uint32_t id) const { return nodes_[id].grad; }

  void backward(Var scalar_root, double seed = 1.0);
  void backward(std::span<const Seed> seeds);

  /// Adds the gradients of every parameter node into `out`, scaled.
  void accumulate_into(GradientBuffer& out, const ParameterStore& store,
                       double scale = 1.0) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<double> value;
    const double* external = nullptr;
    std::vector<double> grad;
    bool requires_grad = false;
    Backward backward;
    const ParameterStore* store = nullptr;
    std::size_t param_index = 0;
  };

  Var push(Node node);
  void run_backward();

  std::vector<Node> nodes_;
  std::map<std::pair<const ParameterStore*, std::size_t>, std::uint32_t> param_nodes_;
};

}  // namespace pulse::num
