#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mssl/tensor.hpp"

namespace mssl {

struct Param {
  std::string name;
  Tensor value;
};

/// Ordered collection of named parameter tensors with a flat-vector view. The
/// flat order is insertion order, row-major within each tensor.
class ParamStore {
 public:
  std::size_t add(std::string name, Tensor value);

  std::size_t size() const { return params_.size(); }
  std::size_t num_scalars() const;
  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  std::optional<std::size_t> find(const std::string& name) const;
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);
  /// Offset of parameter i inside the flat vector.
  std::size_t offset(std::size_t i) const;

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  friend bool operator==(const ParamStore& a, const ParamStore& b) {
    if (a.params_.size() != b.params_.size()) return false;
    for (std::size_t i = 0; i < a.params_.size(); ++i) {
      if (a.params_[i].name != b.params_[i].name || !(a.params_[i].value == b.params_[i].value)) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<Param> params_;
};

}  // namespace mssl
