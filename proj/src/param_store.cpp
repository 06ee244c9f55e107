#include "mssl/param_store.hpp"

#include <algorithm>
#include <stdexcept>

namespace mssl {

std::size_t ParamStore::add(std::string name, Tensor value) {
  if (find(name)) throw std::invalid_argument("param store: duplicate name " + name);
  params_.push_back({std::move(name), std::move(value)});
  return params_.size() - 1;
}

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::optional<std::size_t> ParamStore::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return std::nullopt;
}

Tensor& ParamStore::at(const std::string& name) {
  auto i = find(name);
  if (!i) throw std::out_of_range("param store: no parameter " + name);
  return params_[*i].value;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto i = find(name);
  if (!i) throw std::out_of_range("param store: no parameter " + name);
  return params_[*i].value;
}

std::vector<double> ParamStore::flatten() const {
  std::vector<double> flat;
  flat.reserve(num_scalars());
  for (const auto& p : params_) {
    flat.insert(flat.end(), p.value.storage().begin(), p.value.storage().end());
  }
  return flat;
}

void ParamStore::unflatten(std::span<const double> flat) {
  if (flat.size() != num_scalars()) {
    throw DimensionError("param store: flat vector has " + std::to_string(flat.size()) +
                         " entries, expected " + std::to_string(num_scalars()));
  }
  std::size_t pos = 0;
  for (auto& p : params_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), p.value.size(),
                p.value.storage().begin());
    pos += p.value.size();
  }
}

std::size_t ParamStore::offset(std::size_t i) const {
  std::size_t pos = 0;
  for (std::size_t j = 0; j < i; ++j) pos += params_[j].value.size();
  return pos;
}

}  // namespace mssl
