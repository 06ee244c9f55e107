#pragma once

#include <span>
#include <vector>

namespace mssl {

/// Softmax over (l_1, ..., l_k, 0): the k real-class logits plus the pinned
/// fake logit. Returns k+1 probabilities, the last being p(y = k+1 | x).
std::vector<double> softmax_with_fake(std::span<const double> logits);

/// Softmax over the k real classes only, i.e. p(y | x, y <= k).
std::vector<double> softmax(std::span<const double> logits);

double logsumexp(std::span<const double> values);

/// Shannon entropy in nats; 0 log 0 = 0.
double entropy(std::span<const double> probs);

}  // namespace mssl
