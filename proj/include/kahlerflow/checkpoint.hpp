#pragma once
#include <optional>
#include <string>

#include "kahlerflow/continuous_flow.hpp"
#include "kahlerflow/discrete_flow.hpp"

namespace kahlerflow {

// JSON checkpoint: {kind, K, d, base, layers:[{parity, s_net, t_net}]} for
// discrete stacks, {kind, d, base, rk4_steps, net} for continuous ones;
// subnet linears carry A/B weight matrices (row-major) and bias_re/bias_im.
// An optional "standardize" block records the training normalization.
struct Checkpoint {
  std::string kind;  // "discrete" | "continuous"
  FlowStack stack;
  VelocityNet net;
  int rk4_steps = kDefaultRk4Steps;
  std::optional<Standardization> standardize;
};

void save_checkpoint(const std::string& path, const FlowStack& stack,
                     const std::optional<Standardization>& standardize = std::nullopt);
void save_checkpoint(const std::string& path, const VelocityNet& net, int rk4_steps,
                     const std::optional<Standardization>& standardize = std::nullopt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace kahlerflow
