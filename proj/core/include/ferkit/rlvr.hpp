#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ferkit/labels.hpp"

namespace ferkit {

// Rule-verified reward: accuracy judged only on the tagged channel, format
// judged on the full tag protocol. Each part is 0 or 1.
struct RewardBreakdown {
  int acc = 0;
  int format = 0;
  int total = 0;

  std::string to_json() const;
};

// acc=1 iff the last answer tag's content parses to gt; format=1 iff the
// text contains a well-formed think pair followed by a well-formed answer
// pair. Total over arbitrary byte strings.
RewardBreakdown reward(std::string_view response_text, EmotionLabel gt,
                       std::span<const EmotionLabel> candidates);

// Per-position categorical policy over a small vocabulary; position j's
// distribution is softmax(logits row j). Sequence log-probability is the sum
// of per-position token log-probabilities.
class ToyPolicy {
 public:
  ToyPolicy() = default;
  ToyPolicy(std::size_t length, std::size_t vocab);  // zero logits = uniform

  std::size_t length() const { return length_; }
  std::size_t vocab() const { return vocab_; }

  double& logit(std::size_t pos, std::size_t token);
  double logit(std::size_t pos, std::size_t token) const;
  std::span<double> logits() { return logits_; }
  std::span<const double> logits() const { return logits_; }

  // Row results are freshly computed; no caching, so mutation is always safe.
  std::vector<double> position_probs(std::size_t pos) const;
  std::vector<double> position_log_probs(std::size_t pos) const;

  // Throws ShapeMismatch on wrong length, TokenOutOfVocab on bad tokens.
  double sequence_logprob(std::span<const std::size_t> tokens) const;

  static ToyPolicy random(std::size_t length, std::size_t vocab, std::uint64_t seed,
                          double logit_scale = 1.0);

 private:
  std::size_t length_ = 0;
  std::size_t vocab_ = 0;
  std::vector<double> logits_;  // length * vocab, row-major
};

// G sampled responses for one prompt. old_policy is the snapshot that
// generated them; the exact KL term needs its full per-position
// distributions, not just the sequence log-probabilities.
struct RolloutGroup {
  std::vector<std::vector<std::size_t>> responses;
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<double> old_logprobs;
  ToyPolicy old_policy;

  std::size_t size() const { return responses.size(); }
};

struct GrpoConfig {
  double epsilon = 0.2;
  double beta = 0.04;
  std::size_t group_size = 8;
};

// (R_i - mean) / population std; all zeros when std < 1e-8.
// Throws GroupTooSmall below 2 rewards.
std::vector<double> group_advantages(std::span<const double> rewards);

// Teacher-forced negative log-likelihood of the target sequence.
double sft_nll(const ToyPolicy& policy, std::span<const std::size_t> target);

// d(sft_nll)/d(logits), same layout as policy.logits().
std::vector<double> sft_nll_gradient(const ToyPolicy& policy, std::span<const std::size_t> target);

// (1/G) sum_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i) - beta * KL,
// rho_i from whole-sequence log-probabilities, KL summed exactly over the
// per-position categorical distributions of policy vs group.old_policy.
double grpo_objective(const ToyPolicy& policy, const RolloutGroup& group, const GrpoConfig& cfg);

// Exact analytic gradient of grpo_objective w.r.t. all logits.
std::vector<double> grpo_gradient(const ToyPolicy& policy, const RolloutGroup& group,
                                  const GrpoConfig& cfg);

// Sum over positions of KL(policy_pos || old_pos). Non-negative; zero iff
// the per-position distributions coincide.
double policy_kl(const ToyPolicy& policy, const ToyPolicy& old_policy);

// G seeded draws from the policy with stored old_logprobs; rewards and
// advantages are zero-filled until scoring. Bit-identical under equal seeds.
RolloutGroup toy_rollout(const ToyPolicy& policy, std::uint64_t prompt_id, std::size_t g,
                         std::uint64_t rng_seed);

struct GradCheckCase {
  double max_rel_err_grpo = 0.0;
  double max_rel_err_sft = 0.0;
};

struct GradCheckReport {
  std::size_t instances = 0;
  double max_rel_err_grpo = 0.0;
  double max_rel_err_sft = 0.0;
  double tolerance = 1e-6;
  bool pass = false;

  std::string to_json() const;
};

// Central finite differences (step 1e-5) against the analytic gradients on
// random small instances. Instances whose ratios sit within 1e-3 of a clip
// kink are re-drawn; the subgradient there is one-sided by construction.
GradCheckReport check_gradients(std::size_t instances, std::uint64_t seed);

}  // namespace ferkit
