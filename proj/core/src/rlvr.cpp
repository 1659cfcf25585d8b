#include "ferkit/rlvr.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "ferkit/errors.hpp"
#include "ferkit/extraction.hpp"
#include "ferkit/rng.hpp"

namespace ferkit {
namespace {

using ordered_json = nlohmann::ordered_json;

void check_same_shape(const ToyPolicy& a, const ToyPolicy& b) {
  if (a.length() != b.length() || a.vocab() != b.vocab()) {
    throw ShapeMismatch("policies differ in length or vocabulary");
  }
}

void check_group(const ToyPolicy& policy, const RolloutGroup& group) {
  if (group.size() < 2) throw GroupTooSmall("rollout group needs at least 2 responses");
  if (group.rewards.size() != group.size() || group.advantages.size() != group.size() ||
      group.old_logprobs.size() != group.size()) {
    throw ShapeMismatch("rollout group arrays disagree in size");
  }
  check_same_shape(policy, group.old_policy);
}

}  // namespace

std::string RewardBreakdown::to_json() const {
  ordered_json doc;
  doc["acc"] = acc;
  doc["format"] = format;
  doc["total"] = total;
  return doc.dump();
}

RewardBreakdown reward(std::string_view response_text, EmotionLabel gt,
                       std::span<const EmotionLabel> candidates) {
  RewardBreakdown r;

  // Accuracy is judged on the tagged channel only; free-text mentions earn
  // nothing at training time.
  if (const auto answer = extract_tagged(response_text, "answer")) {
    if (parse_label(*answer, candidates) == gt) r.acc = 1;
  }

  const auto think = extract_tagged_span(response_text, "think");
  const auto answer = extract_tagged_span(response_text, "answer");
  if (think && answer && answer->first > think->second) r.format = 1;

  r.total = r.acc + r.format;
  return r;
}

ToyPolicy::ToyPolicy(std::size_t length, std::size_t vocab)
    : length_(length), vocab_(vocab), logits_(length * vocab, 0.0) {}

double& ToyPolicy::logit(std::size_t pos, std::size_t token) {
  return logits_[pos * vocab_ + token];
}

double ToyPolicy::logit(std::size_t pos, std::size_t token) const {
  return logits_[pos * vocab_ + token];
}

std::vector<double> ToyPolicy::position_log_probs(std::size_t pos) const {
  std::vector<double> out(vocab_);
  const double* row = logits_.data() + pos * vocab_;
  double max = row[0];
  for (std::size_t v = 1; v < vocab_; ++v) max = std::max(max, row[v]);
  double sum = 0.0;
  for (std::size_t v = 0; v < vocab_; ++v) sum += std::exp(row[v] - max);
  const double log_z = max + std::log(sum);
  for (std::size_t v = 0; v < vocab_; ++v) out[v] = row[v] - log_z;
  return out;
}

std::vector<double> ToyPolicy::position_probs(std::size_t pos) const {
  std::vector<double> out = position_log_probs(pos);
  for (double& x : out) x = std::exp(x);
  return out;
}

double ToyPolicy::sequence_logprob(std::span<const std::size_t> tokens) const {
  if (tokens.size() != length_) throw ShapeMismatch("token sequence length != policy length");
  double sum = 0.0;
  for (std::size_t pos = 0; pos < length_; ++pos) {
    if (tokens[pos] >= vocab_) throw TokenOutOfVocab("token id exceeds vocabulary");
    sum += position_log_probs(pos)[tokens[pos]];
  }
  return sum;
}

ToyPolicy ToyPolicy::random(std::size_t length, std::size_t vocab, std::uint64_t seed,
                            double logit_scale) {
  ToyPolicy policy(length, vocab);
  Rng rng(seed);
  for (double& x : policy.logits_) x = rng.uniform(-logit_scale, logit_scale);
  return policy;
}

std::vector<double> group_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) throw GroupTooSmall("advantage normalization needs >= 2 rewards");
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;  // population variance
  const double std_dev = std::sqrt(var);
  std::vector<double> out(rewards.size(), 0.0);
  if (std_dev < 1e-8) return out;  // uniform-reward group carries no signal
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / std_dev;
  return out;
}

double sft_nll(const ToyPolicy& policy, std::span<const std::size_t> target) {
  return -policy.sequence_logprob(target);
}

std::vector<double> sft_nll_gradient(const ToyPolicy& policy,
                                     std::span<const std::size_t> target) {
  if (target.size() != policy.length()) {
    throw ShapeMismatch("target length != policy length");
  }
  std::vector<double> grad(policy.length() * policy.vocab(), 0.0);
  for (std::size_t pos = 0; pos < policy.length(); ++pos) {
    if (target[pos] >= policy.vocab()) throw TokenOutOfVocab("token id exceeds vocabulary");
    const std::vector<double> p = policy.position_probs(pos);
    for (std::size_t v = 0; v < policy.vocab(); ++v) {
      grad[pos * policy.vocab() + v] = p[v] - (v == target[pos] ? 1.0 : 0.0);
    }
  }
  return grad;
}

double policy_kl(const ToyPolicy& policy, const ToyPolicy& old_policy) {
  check_same_shape(policy, old_policy);
  double kl = 0.0;
  for (std::size_t pos = 0; pos < policy.length(); ++pos) {
    const std::vector<double> lp = policy.position_log_probs(pos);
    const std::vector<double> lq = old_policy.position_log_probs(pos);
    for (std::size_t v = 0; v < policy.vocab(); ++v) {
      kl += std::exp(lp[v]) * (lp[v] - lq[v]);
    }
  }
  return kl;
}

double grpo_objective(const ToyPolicy& policy, const RolloutGroup& group, const GrpoConfig& cfg) {
  check_group(policy, group);
  const double g = static_cast<double>(group.size());
  double surrogate = 0.0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const double rho = std::exp(policy.sequence_logprob(group.responses[i]) -
                                group.old_logprobs[i]);
    const double clipped = std::clamp(rho, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon);
    surrogate += std::min(rho * group.advantages[i], clipped * group.advantages[i]);
  }
  return surrogate / g - cfg.beta * policy_kl(policy, group.old_policy);
}

std::vector<double> grpo_gradient(const ToyPolicy& policy, const RolloutGroup& group,
                                  const GrpoConfig& cfg) {
  check_group(policy, group);
  const std::size_t length = policy.length();
  const std::size_t vocab = policy.vocab();
  const double g = static_cast<double>(group.size());
  std::vector<double> grad(length * vocab, 0.0);

  // Per-position probabilities are shared by every response term.
  std::vector<std::vector<double>> log_p(length), log_q(length), p(length);
  for (std::size_t pos = 0; pos < length; ++pos) {
    log_p[pos] = policy.position_log_probs(pos);
    log_q[pos] = group.old_policy.position_log_probs(pos);
    p[pos].resize(vocab);
    for (std::size_t v = 0; v < vocab; ++v) p[pos][v] = std::exp(log_p[pos][v]);
  }

  for (std::size_t i = 0; i < group.size(); ++i) {
    const double rho = std::exp(policy.sequence_logprob(group.responses[i]) -
                                group.old_logprobs[i]);
    const double a = group.advantages[i];
    const double clipped = std::clamp(rho, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon);
    // When the clipped term is strictly smaller the response sits in the
    // saturated region and contributes nothing; ties take the unclipped
    // branch.
    if (rho * a > clipped * a) continue;
    const double coef = rho * a / g;
    for (std::size_t pos = 0; pos < length; ++pos) {
      const std::size_t token = group.responses[i][pos];
      grad[pos * vocab + token] += coef;
      for (std::size_t v = 0; v < vocab; ++v) grad[pos * vocab + v] -= coef * p[pos][v];
    }
  }

  if (cfg.beta != 0.0) {
    for (std::size_t pos = 0; pos < length; ++pos) {
      double kl_pos = 0.0;
      for (std::size_t v = 0; v < vocab; ++v) {
        kl_pos += p[pos][v] * (log_p[pos][v] - log_q[pos][v]);
      }
      for (std::size_t v = 0; v < vocab; ++v) {
        grad[pos * vocab + v] -=
            cfg.beta * p[pos][v] * ((log_p[pos][v] - log_q[pos][v]) - kl_pos);
      }
    }
  }
  return grad;
}

RolloutGroup toy_rollout(const ToyPolicy& policy, std::uint64_t prompt_id, std::size_t g,
                         std::uint64_t rng_seed) {
  if (g < 2) throw GroupTooSmall("rollout group needs at least 2 responses");
  RolloutGroup group;
  group.old_policy = policy;
  Rng rng(rng_seed ^ splitmix64(prompt_id + 0x632be59bd9b4e019ULL));
  for (std::size_t i = 0; i < g; ++i) {
    std::vector<std::size_t> tokens(policy.length());
    for (std::size_t pos = 0; pos < policy.length(); ++pos) {
      const std::vector<double> probs = policy.position_probs(pos);
      const double x = rng.next_double();
      double acc = 0.0;
      std::size_t token = policy.vocab() - 1;  // rounding guard
      for (std::size_t v = 0; v < policy.vocab(); ++v) {
        acc += probs[v];
        if (x < acc) {
          token = v;
          break;
        }
      }
      tokens[pos] = token;
    }
    group.old_logprobs.push_back(policy.sequence_logprob(tokens));
    group.responses.push_back(std::move(tokens));
  }
  group.rewards.assign(g, 0.0);
  group.advantages.assign(g, 0.0);
  return group;
}

std::string GradCheckReport::to_json() const {
  ordered_json doc;
  doc["instances"] = instances;
  doc["max_rel_err_grpo"] = max_rel_err_grpo;
  doc["max_rel_err_sft"] = max_rel_err_sft;
  doc["tolerance"] = tolerance;
  doc["pass"] = pass;
  return doc.dump(2);
}

GradCheckReport check_gradients(std::size_t instances, std::uint64_t seed) {
  constexpr double kStep = 1e-5;
  constexpr double kKinkWindow = 1e-3;
  GradCheckReport report;
  report.instances = instances;

  Rng rng(seed);
  const auto rel_err = [](double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
  };

  for (std::size_t inst = 0; inst < instances; ++inst) {
    const std::size_t vocab = 2 + rng.uniform_index(9);   // 2..10
    const std::size_t length = 1 + rng.uniform_index(5);  // 1..5
    const std::size_t g = 2 + rng.uniform_index(7);       // 2..8

    GrpoConfig cfg;
    cfg.epsilon = 0.2;
    const double betas[] = {0.0, 0.04, 0.1};
    cfg.beta = betas[rng.uniform_index(3)];
    cfg.group_size = g;

    const ToyPolicy old_policy = ToyPolicy::random(length, vocab, rng.next_u64(), 1.5);
    RolloutGroup group = toy_rollout(old_policy, inst, g, rng.next_u64());

    // Degenerate reward draws carry zero advantages and test nothing.
    for (int tries = 0; tries < 64; ++tries) {
      for (double& r : group.rewards) r = static_cast<double>(rng.uniform_index(3));
      group.advantages = group_advantages(group.rewards);
      bool live = false;
      for (double a : group.advantages) live = live || a != 0.0;
      if (live) break;
    }

    // The surrogate is only piecewise-smooth: re-draw perturbations that put
    // any ratio within the window around a clip kink, where central
    // differences straddle two branches.
    ToyPolicy policy = old_policy;
    for (int tries = 0; tries < 256; ++tries) {
      const ToyPolicy noise = ToyPolicy::random(length, vocab, rng.next_u64(), 0.25);
      policy = old_policy;
      for (std::size_t j = 0; j < policy.logits().size(); ++j) {
        policy.logits()[j] += noise.logits()[j];
      }
      bool near_kink = false;
      for (std::size_t i = 0; i < group.size(); ++i) {
        const double rho = std::exp(policy.sequence_logprob(group.responses[i]) -
                                    group.old_logprobs[i]);
        near_kink = near_kink || std::abs(rho - (1.0 - cfg.epsilon)) < kKinkWindow ||
                    std::abs(rho - (1.0 + cfg.epsilon)) < kKinkWindow;
      }
      if (!near_kink) break;
    }

    const std::vector<double> analytic = grpo_gradient(policy, group, cfg);
    for (std::size_t j = 0; j < analytic.size(); ++j) {
      const double saved = policy.logits()[j];
      policy.logits()[j] = saved + kStep;
      const double up = grpo_objective(policy, group, cfg);
      policy.logits()[j] = saved - kStep;
      const double down = grpo_objective(policy, group, cfg);
      policy.logits()[j] = saved;
      const double fd = (up - down) / (2.0 * kStep);
      report.max_rel_err_grpo = std::max(report.max_rel_err_grpo, rel_err(analytic[j], fd));
    }

    std::vector<std::size_t> target(length);
    for (std::size_t pos = 0; pos < length; ++pos) target[pos] = rng.uniform_index(vocab);
    const std::vector<double> sft_grad = sft_nll_gradient(policy, target);
    for (std::size_t j = 0; j < sft_grad.size(); ++j) {
      const double saved = policy.logits()[j];
      policy.logits()[j] = saved + kStep;
      const double up = sft_nll(policy, target);
      policy.logits()[j] = saved - kStep;
      const double down = sft_nll(policy, target);
      policy.logits()[j] = saved;
      const double fd = (up - down) / (2.0 * kStep);
      report.max_rel_err_sft = std::max(report.max_rel_err_sft, rel_err(sft_grad[j], fd));
    }
  }

  report.pass = report.max_rel_err_grpo <= report.tolerance &&
                report.max_rel_err_sft <= report.tolerance;
  return report;
}

}  // namespace ferkit
