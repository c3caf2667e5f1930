#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "roweisposes/geigen.hpp"

namespace roweisposes {

// Discrete-observation hidden Markov model over a pose alphabet.
struct DiscreteHmm {
  int n_states = 0;
  Vector initial;      // length n_states
  Matrix transition;   // n_states x n_states, row-stochastic
  Matrix emission;     // n_states x |alphabet|, row-stochastic
  std::vector<std::string> alphabet;

  void validate() const;  // ConfigError on invariant violations
};

struct TrainReport {
  std::vector<double> log_likelihood_trace;  // non-decreasing
  int iterations = 0;
  bool converged = false;
};

struct ViterbiResult {
  std::vector<int> path;
  double log_prob = 0.0;
};

enum class Criterion { Viterbi, Forward };

Criterion criterion_from_string(const std::string& name);  // ConfigError
std::string to_string(Criterion criterion);

// One trained model per action, all sharing one pose alphabet.
struct ActionModelBank {
  std::map<std::string, DiscreteHmm> models;
  std::vector<std::string> alphabet;

  void validate() const;
};

// Classification outcome. `rejected` marks sequences that were empty by the
// time they reached the classifier; no action is assigned then.
struct ActionDecision {
  std::optional<std::string> action;
  std::map<std::string, double> scores;
  bool rejected = false;
};

// Multi-sequence Baum-Welch with per-step scaling. The initial distribution
// is uniform; transition and emission rows start from a seeded +-10%
// perturbation of uniform and every run is deterministic given the seed.
// Iteration stops when the total log-likelihood improves by less than tol or
// after max_iter expectation-maximization updates; the reported trace is
// non-decreasing. A probability floor of 1e-6 is mixed into all rows of the
// final model (then renormalized) so that symbols unseen in training keep
// nonzero probability at inference time; the trace covers the unfloored
// iterates.
std::pair<DiscreteHmm, TrainReport> baum_welch(
    const std::vector<std::vector<std::string>>& sequences, int n_states,
    const std::vector<std::string>& alphabet, double tol, int max_iter,
    std::uint64_t seed);

// log P(seq | hmm) by the scaled forward recursion. Returns -infinity for
// sequences of probability zero.
double forward_loglik(const DiscreteHmm& hmm,
                      const std::vector<std::string>& seq);

// Maximum-probability state path in log space. Ties are broken toward the
// lower state index at every backtrack step.
ViterbiResult viterbi(const DiscreteHmm& hmm,
                      const std::vector<std::string>& seq);

// Scores every model under the chosen criterion and returns the argmax;
// ties are broken by action-label lexicographic order.
ActionDecision classify_action(const ActionModelBank& bank,
                               const std::vector<std::string>& seq,
                               Criterion criterion = Criterion::Viterbi);

}  // namespace roweisposes
