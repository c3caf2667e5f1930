#include "roweisposes/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace roweisposes {

namespace {

constexpr double kRowSumTol = 1e-9;
constexpr double kSmoothing = 1e-6;
const double kNegInf = -std::numeric_limits<double>::infinity();

std::map<std::string, int> symbol_index(
    const std::vector<std::string>& alphabet) {
  std::map<std::string, int> idx;
  for (size_t k = 0; k < alphabet.size(); ++k) {
    idx[alphabet[k]] = static_cast<int>(k);
  }
  return idx;
}

std::vector<int> encode(const std::vector<std::string>& seq,
                        const std::map<std::string, int>& idx) {
  std::vector<int> out;
  out.reserve(seq.size());
  for (const auto& s : seq) {
    const auto it = idx.find(s);
    if (it == idx.end()) {
      throw DataError("symbol '" + s + "' is not in the pose alphabet");
    }
    out.push_back(it->second);
  }
  return out;
}

void check_stochastic_row(const Vector& row, const char* what) {
  if (row.minCoeff() < 0.0) {
    throw ConfigError(std::string(what) + " row has a negative entry");
  }
  if (std::abs(row.sum() - 1.0) > kRowSumTol) {
    throw ConfigError(std::string(what) + " row does not sum to 1");
  }
}

// Expected-count accumulators for one Baum-Welch pass.
struct Accumulators {
  Vector initial;    // sum of gamma_0 over sequences
  Matrix trans_num;  // sum over t of xi_t
  Matrix emit_num;   // per-symbol occupancy
  Accumulators(int n, int k)
      : initial(Vector::Zero(n)),
        trans_num(Matrix::Zero(n, n)),
        emit_num(Matrix::Zero(n, k)) {}
};

// Scaled forward pass. Returns the per-step normalizers; a zero normalizer
// means the sequence has probability zero under the model.
bool scaled_forward(const DiscreteHmm& hmm, const std::vector<int>& obs,
                    Matrix& alpha, Vector& norms) {
  const int n = hmm.n_states;
  const int T = static_cast<int>(obs.size());
  alpha.resize(n, T);
  norms.resize(T);
  alpha.col(0) = hmm.initial.cwiseProduct(hmm.emission.col(obs[0]));
  for (int t = 0;; ++t) {
    norms[t] = alpha.col(t).sum();
    if (!(norms[t] > 0.0)) return false;
    alpha.col(t) /= norms[t];
    if (t + 1 == T) break;
    alpha.col(t + 1) = (hmm.transition.transpose() * alpha.col(t))
                           .cwiseProduct(hmm.emission.col(obs[t + 1]));
  }
  return true;
}

// Forward-backward for one sequence; adds expected counts to `acc` and
// returns the sequence log-likelihood.
double accumulate_sequence(const DiscreteHmm& hmm, const std::vector<int>& obs,
                           Accumulators& acc) {
  const int n = hmm.n_states;
  const int T = static_cast<int>(obs.size());
  Matrix alpha;
  Vector norms;
  if (!scaled_forward(hmm, obs, alpha, norms)) {
    throw FitError(
        "baum_welch: a training sequence has probability zero under the "
        "current model");
  }

  Matrix beta(n, T);
  beta.col(T - 1).setOnes();
  for (int t = T - 2; t >= 0; --t) {
    beta.col(t) = hmm.transition * hmm.emission.col(obs[t + 1])
                                       .cwiseProduct(beta.col(t + 1));
    beta.col(t) /= norms[t + 1];
  }

  const Vector gamma0 = alpha.col(0).cwiseProduct(beta.col(0));
  acc.initial += gamma0;
  for (int t = 0; t < T; ++t) {
    const Vector gamma = alpha.col(t).cwiseProduct(beta.col(t));
    acc.emit_num.col(obs[t]) += gamma;
  }
  for (int t = 0; t + 1 < T; ++t) {
    // xi_t(i,j) = alpha_t(i) a_ij b_j(o_{t+1}) beta_{t+1}(j) / norm_{t+1}
    const Vector scaled_beta =
        hmm.emission.col(obs[t + 1]).cwiseProduct(beta.col(t + 1)) /
        norms[t + 1];
    acc.trans_num +=
        (alpha.col(t) * scaled_beta.transpose()).cwiseProduct(hmm.transition);
  }
  return norms.array().log().sum();
}

// Exact M-step. Rows with zero expected occupancy belong to unreachable
// states and are left at their previous values.
void apply_counts(const Accumulators& acc, DiscreteHmm& hmm) {
  const double total0 = acc.initial.sum();
  if (total0 > 0.0) hmm.initial = acc.initial / total0;
  for (int i = 0; i < hmm.n_states; ++i) {
    const double trow = acc.trans_num.row(i).sum();
    if (trow > 0.0) hmm.transition.row(i) = acc.trans_num.row(i) / trow;
    const double erow = acc.emit_num.row(i).sum();
    if (erow > 0.0) hmm.emission.row(i) = acc.emit_num.row(i) / erow;
  }
}

void smooth_rows(DiscreteHmm& hmm) {
  hmm.initial.array() += kSmoothing;
  hmm.initial /= hmm.initial.sum();
  for (int i = 0; i < hmm.n_states; ++i) {
    hmm.transition.row(i).array() += kSmoothing;
    hmm.transition.row(i) /= hmm.transition.row(i).sum();
    hmm.emission.row(i).array() += kSmoothing;
    hmm.emission.row(i) /= hmm.emission.row(i).sum();
  }
}

DiscreteHmm initial_model(int n_states, const std::vector<std::string>& alphabet,
                          std::uint64_t seed) {
  const int k = static_cast<int>(alphabet.size());
  DiscreteHmm hmm;
  hmm.n_states = n_states;
  hmm.alphabet = alphabet;
  hmm.initial = Vector::Constant(n_states, 1.0 / n_states);
  hmm.transition = Matrix::Constant(n_states, n_states, 1.0 / n_states);
  hmm.emission = Matrix::Constant(n_states, k, 1.0 / k);
  // Break the symmetry of exact uniformity, deterministically.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  for (int i = 0; i < n_states; ++i) {
    for (int j = 0; j < n_states; ++j) {
      hmm.transition(i, j) *= 1.0 + jitter(rng);
    }
    hmm.transition.row(i) /= hmm.transition.row(i).sum();
    for (int j = 0; j < k; ++j) {
      hmm.emission(i, j) *= 1.0 + jitter(rng);
    }
    hmm.emission.row(i) /= hmm.emission.row(i).sum();
  }
  return hmm;
}

double total_loglik(const DiscreteHmm& hmm,
                    const std::vector<std::vector<int>>& obs) {
  double total = 0.0;
  Matrix alpha;
  Vector norms;
  for (const auto& seq : obs) {
    if (!scaled_forward(hmm, seq, alpha, norms)) return kNegInf;
    total += norms.array().log().sum();
  }
  return total;
}

}  // namespace

void DiscreteHmm::validate() const {
  if (n_states < 1) throw ConfigError("hmm: n_states must be >= 1");
  if (alphabet.empty()) throw ConfigError("hmm: alphabet must be non-empty");
  if (std::set<std::string>(alphabet.begin(), alphabet.end()).size() !=
      alphabet.size()) {
    throw ConfigError("hmm: alphabet contains duplicate symbols");
  }
  if (initial.size() != n_states || transition.rows() != n_states ||
      transition.cols() != n_states || emission.rows() != n_states ||
      emission.cols() != static_cast<Eigen::Index>(alphabet.size())) {
    throw ConfigError("hmm: probability table dimensions are inconsistent");
  }
  check_stochastic_row(initial, "initial");
  for (int i = 0; i < n_states; ++i) {
    check_stochastic_row(transition.row(i), "transition");
    check_stochastic_row(emission.row(i), "emission");
  }
}

Criterion criterion_from_string(const std::string& name) {
  if (name == "viterbi") return Criterion::Viterbi;
  if (name == "forward") return Criterion::Forward;
  throw ConfigError("unknown criterion '" + name +
                    "' (expected viterbi or forward)");
}

std::string to_string(Criterion criterion) {
  return criterion == Criterion::Viterbi ? "viterbi" : "forward";
}

void ActionModelBank::validate() const {
  if (models.empty()) throw ConfigError("model bank is empty");
  for (const auto& [action, hmm] : models) {
    hmm.validate();
    if (hmm.alphabet != alphabet) {
      throw ConfigError("model for action '" + action +
                        "' does not share the bank alphabet");
    }
  }
}

std::pair<DiscreteHmm, TrainReport> baum_welch(
    const std::vector<std::vector<std::string>>& sequences, int n_states,
    const std::vector<std::string>& alphabet, double tol, int max_iter,
    std::uint64_t seed) {
  if (n_states < 1) throw ConfigError("baum_welch: n_states must be >= 1");
  if (!(tol > 0.0)) throw ConfigError("baum_welch: tol must be positive");
  if (max_iter < 1) throw ConfigError("baum_welch: max_iter must be >= 1");
  if (alphabet.empty()) throw ConfigError("baum_welch: empty alphabet");
  if (std::set<std::string>(alphabet.begin(), alphabet.end()).size() !=
      alphabet.size()) {
    throw ConfigError("baum_welch: alphabet contains duplicate symbols");
  }
  if (sequences.empty()) {
    throw DataError("baum_welch: at least one training sequence is required");
  }
  const auto idx = symbol_index(alphabet);
  std::vector<std::vector<int>> obs;
  obs.reserve(sequences.size());
  for (const auto& seq : sequences) {
    if (seq.empty()) throw DataError("baum_welch: empty training sequence");
    obs.push_back(encode(seq, idx));
  }

  DiscreteHmm hmm = initial_model(n_states, alphabet, seed);
  TrainReport report;
  const int k = static_cast<int>(alphabet.size());

  for (int it = 0; it < max_iter; ++it) {
    Accumulators acc(n_states, k);
    double ll = 0.0;
    for (const auto& seq : obs) ll += accumulate_sequence(hmm, seq, acc);
    report.log_likelihood_trace.push_back(ll);
    if (it > 0 && ll - report.log_likelihood_trace[it - 1] < tol) {
      report.converged = true;
      break;
    }
    apply_counts(acc, hmm);
    ++report.iterations;
  }
  if (!report.converged) {
    // The loop ran out before the gain test fired; record the final model's
    // likelihood so the trace always covers the returned parameters.
    report.log_likelihood_trace.push_back(total_loglik(hmm, obs));
  }

  smooth_rows(hmm);
  hmm.validate();
  return {hmm, report};
}

double forward_loglik(const DiscreteHmm& hmm,
                      const std::vector<std::string>& seq) {
  hmm.validate();
  if (seq.empty()) throw DataError("forward_loglik: empty sequence");
  const auto obs = encode(seq, symbol_index(hmm.alphabet));
  Matrix alpha;
  Vector norms;
  if (!scaled_forward(hmm, obs, alpha, norms)) return kNegInf;
  return norms.array().log().sum();
}

ViterbiResult viterbi(const DiscreteHmm& hmm,
                      const std::vector<std::string>& seq) {
  hmm.validate();
  if (seq.empty()) throw DataError("viterbi: empty sequence");
  const auto obs = encode(seq, symbol_index(hmm.alphabet));
  const int n = hmm.n_states;
  const int T = static_cast<int>(obs.size());

  const Matrix log_a = hmm.transition.array().log();
  const Matrix log_b = hmm.emission.array().log();
  const Vector log_pi = hmm.initial.array().log();

  Matrix delta(n, T);
  Eigen::MatrixXi backptr(n, T);
  delta.col(0) = log_pi + log_b.col(obs[0]);
  backptr.col(0).setZero();
  for (int t = 1; t < T; ++t) {
    for (int j = 0; j < n; ++j) {
      int arg = 0;
      double best = delta(0, t - 1) + log_a(0, j);
      for (int i = 1; i < n; ++i) {
        const double cand = delta(i, t - 1) + log_a(i, j);
        if (cand > best) {
          best = cand;
          arg = i;
        }
      }
      delta(j, t) = best + log_b(j, obs[t]);
      backptr(j, t) = arg;
    }
  }

  ViterbiResult result;
  result.path.resize(T);
  int last = 0;
  double best = delta(0, T - 1);
  for (int j = 1; j < n; ++j) {
    if (delta(j, T - 1) > best) {
      best = delta(j, T - 1);
      last = j;
    }
  }
  result.log_prob = best;
  result.path[T - 1] = last;
  for (int t = T - 1; t > 0; --t) {
    result.path[t - 1] = backptr(result.path[t], t);
  }
  return result;
}

ActionDecision classify_action(const ActionModelBank& bank,
                               const std::vector<std::string>& seq,
                               Criterion criterion) {
  bank.validate();
  ActionDecision decision;
  if (seq.empty()) {
    decision.rejected = true;
    return decision;
  }
  bool first = true;
  double best = 0.0;
  for (const auto& [action, hmm] : bank.models) {
    const double score = criterion == Criterion::Forward
                             ? forward_loglik(hmm, seq)
                             : viterbi(hmm, seq).log_prob;
    decision.scores[action] = score;
    if (first || score > best) {
      best = score;
      decision.action = action;
      first = false;
    }
  }
  return decision;
}

}  // namespace roweisposes
