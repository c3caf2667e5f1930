#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "roweisposes/hmm.hpp"

using namespace roweisposes;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

DiscreteHmm deterministic_chain() {
  // state 0 emits "a" then hands off to state 1 which emits "b" forever
  DiscreteHmm hmm;
  hmm.n_states = 2;
  hmm.alphabet = {"a", "b"};
  hmm.initial = Vector(2);
  hmm.initial << 1.0, 0.0;
  hmm.transition = Matrix(2, 2);
  hmm.transition << 0.0, 1.0, 0.0, 1.0;
  hmm.emission = Matrix(2, 2);
  hmm.emission << 1.0, 0.0, 0.0, 1.0;
  return hmm;
}

DiscreteHmm random_hmm(std::mt19937_64& rng, int n_states, int n_symbols) {
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  DiscreteHmm hmm;
  hmm.n_states = n_states;
  for (int k = 0; k < n_symbols; ++k) {
    hmm.alphabet.push_back(std::string(1, static_cast<char>('a' + k)));
  }
  hmm.initial = Vector(n_states);
  for (int i = 0; i < n_states; ++i) hmm.initial[i] = unit(rng);
  hmm.initial /= hmm.initial.sum();
  hmm.transition = Matrix(n_states, n_states);
  hmm.emission = Matrix(n_states, n_symbols);
  for (int i = 0; i < n_states; ++i) {
    for (int j = 0; j < n_states; ++j) hmm.transition(i, j) = unit(rng);
    hmm.transition.row(i) /= hmm.transition.row(i).sum();
    for (int k = 0; k < n_symbols; ++k) hmm.emission(i, k) = unit(rng);
    hmm.emission.row(i) /= hmm.emission.row(i).sum();
  }
  return hmm;
}

std::vector<std::string> decode(const std::vector<int>& obs,
                                const std::vector<std::string>& alphabet) {
  std::vector<std::string> out;
  for (int o : obs) out.push_back(alphabet[o]);
  return out;
}

std::vector<std::vector<std::string>> random_corpus(std::mt19937_64& rng,
                                                    int n_sequences,
                                                    int max_len,
                                                    int n_symbols) {
  std::uniform_int_distribution<int> len(1, max_len);
  std::uniform_int_distribution<int> sym(0, n_symbols - 1);
  std::vector<std::vector<std::string>> corpus(n_sequences);
  for (auto& seq : corpus) {
    const int T = len(rng);
    for (int t = 0; t < T; ++t) {
      seq.push_back(std::string(1, static_cast<char>('a' + sym(rng))));
    }
  }
  return corpus;
}

}  // namespace

TEST_CASE("single-state model learns symbol frequencies") {
  const std::vector<std::vector<std::string>> seqs = {
      {"a", "a", "b", "a"}, {"b", "a", "a", "a"}};
  const auto [hmm, report] = baum_welch(seqs, 1, {"a", "b"}, 1e-9, 50, 1);

  CHECK(hmm.transition(0, 0) == doctest::Approx(1.0));
  // empirical frequencies 6/8 and 2/8, then the 1e-6 floor renormalizes
  const double floor = 1e-6;
  const double z = 1.0 + 2.0 * floor;
  CHECK(hmm.emission(0, 0) == doctest::Approx((0.75 + floor) / z).epsilon(1e-12));
  CHECK(hmm.emission(0, 1) == doctest::Approx((0.25 + floor) / z).epsilon(1e-12));
  CHECK(hmm.emission(0, 0) == doctest::Approx(0.75).epsilon(1e-4));
  CHECK(report.converged);
}

TEST_CASE("constant sequences concentrate emission on one symbol") {
  const std::vector<std::vector<std::string>> seqs = {
      {"a", "a", "a", "a", "a", "a"}};
  const auto [hmm, report] = baum_welch(seqs, 2, {"a", "b", "c"}, 1e-8, 100, 3);
  // reachable states emit 'a' almost surely (exactly, minus the floor)
  for (int i = 0; i < 2; ++i) {
    CHECK(hmm.emission(i, 0) >= 1.0 - 1e-4);
  }
  CHECK(forward_loglik(hmm, seqs[0]) >= 6.0 * std::log(1.0 - 1e-4));
}

TEST_CASE("baum_welch log-likelihood trace is non-decreasing") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int n_symbols = 2 + trial % 4;
    const auto corpus = random_corpus(rng, 3, 12, n_symbols);
    std::vector<std::string> alphabet;
    for (int k = 0; k < n_symbols; ++k) {
      alphabet.push_back(std::string(1, static_cast<char>('a' + k)));
    }
    const auto [hmm, report] =
        baum_welch(corpus, 1 + trial % 4, alphabet, 1e-7, 60, trial);
    REQUIRE(report.log_likelihood_trace.size() >= 2);
    for (size_t i = 1; i < report.log_likelihood_trace.size(); ++i) {
      CHECK(report.log_likelihood_trace[i] >=
            report.log_likelihood_trace[i - 1] - 1e-9);
    }
    hmm.validate();  // row-stochastic output
  }
}

TEST_CASE("baum_welch is deterministic given a seed") {
  const std::vector<std::vector<std::string>> seqs = {
      {"a", "b", "b", "a"}, {"b", "b", "a"}};
  const auto [h1, r1] = baum_welch(seqs, 3, {"a", "b"}, 1e-8, 40, 99);
  const auto [h2, r2] = baum_welch(seqs, 3, {"a", "b"}, 1e-8, 40, 99);
  CHECK((h1.transition - h2.transition).cwiseAbs().maxCoeff() == 0.0);
  CHECK((h1.emission - h2.emission).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r1.log_likelihood_trace == r2.log_likelihood_trace);
}

TEST_CASE("baum_welch input validation") {
  CHECK_THROWS_AS(baum_welch({{"a"}}, 0, {"a"}, 1e-6, 10, 0), ConfigError);
  CHECK_THROWS_AS(baum_welch({{"a"}}, 1, {"a"}, 0.0, 10, 0), ConfigError);
  CHECK_THROWS_AS(baum_welch({}, 1, {"a"}, 1e-6, 10, 0), DataError);
  CHECK_THROWS_AS(baum_welch({{"z"}}, 1, {"a"}, 1e-6, 10, 0), DataError);
  CHECK_THROWS_AS(baum_welch({{"a"}}, 1, {"a", "a"}, 1e-6, 10, 0),
                  ConfigError);
}

TEST_CASE("forward_loglik closed forms") {
  const DiscreteHmm chain = deterministic_chain();
  // length-1: log sum_s pi_s b_s(o)
  CHECK(forward_loglik(chain, {"a"}) == doctest::Approx(0.0));
  CHECK(forward_loglik(chain, {"b"}) == -kInf);

  // deterministic path probability is the product of its factors
  CHECK(forward_loglik(chain, {"a", "b", "b"}) == doctest::Approx(0.0));

  std::mt19937_64 rng(23);
  const DiscreteHmm hmm = random_hmm(rng, 2, 2);
  Vector pi = hmm.initial;
  const double direct =
      std::log(pi[0] * hmm.emission(0, 0) + pi[1] * hmm.emission(1, 0));
  CHECK(forward_loglik(hmm, {"a"}) == doctest::Approx(direct).epsilon(1e-12));

  CHECK_THROWS_AS(forward_loglik(hmm, {"q"}), DataError);
}

TEST_CASE("forward_loglik returns -inf for impossible symbols") {
  DiscreteHmm hmm = deterministic_chain();
  // emission column for "b" zeroed in every state
  hmm.emission << 1.0, 0.0, 1.0, 0.0;
  CHECK(forward_loglik(hmm, {"a", "b"}) == -kInf);
}

TEST_CASE("viterbi single-state path") {
  std::mt19937_64 rng(31);
  const DiscreteHmm hmm = random_hmm(rng, 1, 3);
  const auto res = viterbi(hmm, {"a", "c", "b"});
  CHECK(res.path == std::vector<int>{0, 0, 0});
  CHECK(res.log_prob ==
        doctest::Approx(forward_loglik(hmm, {"a", "c", "b"})).epsilon(1e-12));
}

TEST_CASE("viterbi matches exhaustive enumeration on a toy model") {
  std::mt19937_64 rng(37);
  const DiscreteHmm hmm = random_hmm(rng, 2, 2);
  const std::vector<int> obs = {0, 1, 0};
  const auto brute =
      oracle::brute_force_viterbi(hmm.transition, hmm.emission, hmm.initial,
                                  obs);
  const auto dp = viterbi(hmm, decode(obs, hmm.alphabet));
  CHECK(dp.log_prob == doctest::Approx(brute.log_prob).epsilon(1e-10));
  CHECK(dp.path == brute.path);
}

TEST_CASE("viterbi equals brute force over random small models") {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> n_states(1, 4);
  std::uniform_int_distribution<int> n_symbols(2, 4);
  std::uniform_int_distribution<int> seq_len(1, 8);
  for (int trial = 0; trial < 60; ++trial) {
    const DiscreteHmm hmm = random_hmm(rng, n_states(rng), n_symbols(rng));
    const int T = seq_len(rng);
    std::uniform_int_distribution<int> sym(0, static_cast<int>(
                                                  hmm.alphabet.size()) - 1);
    std::vector<int> obs(T);
    for (auto& o : obs) o = sym(rng);

    const auto brute = oracle::brute_force_viterbi(hmm.transition,
                                                   hmm.emission, hmm.initial,
                                                   obs);
    const auto dp = viterbi(hmm, decode(obs, hmm.alphabet));
    CHECK(std::abs(dp.log_prob - brute.log_prob) <= 1e-10);
    CHECK(dp.path == brute.path);

    // sum over paths dominates the best path
    const double forward = forward_loglik(hmm, decode(obs, hmm.alphabet));
    CHECK(forward >= dp.log_prob - 1e-12);
    const double brute_total = oracle::brute_force_likelihood(
        hmm.transition, hmm.emission, hmm.initial, obs);
    CHECK(forward == doctest::Approx(std::log(brute_total)).epsilon(1e-10));
  }
}

TEST_CASE("classify_action basics") {
  ActionModelBank bank;
  bank.alphabet = {"a", "b"};
  bank.models["only"] = deterministic_chain();
  const auto single = classify_action(bank, {"a", "b"});
  CHECK(single.action == "only");
  CHECK_FALSE(single.rejected);

  // dominance: model B cannot produce the sequence at all
  DiscreteHmm impossible = deterministic_chain();
  impossible.emission << 0.0, 1.0, 1.0, 0.0;  // emits b then a
  bank.models["zeta"] = impossible;
  const auto two = classify_action(bank, {"a", "b", "b"});
  CHECK(two.action == "only");
  CHECK(two.scores.at("only") > two.scores.at("zeta"));
  CHECK(two.scores.at("zeta") == -kInf);
}

TEST_CASE("classify_action ties break lexicographically") {
  ActionModelBank bank;
  bank.alphabet = {"a", "b"};
  bank.models["delta"] = deterministic_chain();
  bank.models["alpha"] = deterministic_chain();
  const auto decision = classify_action(bank, {"a", "b"});
  CHECK(decision.action == "alpha");
}

TEST_CASE("classify_action matches brute-force scores on a toy bank") {
  std::mt19937_64 rng(53);
  ActionModelBank bank;
  bank.alphabet = {"a", "b", "c"};
  bank.models["m0"] = random_hmm(rng, 2, 3);
  bank.models["m1"] = random_hmm(rng, 2, 3);
  const std::vector<int> obs = {2, 0, 1, 1};
  const auto seq = decode(obs, bank.alphabet);

  const auto decision = classify_action(bank, seq, Criterion::Viterbi);
  double best = -kInf;
  std::string best_action;
  for (const auto& [action, hmm] : bank.models) {
    const double score = oracle::brute_force_viterbi(
                             hmm.transition, hmm.emission, hmm.initial, obs)
                             .log_prob;
    CHECK(decision.scores.at(action) == doctest::Approx(score).epsilon(1e-10));
    if (score > best) {
      best = score;
      best_action = action;
    }
  }
  CHECK(decision.action == best_action);

  // adding a shared constant to all scores cannot change the argmax
  auto shifted = decision.scores;
  std::string argmax_shifted;
  double top = -kInf;
  for (auto& [action, score] : shifted) {
    score += 123.456;
    if (score > top) {
      top = score;
      argmax_shifted = action;
    }
  }
  CHECK(argmax_shifted == decision.action);
}

TEST_CASE("classify_action rejects empty sequences") {
  ActionModelBank bank;
  bank.alphabet = {"a", "b"};
  bank.models["m"] = deterministic_chain();
  const auto decision = classify_action(bank, {});
  CHECK(decision.rejected);
  CHECK_FALSE(decision.action.has_value());
  CHECK(decision.scores.empty());
}

TEST_CASE("model validation catches broken tables") {
  DiscreteHmm hmm = deterministic_chain();
  hmm.transition(0, 1) = 0.7;
  CHECK_THROWS_AS(hmm.validate(), ConfigError);

  ActionModelBank bank;
  CHECK_THROWS_AS(bank.validate(), ConfigError);
  bank.alphabet = {"a", "b"};
  DiscreteHmm other = deterministic_chain();
  other.alphabet = {"x", "y"};
  bank.models["m"] = other;
  CHECK_THROWS_AS(bank.validate(), ConfigError);
}
