#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "decon/corpus.hpp"

namespace decon {

enum class Label { human, llm };

// Hashed unigram+bigram counts, L2-normalized. 2^18 buckets; collisions are
// tolerated, determinism is not negotiable.
inline constexpr int kHashBits = 18;
inline constexpr std::size_t kHashSpace = std::size_t{1} << kHashBits;

struct FeatureVector {
    std::vector<std::uint32_t> indices;  // strictly increasing
    std::vector<double> values;          // positive, L2-normalized
    double norm = 0.0;                   // L2 norm of the raw counts
};

struct TrainConfig {
    double learning_rate = 1.0;
    int epochs = 200;
    double l2 = 1e-4;
    std::uint64_t seed = 17;

    bool operator==(const TrainConfig&) const = default;
};

struct DetectorModel {
    std::vector<double> weights;  // dense over the hash space
    double bias = 0.0;
    TrainConfig train_config;

    void save(const std::string& path) const;  // versioned sparse JSON
    static DetectorModel load(const std::string& path);
};

std::uint32_t hash_feature(const std::string& key, std::uint64_t seed);
FeatureVector featurize(const std::string& text, std::uint64_t seed);

struct TrainLog {
    std::vector<double> epoch_losses;  // regularized mean logistic loss
};

struct TrainExample {
    std::string text;
    Label label = Label::human;
};

// Full-batch gradient descent on the regularized logistic loss. Deterministic
// for a given config and example order. The per-epoch loss must decrease
// monotonically; if it ever increases the run aborts with a diagnostic
// (std::runtime_error) rather than returning a dubious model.
// Throws std::invalid_argument for fewer than two examples or a single class.
DetectorModel train(const std::vector<TrainExample>& examples,
                    const TrainConfig& config, TrainLog* log = nullptr);

double logit(const DetectorModel& model, const std::string& text);
// sigmoid(logit); 1 = LLM-generated.
double predict(const DetectorModel& model, const std::string& text);

// Exact additive attributions of the linear model: bias + sum of per-token
// contributions equals the pre-sigmoid logit identically. A bigram's weight
// splits evenly between its two tokens; repeated tokens get one entry per
// occurrence.
struct TokenContribution {
    std::string token;
    double contribution = 0.0;
};

struct Attribution {
    std::vector<TokenContribution> tokens;  // one per token occurrence, in order
    double bias_term = 0.0;
    double logit = 0.0;
};

Attribution attribute(const DetectorModel& model, const std::string& text);

// Contributions aggregated per distinct token, sorted most-positive first.
std::vector<TokenContribution> top_tokens(const Attribution& attribution,
                                          std::size_t k);

// One score per record with llm_text, in corpus order; nulled records are
// skipped and counted.
struct ScoredRecord {
    std::string id;
    double score = 0.0;
};

struct ScoreResult {
    std::vector<ScoredRecord> scores;
    std::size_t skipped_nulled = 0;
};

ScoreResult score_corpus(const DetectorModel& model, const Corpus& corpus);

// Exposed for the finite-difference check: regularized mean logistic loss and
// its gradient at w (gradient vector sized like w, plus d/d bias).
double logistic_loss_and_grad(const std::vector<FeatureVector>& features,
                              const std::vector<int>& labels,
                              const std::vector<double>& weights, double bias,
                              double l2, std::vector<double>* grad_w,
                              double* grad_b);

}  // namespace decon
