#include "decon/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace decon {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
double softplus(double t) {
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

std::uint32_t unigram_index(const std::string& token, std::uint64_t seed) {
    return hash_feature("1\x1f" + token, seed);
}

std::uint32_t bigram_index(const std::string& a, const std::string& b,
                           std::uint64_t seed) {
    return hash_feature("2\x1f" + a + '\x1f' + b, seed);
}

}  // namespace

std::uint32_t hash_feature(const std::string& key, std::uint64_t seed) {
    std::uint64_t h = kFnvOffset ^ (seed * kFnvPrime);
    for (unsigned char c : key) {
        h ^= c;
        h *= kFnvPrime;
    }
    return static_cast<std::uint32_t>(h & (kHashSpace - 1));
}

FeatureVector featurize(const std::string& text, std::uint64_t seed) {
    std::vector<std::string> tokens = tokenize(text);
    std::map<std::uint32_t, double> counts;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        counts[unigram_index(tokens[i], seed)] += 1.0;
        if (i + 1 < tokens.size()) {
            counts[bigram_index(tokens[i], tokens[i + 1], seed)] += 1.0;
        }
    }
    FeatureVector fv;
    double norm_sq = 0.0;
    for (const auto& [idx, c] : counts) norm_sq += c * c;
    fv.norm = std::sqrt(norm_sq);
    fv.indices.reserve(counts.size());
    fv.values.reserve(counts.size());
    for (const auto& [idx, c] : counts) {
        fv.indices.push_back(idx);
        fv.values.push_back(c / fv.norm);
    }
    return fv;
}

double logistic_loss_and_grad(const std::vector<FeatureVector>& features,
                              const std::vector<int>& labels,
                              const std::vector<double>& weights, double bias,
                              double l2, std::vector<double>* grad_w,
                              double* grad_b) {
    const std::size_t n = features.size();
    if (grad_w) std::fill(grad_w->begin(), grad_w->end(), 0.0);
    if (grad_b) *grad_b = 0.0;

    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const FeatureVector& fv = features[i];
        double z = bias;
        for (std::size_t k = 0; k < fv.indices.size(); ++k) {
            z += weights[fv.indices[k]] * fv.values[k];
        }
        double y = labels[i] > 0 ? 1.0 : -1.0;
        loss += softplus(-y * z);
        if (grad_w || grad_b) {
            double coeff = -y * sigmoid(-y * z) / static_cast<double>(n);
            if (grad_b) *grad_b += coeff;
            if (grad_w) {
                for (std::size_t k = 0; k < fv.indices.size(); ++k) {
                    (*grad_w)[fv.indices[k]] += coeff * fv.values[k];
                }
            }
        }
    }
    loss /= static_cast<double>(n);

    double reg = 0.0;
    for (double w : weights) reg += w * w;
    loss += 0.5 * l2 * reg;
    if (grad_w) {
        for (std::size_t j = 0; j < weights.size(); ++j) {
            if (weights[j] != 0.0) (*grad_w)[j] += l2 * weights[j];
        }
    }
    return loss;
}

DetectorModel train(const std::vector<TrainExample>& examples,
                    const TrainConfig& config, TrainLog* log) {
    if (examples.size() < 2) {
        throw std::invalid_argument("train: need at least two examples");
    }
    bool has_human = false, has_llm = false;
    for (const TrainExample& ex : examples) {
        (ex.label == Label::llm ? has_llm : has_human) = true;
    }
    if (!has_human || !has_llm) {
        throw std::invalid_argument("train: need both labels present");
    }

    std::vector<FeatureVector> features;
    std::vector<int> labels;
    features.reserve(examples.size());
    labels.reserve(examples.size());
    std::vector<std::uint32_t> touched;
    for (const TrainExample& ex : examples) {
        features.push_back(featurize(ex.text, config.seed));
        labels.push_back(ex.label == Label::llm ? 1 : 0);
        touched.insert(touched.end(), features.back().indices.begin(),
                       features.back().indices.end());
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

    DetectorModel model;
    model.train_config = config;
    model.weights.assign(kHashSpace, 0.0);
    model.bias = 0.0;

    const std::size_t n = features.size();
    std::vector<double> grad_w(kHashSpace, 0.0);
    double prev_loss = 0.0;
    for (int epoch = 0; epoch <= config.epochs; ++epoch) {
        double grad_b = 0.0;
        // Sparse accumulation: only touched buckets ever change, and only
        // touched buckets can carry weight, so the l2 term stays exact.
        for (std::uint32_t idx : touched) grad_w[idx] = 0.0;
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const FeatureVector& fv = features[i];
            double z = model.bias;
            for (std::size_t k = 0; k < fv.indices.size(); ++k) {
                z += model.weights[fv.indices[k]] * fv.values[k];
            }
            double y = labels[i] > 0 ? 1.0 : -1.0;
            loss += softplus(-y * z);
            double coeff = -y * sigmoid(-y * z) / static_cast<double>(n);
            grad_b += coeff;
            for (std::size_t k = 0; k < fv.indices.size(); ++k) {
                grad_w[fv.indices[k]] += coeff * fv.values[k];
            }
        }
        loss /= static_cast<double>(n);
        double reg = 0.0;
        for (std::uint32_t idx : touched) reg += model.weights[idx] * model.weights[idx];
        loss += 0.5 * config.l2 * reg;

        if (log) log->epoch_losses.push_back(loss);
        if (epoch > 0 && loss > prev_loss + 1e-12) {
            throw std::runtime_error(
                "train: loss increased at epoch " + std::to_string(epoch) + " (" +
                std::to_string(prev_loss) + " -> " + std::to_string(loss) +
                "); lower the learning rate");
        }
        prev_loss = loss;
        if (epoch == config.epochs) break;  // final loss evaluated, no update

        for (std::uint32_t idx : touched) {
            model.weights[idx] -= config.learning_rate *
                                  (grad_w[idx] + config.l2 * model.weights[idx]);
        }
        model.bias -= config.learning_rate * grad_b;
    }
    return model;
}

double logit(const DetectorModel& model, const std::string& text) {
    FeatureVector fv = featurize(text, model.train_config.seed);
    double z = model.bias;
    for (std::size_t k = 0; k < fv.indices.size(); ++k) {
        z += model.weights[fv.indices[k]] * fv.values[k];
    }
    return z;
}

double predict(const DetectorModel& model, const std::string& text) {
    return sigmoid(logit(model, text));
}

Attribution attribute(const DetectorModel& model, const std::string& text) {
    Attribution attr;
    attr.bias_term = model.bias;

    std::vector<std::string> tokens = tokenize(text);
    const std::uint64_t seed = model.train_config.seed;

    // The feature norm comes from the same counts featurize() builds.
    std::map<std::uint32_t, double> counts;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        counts[unigram_index(tokens[i], seed)] += 1.0;
        if (i + 1 < tokens.size()) {
            counts[bigram_index(tokens[i], tokens[i + 1], seed)] += 1.0;
        }
    }
    double norm_sq = 0.0;
    for (const auto& [idx, c] : counts) norm_sq += c * c;
    double norm = std::sqrt(norm_sq);

    double sum = 0.0;
    attr.tokens.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        double c = 0.0;
        if (norm > 0.0) {
            c = model.weights[unigram_index(tokens[i], seed)] / norm;
            if (i > 0) {
                c += 0.5 * model.weights[bigram_index(tokens[i - 1], tokens[i], seed)] / norm;
            }
            if (i + 1 < tokens.size()) {
                c += 0.5 * model.weights[bigram_index(tokens[i], tokens[i + 1], seed)] / norm;
            }
        }
        sum += c;
        attr.tokens.push_back({tokens[i], c});
    }
    attr.logit = attr.bias_term + sum;
    return attr;
}

std::vector<TokenContribution> top_tokens(const Attribution& attribution,
                                          std::size_t k) {
    std::map<std::string, double> agg;
    for (const TokenContribution& t : attribution.tokens) {
        agg[t.token] += t.contribution;
    }
    std::vector<TokenContribution> out;
    out.reserve(agg.size());
    for (const auto& [tok, c] : agg) out.push_back({tok, c});
    std::sort(out.begin(), out.end(), [](const TokenContribution& a,
                                         const TokenContribution& b) {
        if (a.contribution != b.contribution) return a.contribution > b.contribution;
        return a.token < b.token;
    });
    if (out.size() > k) out.resize(k);
    return out;
}

ScoreResult score_corpus(const DetectorModel& model, const Corpus& corpus) {
    ScoreResult result;
    for (const Record& rec : corpus.records) {
        if (!rec.llm_text) {
            ++result.skipped_nulled;
            continue;
        }
        result.scores.push_back({rec.id, predict(model, *rec.llm_text)});
    }
    return result;
}

void DetectorModel::save(const std::string& path) const {
    ordered_json doc;
    doc["version"] = 1;
    doc["hash_bits"] = kHashBits;
    doc["bias"] = bias;
    doc["train_config"] = {{"learning_rate", train_config.learning_rate},
                           {"epochs", train_config.epochs},
                           {"l2", train_config.l2},
                           {"seed", train_config.seed}};
    std::vector<std::uint32_t> indices;
    std::vector<double> values;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] != 0.0) {
            indices.push_back(static_cast<std::uint32_t>(i));
            values.push_back(weights[i]);
        }
    }
    doc["weights"] = {{"indices", indices}, {"values", values}};

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
    out << doc.dump() << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

DetectorModel DetectorModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    ordered_json doc;
    try {
        doc = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw std::runtime_error("model file is not valid JSON: " + path);
    }
    if (doc.value("version", 0) != 1) {
        throw std::runtime_error("unsupported model version in " + path);
    }
    if (doc.value("hash_bits", 0) != kHashBits) {
        throw std::runtime_error("model hash space does not match this build");
    }
    DetectorModel model;
    model.bias = doc.value("bias", 0.0);
    const auto& tc = doc["train_config"];
    model.train_config.learning_rate = tc.value("learning_rate", 1.0);
    model.train_config.epochs = tc.value("epochs", 0);
    model.train_config.l2 = tc.value("l2", 0.0);
    model.train_config.seed = tc.value("seed", std::uint64_t{0});
    model.weights.assign(kHashSpace, 0.0);
    const auto& idx = doc["weights"]["indices"];
    const auto& val = doc["weights"]["values"];
    if (idx.size() != val.size()) {
        throw std::runtime_error("model weight arrays disagree in length");
    }
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::uint32_t j = idx[i].get<std::uint32_t>();
        if (j >= kHashSpace) throw std::runtime_error("weight index out of range");
        model.weights[j] = val[i].get<double>();
    }
    return model;
}

}  // namespace decon
