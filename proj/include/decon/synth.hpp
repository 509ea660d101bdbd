#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "decon/corpus.hpp"
#include "decon/patterns.hpp"

namespace decon {

// Desk-scale corpus generator with controllable injected contamination.
// Injected phrases are drawn from literal alternatives of the built-in
// catalog patterns, so the returned ground truth is exhaustive: scanning a
// generated corpus must reproduce it exactly.
struct SynthConfig {
    std::size_t n_pairs = 200;
    // Per-category injection probability; at most one injection per record
    // (without-replacement semantics), so the rates must sum to <= 1.
    std::map<Category, double> contamination_rate;
    std::vector<std::string> vocab_human;
    std::vector<std::string> vocab_llm;
    std::uint64_t rng_seed = 1;
    std::map<Domain, double> domain_mix = {{Domain::arxiv, 0.25},
                                           {Domain::xsum, 0.25},
                                           {Domain::yelp, 0.25},
                                           {Domain::writing, 0.25}};
    std::string llm_type_label = "Claude-instant";
    std::size_t min_sentences = 4, max_sentences = 7;
    std::size_t min_words = 6, max_words = 11;

    static SynthConfig from_json(const std::string& text);
    std::string to_json() const;
};

// Nonsense words built from consonant-vowel syllables. The consonant set
// excludes the letters needed by every built-in pattern literal, so base
// text can never collide with the catalog. `overlap` is the fraction of
// each class vocabulary shared with the other.
std::pair<std::vector<std::string>, std::vector<std::string>> make_default_vocabs(
    std::uint64_t seed, std::size_t size_per_class = 400, double overlap = 0.5);

struct SynthResult {
    Corpus corpus;
    // id -> injected category (nullopt = clean record); the scan oracle.
    std::map<std::string, std::optional<Category>> ground_truth;
    // id -> llm_text before injection, for cleanse-exactness checks.
    std::map<std::string, std::string> pre_injection;
};

// Deterministic per seed. Throws std::invalid_argument on an empty
// vocabulary or rates summing above 1.
SynthResult generate(const SynthConfig& config);

}  // namespace decon
