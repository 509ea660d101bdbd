#include "decon/synth.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace decon {

namespace {

using ordered_json = nlohmann::ordered_json;

// Uniform draw without std::uniform_int_distribution so output is identical
// across standard libraries.
std::uint64_t draw(std::mt19937_64& rng, std::uint64_t n) {
    return rng() % n;
}

double draw_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string make_word(std::mt19937_64& rng) {
    static const char* consonants = "bdfgklmnprstvz";
    static const char* vowels = "aeiou";
    std::size_t syllables = 2 + draw(rng, 2);  // 2..3
    std::string word;
    for (std::size_t s = 0; s < syllables; ++s) {
        word.push_back(consonants[draw(rng, 14)]);
        word.push_back(vowels[draw(rng, 5)]);
    }
    return word;
}

std::string pick(std::mt19937_64& rng, const std::vector<std::string>& vocab) {
    return vocab[draw(rng, vocab.size())];
}

std::string make_sentence(std::mt19937_64& rng, const std::vector<std::string>& vocab,
                          std::size_t min_words, std::size_t max_words) {
    std::size_t n = min_words + draw(rng, max_words - min_words + 1);
    std::string sentence;
    for (std::size_t i = 0; i < n; ++i) {
        std::string w = pick(rng, vocab);
        if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        if (i > 0) sentence.push_back(' ');
        sentence += w;
    }
    sentence.push_back('.');
    return sentence;
}

std::string make_text(std::mt19937_64& rng, const std::vector<std::string>& vocab,
                      const SynthConfig& cfg) {
    std::size_t n = cfg.min_sentences + draw(rng, cfg.max_sentences - cfg.min_sentences + 1);
    std::string text;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) text.push_back(' ');
        text += make_sentence(rng, vocab, cfg.min_words, cfg.max_words);
    }
    return text;
}

std::string capitalize(std::string w) {
    if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    return w;
}

// Every injected phrase starts with its pattern's leftmost match and ends at
// a terminator, so span excision removes exactly the injection.
std::string beginning_phrase(std::mt19937_64& rng,
                             const std::vector<std::string>& vocab) {
    static const char* openers[] = {"Here is", "Here is", "Here's", "Here are",
                                    "Sure, here is", "Voici un"};
    std::string opener = openers[draw(rng, 6)];
    std::size_t n = 3 + draw(rng, 10);
    return opener + " a " + std::to_string(n) +
           " sentence abstract for the provided article title \"" +
           capitalize(pick(rng, vocab)) + " " + pick(rng, vocab) + "\": ";
}

std::string prompt_phrase(std::mt19937_64& rng, const std::vector<std::string>& vocab) {
    if (draw(rng, 2) == 0) {
        return "in a human " + pick(rng, vocab) + " style as requested. ";
    }
    return "grammar, " + pick(rng, vocab) + " and spelling were adjusted. ";
}

std::string domain_phrase(std::mt19937_64& rng, Domain domain) {
    (void)rng;
    switch (domain) {
        case Domain::arxiv: return "abstract of the requested work follows: ";
        case Domain::yelp: return "review of the place comes next: ";
        case Domain::xsum: return "article summary follows below: ";
        case Domain::writing: return "given article title taken as prompt: ";
        case Domain::other: return "article reference follows: ";
    }
    return "article reference follows: ";
}

std::string assistant_phrase(std::mt19937_64& rng) {
    static const char* variants[] = {"[assistant]: ", "**assistant: ",
                                     "[system] directive noted [assistant]: "};
    return variants[draw(rng, 3)];
}

std::string rejection_text(std::mt19937_64& rng) {
    static const char* variants[] = {
        "I apologize, upon further reflection I do not feel able to continue "
        "with this request.",
        "Unfortunately I am only a language model and cannot take on this task.",
        "As just a language model I must decline to produce the requested text.",
    };
    return variants[draw(rng, 3)];
}

const char* domain_key(Domain d) {
    switch (d) {
        case Domain::arxiv: return "arxiv";
        case Domain::xsum: return "xsum";
        case Domain::yelp: return "yelp";
        case Domain::writing: return "writing";
        case Domain::other: return "other";
    }
    return "other";
}

const char* category_key(Category c) { return category_name(c); }

}  // namespace

std::pair<std::vector<std::string>, std::vector<std::string>> make_default_vocabs(
    std::uint64_t seed, std::size_t size_per_class, double overlap) {
    if (size_per_class == 0) throw std::invalid_argument("vocab size must be positive");
    if (overlap < 0.0 || overlap > 1.0) {
        throw std::invalid_argument("overlap must lie in [0, 1]");
    }
    std::mt19937_64 rng(seed ^ 0x5eedf00dULL);
    std::size_t shared = static_cast<std::size_t>(overlap * size_per_class + 0.5);
    std::size_t distinct = size_per_class - shared;
    std::size_t need = shared + 2 * distinct;

    std::set<std::string> seen;
    std::vector<std::string> words;
    while (words.size() < need) {
        std::string w = make_word(rng);
        if (seen.insert(w).second) words.push_back(std::move(w));
    }

    std::vector<std::string> human(words.begin(), words.begin() + shared);
    std::vector<std::string> llm = human;
    human.insert(human.end(), words.begin() + shared, words.begin() + shared + distinct);
    llm.insert(llm.end(), words.begin() + shared + distinct, words.end());
    return {std::move(human), std::move(llm)};
}

SynthResult generate(const SynthConfig& config) {
    if (config.vocab_human.empty() || config.vocab_llm.empty()) {
        throw std::invalid_argument("generate: vocabularies must be non-empty");
    }
    double rate_sum = 0.0;
    for (const auto& [cat, rate] : config.contamination_rate) {
        if (rate < 0.0) throw std::invalid_argument("generate: negative rate");
        rate_sum += rate;
    }
    if (rate_sum > 1.0 + 1e-12) {
        throw std::invalid_argument("generate: contamination rates sum above 1");
    }
    if (config.max_sentences < config.min_sentences ||
        config.max_words < config.min_words || config.min_words == 0) {
        throw std::invalid_argument("generate: bad sentence/word bounds");
    }
    double mix_sum = 0.0;
    for (const auto& [d, f] : config.domain_mix) mix_sum += f;
    if (config.domain_mix.empty() || mix_sum <= 0.0) {
        throw std::invalid_argument("generate: domain mix must have positive mass");
    }

    std::mt19937_64 rng(config.rng_seed);
    SynthResult result;
    result.corpus.source_path = "synthetic";

    for (std::size_t i = 0; i < config.n_pairs; ++i) {
        Record rec;
        char id[32];
        std::snprintf(id, sizeof(id), "synth-%06zu", i);
        rec.id = id;

        double u = draw_unit(rng) * mix_sum;
        double acc = 0.0;
        rec.domain = config.domain_mix.rbegin()->first;
        for (const auto& [d, f] : config.domain_mix) {
            acc += f;
            if (u < acc) { rec.domain = d; break; }
        }
        rec.domain_raw = domain_key(rec.domain);
        rec.llm_type_raw = config.llm_type_label;
        rec.llm_type = llm_type_from_string(rec.llm_type_raw);
        rec.task_variant = "direct_prompt";

        rec.human_text = make_text(rng, config.vocab_human, config);
        std::string base = make_text(rng, config.vocab_llm, config);

        std::optional<Category> injected;
        double v = draw_unit(rng);
        double cum = 0.0;
        for (const auto& [cat, rate] : config.contamination_rate) {
            cum += rate;
            if (v < cum) { injected = cat; break; }
        }

        std::string llm_text = base;
        if (injected) {
            switch (*injected) {
                case Category::rejection:
                    llm_text = rejection_text(rng);
                    break;
                case Category::prompt: {
                    // A standalone sentence at a sentence boundary.
                    auto spans = split_sentences(base);
                    std::string phrase = prompt_phrase(rng, config.vocab_llm);
                    if (spans.size() > 1 && draw(rng, 2) == 0) {
                        std::size_t cut = spans[draw(rng, spans.size() - 1)].end;
                        std::size_t next = cut;
                        while (next < base.size() && base[next] == ' ') ++next;
                        llm_text = base.substr(0, cut) + " " + phrase + base.substr(next);
                    } else {
                        llm_text = phrase + base;
                    }
                    break;
                }
                case Category::beginning:
                    llm_text = beginning_phrase(rng, config.vocab_llm) + base;
                    break;
                case Category::domain:
                    llm_text = domain_phrase(rng, rec.domain) + base;
                    break;
                case Category::assistant:
                    llm_text = assistant_phrase(rng) + base;
                    break;
            }
        }
        rec.llm_text = llm_text;
        result.ground_truth[rec.id] = injected;
        result.pre_injection[rec.id] = base;
        result.corpus.records.push_back(std::move(rec));
    }
    return result;
}

SynthConfig SynthConfig::from_json(const std::string& text) {
    ordered_json doc = ordered_json::parse(text);
    SynthConfig cfg;
    cfg.n_pairs = doc.value("n_pairs", cfg.n_pairs);
    cfg.rng_seed = doc.value("rng_seed", cfg.rng_seed);
    cfg.llm_type_label = doc.value("llm_type", cfg.llm_type_label);
    cfg.min_sentences = doc.value("min_sentences", cfg.min_sentences);
    cfg.max_sentences = doc.value("max_sentences", cfg.max_sentences);
    cfg.min_words = doc.value("min_words", cfg.min_words);
    cfg.max_words = doc.value("max_words", cfg.max_words);
    if (doc.contains("contamination_rate")) {
        for (const auto& [key, value] : doc["contamination_rate"].items()) {
            auto cat = category_from_string(key);
            if (!cat) throw std::invalid_argument("unknown category: " + key);
            cfg.contamination_rate[*cat] = value.get<double>();
        }
    }
    if (doc.contains("domain_mix")) {
        cfg.domain_mix.clear();
        for (const auto& [key, value] : doc["domain_mix"].items()) {
            cfg.domain_mix[domain_from_string(key)] = value.get<double>();
        }
    }
    if (doc.contains("vocab_human")) {
        cfg.vocab_human = doc["vocab_human"].get<std::vector<std::string>>();
    }
    if (doc.contains("vocab_llm")) {
        cfg.vocab_llm = doc["vocab_llm"].get<std::vector<std::string>>();
    }
    if (cfg.vocab_human.empty() || cfg.vocab_llm.empty()) {
        std::size_t size = doc.value("vocab_size", std::size_t{400});
        double overlap = doc.value("vocab_overlap", 0.5);
        auto [human, llm] = make_default_vocabs(cfg.rng_seed, size, overlap);
        if (cfg.vocab_human.empty()) cfg.vocab_human = std::move(human);
        if (cfg.vocab_llm.empty()) cfg.vocab_llm = std::move(llm);
    }
    return cfg;
}

std::string SynthConfig::to_json() const {
    ordered_json doc;
    doc["n_pairs"] = n_pairs;
    doc["rng_seed"] = rng_seed;
    doc["llm_type"] = llm_type_label;
    ordered_json rates;
    for (const auto& [cat, rate] : contamination_rate) rates[category_key(cat)] = rate;
    doc["contamination_rate"] = std::move(rates);
    ordered_json mix;
    for (const auto& [d, f] : domain_mix) mix[domain_key(d)] = f;
    doc["domain_mix"] = std::move(mix);
    doc["min_sentences"] = min_sentences;
    doc["max_sentences"] = max_sentences;
    doc["min_words"] = min_words;
    doc["max_words"] = max_words;
    doc["vocab_human"] = vocab_human;
    doc["vocab_llm"] = vocab_llm;
    return doc.dump(2);
}

}  // namespace decon
