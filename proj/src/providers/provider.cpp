#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string_view>

#include "granalign/providers.hpp"
#include "granalign/text.hpp"

namespace granalign {

#include "instruction_pairs.inc"

double Embedding::norm() const {
    return std::sqrt(std::inner_product(vector.begin(), vector.end(), vector.begin(), 0.0));
}

Embedding normalized(std::vector<double> v) {
    const double n = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw Error(ErrorKind::ContractViolation, "embedding has zero or non-finite norm");
    }
    for (auto& x : v) {
        x /= n;
    }
    return Embedding{std::move(v)};
}

std::string SemanticGuidance::fingerprint() const {
    std::string canonical = "entities:";
    canonical += text::join(entities, "\x1f");
    canonical += "\x1e" "actions:";
    canonical += text::join(actions, "\x1f");
    return text::sha256_hex(canonical).substr(0, 16);
}

std::string_view to_string(CaptionMode mode) {
    return mode == CaptionMode::Aware ? "aware" : "agnostic";
}

CaptionMode caption_mode_from_string(std::string_view s) {
    if (s == "aware") return CaptionMode::Aware;
    if (s == "agnostic") return CaptionMode::Agnostic;
    throw Error(ErrorKind::ParseError, "unknown caption mode '" + std::string(s) + "'");
}

std::vector<InstructionPair> parse_instruction_pairs(std::string_view asset) {
    std::vector<InstructionPair> pairs;
    std::size_t pos = 0;
    while (pos < asset.size()) {
        auto eol = asset.find('\n', pos);
        if (eol == std::string_view::npos) eol = asset.size();
        const auto line = text::trim(asset.substr(pos, eol - pos));
        pos = eol + 1;
        if (line.empty() || line.front() == '#') continue;
        if (line.rfind("[pair ", 0) == 0 && line.back() == ']') {
            InstructionPair p;
            p.id = std::stoul(line.substr(6, line.size() - 7));
            pairs.push_back(std::move(p));
        } else if (line.rfind("simplified:", 0) == 0 && !pairs.empty()) {
            pairs.back().simplified_instruction = text::trim(line.substr(11));
        } else if (line.rfind("detailed:", 0) == 0 && !pairs.empty()) {
            pairs.back().detailed_instruction = text::trim(line.substr(9));
        }
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].id != i + 1 || pairs[i].simplified_instruction.empty() ||
            pairs[i].detailed_instruction.empty()) {
            throw Error(ErrorKind::ParseError, "malformed instruction pair asset");
        }
    }
    return pairs;
}

const std::vector<InstructionPair>& instruction_pairs() {
    static const auto pairs = parse_instruction_pairs(kInstructionPairsAsset);
    return pairs;
}

std::string_view instruction_set_version() {
    static const std::string version = [] {
        const auto at = kInstructionPairsAsset.find("version:");
        if (at == std::string_view::npos) return std::string("unversioned");
        const auto eol = kInstructionPairsAsset.find('\n', at);
        return text::trim(kInstructionPairsAsset.substr(at + 8, eol - at - 8));
    }();
    return version;
}

const InstructionPair& instruction_pair(std::size_t id) {
    const auto& pairs = instruction_pairs();
    if (id < 1 || id > pairs.size()) {
        throw Error(ErrorKind::InvalidArgument,
                    "instruction pair " + std::to_string(id) + " does not exist (have " +
                        std::to_string(pairs.size()) + ")");
    }
    return pairs[id - 1];
}

namespace {

void check_rewrite_contract(const RewrittenQueryPair& pair) {
    if (text::trim(pair.simplified).empty() || text::trim(pair.detailed).empty()) {
        throw Error(ErrorKind::ContractViolation, "rewrite returned an empty query");
    }
    if (pair.simplified == pair.detailed) {
        throw Error(ErrorKind::ContractViolation, "simplified and detailed rewrites are identical");
    }
}

}  // namespace

RewrittenQueryPair checked_rewrite(const ModelProvider& provider, const Query& query,
                                   std::size_t instruction_pair_id, std::size_t sample_index) {
    for (int attempt = 0;; ++attempt) {
        try {
            auto pair = provider.rewrite(query, instruction_pair_id, sample_index);
            check_rewrite_contract(pair);
            return pair;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ContractViolation || attempt >= 1) {
                throw;
            }
        }
    }
}

std::string_view to_string(ProviderKind kind) {
    switch (kind) {
        case ProviderKind::Http: return "http";
        case ProviderKind::FileBacked: return "file";
        case ProviderKind::Mock: return "mock";
    }
    return "unknown";
}

ProviderKind provider_kind_from_string(std::string_view s) {
    if (s == "http") return ProviderKind::Http;
    if (s == "file" || s == "file-backed") return ProviderKind::FileBacked;
    if (s == "mock") return ProviderKind::Mock;
    throw Error(ErrorKind::ConfigError, "unknown provider kind '" + std::string(s) + "'");
}

void ProviderSpec::validate() const {
    if (kind == ProviderKind::Http && !endpoint && http.endpoint.empty()) {
        throw Error(ErrorKind::ConfigError, "http provider requires an endpoint");
    }
    if (kind == ProviderKind::FileBacked && !cache_dir) {
        throw Error(ErrorKind::ConfigError, "file-backed provider requires a cache directory");
    }
}

std::unique_ptr<ModelProvider> make_provider(const ProviderSpec& spec) {
    spec.validate();
    std::unique_ptr<ModelProvider> base;
    switch (spec.kind) {
        case ProviderKind::FileBacked:
            return std::make_unique<FileBackedProvider>(*spec.cache_dir);
        case ProviderKind::Mock:
            base = std::make_unique<MockProvider>(
                spec.seed.value_or(0),
                spec.mock_scene ? MockScene::load(*spec.mock_scene) : MockScene{});
            break;
        case ProviderKind::Http: {
            HttpOptions opts = spec.http;
            if (spec.endpoint) opts.endpoint = *spec.endpoint;
            if (spec.auth_token_env) opts.auth_token_env = spec.auth_token_env;
            if (spec.model_name) {
                for (auto* field : {&opts.chat_model, &opts.caption_model, &opts.embed_model,
                                    &opts.similarity_model}) {
                    if (field->empty()) *field = *spec.model_name;
                }
            }
            base = std::make_unique<HttpProvider>(std::move(opts));
            break;
        }
    }
    if (spec.cache_dir) {
        return std::make_unique<CachingProvider>(std::move(base), *spec.cache_dir);
    }
    return base;
}

}  // namespace granalign
