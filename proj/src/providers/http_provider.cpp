#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <semaphore>

#include <json.hpp>

#include "granalign/providers.hpp"
#include "granalign/text.hpp"

namespace granalign {

namespace {

using nlohmann::json;

struct EndpointParts {
    std::string origin;     // scheme://host[:port]
    std::string api_prefix; // path prefix ending in /v1
};

EndpointParts split_endpoint(std::string endpoint) {
    while (!endpoint.empty() && endpoint.back() == '/') endpoint.pop_back();
    const auto scheme_end = endpoint.find("://");
    const auto path_start =
        endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    EndpointParts parts;
    parts.origin = endpoint.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "" : endpoint.substr(path_start);
    if (path.size() < 3 || path.compare(path.size() - 3, 3, "/v1") != 0) {
        path += "/v1";
    }
    parts.api_prefix = path;
    return parts;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
    }
    return s;
}

/// Pulls the first JSON object out of a chat reply (models often wrap it in prose or fences).
json extract_json_object(const std::string& content) {
    const auto open = content.find('{');
    const auto close = content.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open) {
        throw Error(ErrorKind::ContractViolation, "reply contains no JSON object");
    }
    try {
        return json::parse(content.substr(open, close - open + 1));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ContractViolation, std::string("reply JSON malformed: ") + e.what());
    }
}

std::vector<std::string> string_list(const json& j, const char* key) {
    std::vector<std::string> out;
    if (!j.contains(key) || !j.at(key).is_array()) return out;
    for (const auto& item : j.at(key)) {
        if (item.is_string() && !text::trim(item.get<std::string>()).empty()) {
            out.push_back(text::trim(item.get<std::string>()));
        }
    }
    return out;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) {
        throw Error(ErrorKind::ContractViolation, "similarity embeddings differ in dimension");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) {
        throw Error(ErrorKind::ContractViolation, "similarity embedding has zero norm");
    }
    return dot / std::sqrt(na * nb);
}

}  // namespace

struct HttpProvider::Impl {
    HttpOptions options;
    EndpointParts endpoint;
    std::optional<std::string> token;
    mutable std::counting_semaphore<1024> in_flight;
    mutable std::mutex dim_mutex;
    mutable std::size_t embed_dim{0};

    explicit Impl(HttpOptions opts)
        : options(std::move(opts)),
          endpoint(split_endpoint(options.endpoint)),
          in_flight(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options.max_in_flight, 1, 1024))) {
        if (options.auth_token_env) {
            if (const char* v = std::getenv(options.auth_token_env->c_str())) {
                token = v;
            }
        }
    }

    json post(const std::string& route, const json& body) const {
        in_flight.acquire();
        struct Release {
            std::counting_semaphore<1024>& s;
            ~Release() { s.release(); }
        } release{in_flight};

        httplib::Client client(endpoint.origin);
        client.set_connection_timeout(std::min(options.timeout_s, 10), 0);
        client.set_read_timeout(options.timeout_s, 0);
        httplib::Headers headers;
        if (token) {
            headers.emplace("Authorization", "Bearer " + *token);
        }
        const auto path = endpoint.api_prefix + route;
        auto res = client.Post(path, headers, body.dump(), "application/json");
        if (!res) {
            throw Error(ErrorKind::RemoteUnavailable,
                        endpoint.origin + path + ": " + httplib::to_string(res.error()));
        }
        if (res->status < 200 || res->status >= 300) {
            throw Error(ErrorKind::RemoteUnavailable,
                        endpoint.origin + path + " returned HTTP " + std::to_string(res->status));
        }
        try {
            return json::parse(res->body);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::ContractViolation,
                        "malformed response from " + path + ": " + e.what());
        }
    }

    std::string chat(const std::string& model, json messages) const {
        json body = {{"model", model}, {"messages", std::move(messages)}};
        const auto reply = post("/chat/completions", body);
        try {
            return reply.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw Error(ErrorKind::ContractViolation,
                        std::string("chat completion missing content: ") + e.what());
        }
    }

    std::vector<std::vector<double>> embeddings(const std::string& model, json input) const {
        const auto reply = post("/embeddings", {{"model", model}, {"input", std::move(input)}});
        std::vector<std::vector<double>> out;
        try {
            for (const auto& item : reply.at("data")) {
                out.push_back(item.at("embedding").get<std::vector<double>>());
            }
        } catch (const json::exception& e) {
            throw Error(ErrorKind::ContractViolation,
                        std::string("embedding response malformed: ") + e.what());
        }
        return out;
    }
};

HttpProvider::HttpProvider(HttpOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
    if (impl_->options.endpoint.empty()) {
        throw Error(ErrorKind::ConfigError, "http provider requires an endpoint");
    }
}

HttpProvider::~HttpProvider() = default;

std::string HttpProvider::frame_url(const VideoMeta& video, std::size_t frame_index) const {
    auto url = replace_all(impl_->options.frame_url_template, "{video_id}", video.video_id);
    url = replace_all(std::move(url), "{frame}", std::to_string(frame_index));
    char time_buf[32];
    std::snprintf(time_buf, sizeof(time_buf), "%.3f",
                  static_cast<double>(frame_index) / video.fps);
    return replace_all(std::move(url), "{time}", time_buf);
}

RewrittenQueryPair HttpProvider::rewrite(const Query& query, std::size_t instruction_pair_id,
                                         std::size_t sample_index) const {
    const auto& pair = instruction_pair(instruction_pair_id);
    const std::string system =
        "You rewrite search queries for finding moments in videos. Produce two rewrites of the "
        "user's query.\nSimplified rewrite: " + pair.simplified_instruction +
        "\nDetailed rewrite: " + pair.detailed_instruction +
        "\nAnswer only with a JSON object {\"simplified\": \"...\", \"detailed\": \"...\"}.";
    const std::string user = "Variation #" + std::to_string(sample_index + 1) +
                             ".\nQuery: " + query.text;
    const auto content = impl_->chat(impl_->options.chat_model,
                                     json::array({{{"role", "system"}, {"content", system}},
                                                  {{"role", "user"}, {"content", user}}}));
    const auto j = extract_json_object(content);
    if (!j.contains("simplified") || !j.contains("detailed") || !j["simplified"].is_string() ||
        !j["detailed"].is_string()) {
        throw Error(ErrorKind::ContractViolation, "rewrite reply lacks simplified/detailed");
    }
    return RewrittenQueryPair{text::trim(j["simplified"].get<std::string>()),
                              text::trim(j["detailed"].get<std::string>())};
}

Caption HttpProvider::caption_frame(const VideoMeta& video, std::size_t frame_index,
                                    const SemanticGuidance* guidance) const {
    if (frame_index >= video.frame_count) {
        throw Error(ErrorKind::InvalidArgument, "frame index out of range");
    }
    std::string instruction = "Describe this video frame in one sentence.";
    if (guidance) {
        instruction += " Pay particular attention to these entities: " +
                       text::join(guidance->entities, ", ") +
                       "; and these actions: " + text::join(guidance->actions, ", ") +
                       ". Mention them only if they are visible.";
    }
    json content = json::array(
        {{{"type", "text"}, {"text", instruction}},
         {{"type", "image_url"}, {"image_url", {{"url", frame_url(video, frame_index)}}}}});
    auto reply = text::trim(impl_->chat(impl_->options.caption_model,
                                        json::array({{{"role", "user"}, {"content", content}}})));
    if (reply.empty()) {
        throw Error(ErrorKind::ContractViolation, "empty caption");
    }
    if (guidance) {
        return Caption{std::move(reply), CaptionMode::Aware, guidance->fingerprint()};
    }
    return Caption{std::move(reply), CaptionMode::Agnostic, std::nullopt};
}

Embedding HttpProvider::embed(std::string_view input) const {
    auto vectors = impl_->embeddings(impl_->options.embed_model, std::string(input));
    if (vectors.size() != 1) {
        throw Error(ErrorKind::ContractViolation, "expected exactly one embedding");
    }
    auto e = normalized(std::move(vectors.front()));
    std::lock_guard lock(impl_->dim_mutex);
    if (impl_->embed_dim == 0) {
        impl_->embed_dim = e.dim();
    } else if (impl_->embed_dim != e.dim()) {
        throw Error(ErrorKind::ContractViolation, "embedding dimension changed between calls");
    }
    return e;
}

double HttpProvider::frame_query_similarity(const VideoMeta& video, std::size_t frame_index,
                                            std::string_view query_text) const {
    // Multimodal embedding servers accept image URLs and text in one input list.
    auto vectors = impl_->embeddings(
        impl_->options.similarity_model,
        json::array({std::string(query_text), frame_url(video, frame_index)}));
    if (vectors.size() != 2) {
        throw Error(ErrorKind::ContractViolation, "expected query and frame embeddings");
    }
    return cosine(vectors[0], vectors[1]);
}

std::optional<SemanticGuidance> HttpProvider::extract_guidance(const Query& query) const {
    const std::string prompt =
        "List the key entities (people, animals, objects, places) and actions in this video "
        "search query, using words from the query. Answer only with a JSON object "
        "{\"entities\": [...], \"actions\": [...]}.\nQuery: " + query.text;
    const auto content = impl_->chat(impl_->options.chat_model,
                                     json::array({{{"role", "user"}, {"content", prompt}}}));
    const auto j = extract_json_object(content);
    return SemanticGuidance{string_list(j, "entities"), string_list(j, "actions")};
}

std::optional<bool> HttpProvider::has_grammar_error(const Query& query) const {
    if (!impl_->options.grammar_check) return std::nullopt;
    const std::string prompt =
        "Does this sentence contain spelling or grammatical errors? Answer only with a JSON "
        "object {\"has_error\": true|false}.\nSentence: " + query.text;
    const auto content = impl_->chat(impl_->options.chat_model,
                                     json::array({{{"role", "user"}, {"content", prompt}}}));
    const auto j = extract_json_object(content);
    if (!j.contains("has_error") || !j["has_error"].is_boolean()) {
        throw Error(ErrorKind::ContractViolation, "grammar reply lacks has_error");
    }
    return j["has_error"].get<bool>();
}

}  // namespace granalign
