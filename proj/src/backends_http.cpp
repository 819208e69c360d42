#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "langweave/backends.hpp"
#include "langweave/errors.hpp"

namespace langweave::backends {

using json = nlohmann::ordered_json;

namespace {

// Splits "http://host:port/prefix" into client target and path prefix.
struct ParsedBase {
    std::string origin;  // scheme://host:port
    std::string prefix;  // possibly empty, no trailing slash
};

ParsedBase parse_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("backend base_url must include a scheme: " + base_url);
    auto path_begin = base_url.find('/', scheme_end + 3);
    ParsedBase p;
    if (path_begin == std::string::npos) {
        p.origin = base_url;
    } else {
        p.origin = base_url.substr(0, path_begin);
        p.prefix = base_url.substr(path_begin);
        while (!p.prefix.empty() && p.prefix.back() == '/') p.prefix.pop_back();
    }
    return p;
}

class HttpClientBase {
public:
    explicit HttpClientBase(const HttpBackendConfig& cfg)
        : cfg_(cfg), base_(parse_base_url(cfg.base_url)) {}

protected:
    json post_json(const std::string& endpoint, const json& body) const {
        httplib::Client client(base_.origin);
        auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
        auto rem = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
        client.set_connection_timeout(secs.count(), rem.count());
        client.set_read_timeout(secs.count(), rem.count());
        client.set_write_timeout(secs.count(), rem.count());

        httplib::Headers headers;
        if (!cfg_.auth_env.empty()) {
            const char* token = std::getenv(cfg_.auth_env.c_str());
            if (token && *token)
                headers.emplace("Authorization", std::string("Bearer ") + token);
        }

        auto res = client.Post(base_.prefix + endpoint, headers, body.dump(),
                               "application/json");
        if (!res) {
            throw BackendError("backend '" + cfg_.name + "' unreachable at " +
                               cfg_.base_url + endpoint + ": " +
                               httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            throw BackendError("backend '" + cfg_.name + "' returned HTTP " +
                               std::to_string(res->status) + " for " + endpoint + ": " +
                               res->body.substr(0, 256));
        }
        json parsed = json::parse(res->body, nullptr, false);
        if (parsed.is_discarded())
            throw BackendError("backend '" + cfg_.name + "' returned invalid JSON for " +
                               endpoint);
        return parsed;
    }

    HttpBackendConfig cfg_;
    ParsedBase base_;
};

class HttpTranslator final : public TranslationBackend, private HttpClientBase {
public:
    explicit HttpTranslator(const HttpBackendConfig& cfg) : HttpClientBase(cfg) {}
    std::string name() const override { return cfg_.name; }
    std::string translate(const TranslateRequest& req) override {
        json body = {{"prompt", req.prompt}, {"target_language", req.target_language}};
        json res = post_json("/v1/translate", body);
        if (!res.contains("text") || !res["text"].is_string())
            throw BackendError("backend '" + cfg_.name + "': /v1/translate reply lacks 'text'");
        return res["text"].get<std::string>();
    }
};

class HttpImageSafety final : public ImageSafetyBackend, private HttpClientBase {
public:
    explicit HttpImageSafety(const HttpBackendConfig& cfg) : HttpClientBase(cfg) {}
    std::string name() const override { return cfg_.name; }
    ImageSafetyResult assess(const std::string& record_id, const std::string& image) override {
        json body = {{"record_id", record_id}, {"image", image}};
        json res = post_json("/v1/image-safety", body);
        ImageSafetyResult r;
        r.rating = res.value("rating", "");
        r.category = res.value("category", "");
        r.rationale = res.value("rationale", "");
        if (r.rating.empty())
            throw BackendError("backend '" + cfg_.name + "': /v1/image-safety reply lacks 'rating'");
        return r;
    }
};

class HttpTextToxicity final : public TextToxicityBackend, private HttpClientBase {
public:
    explicit HttpTextToxicity(const HttpBackendConfig& cfg) : HttpClientBase(cfg) {}
    std::string name() const override { return cfg_.name; }
    std::map<std::string, double> score(const std::string& text) override {
        json res = post_json("/v1/text-toxicity", json{{"text", text}});
        if (!res.contains("scores") || !res["scores"].is_object())
            throw BackendError("backend '" + cfg_.name + "': /v1/text-toxicity reply lacks 'scores'");
        std::map<std::string, double> out;
        for (const auto& [k, v] : res["scores"].items()) out[k] = v.get<double>();
        return out;
    }
};

class HttpJudge final : public JudgeBackend, private HttpClientBase {
public:
    explicit HttpJudge(const HttpBackendConfig& cfg) : HttpClientBase(cfg) {}
    std::string name() const override { return cfg_.name; }
    JudgeVerdict arbitrate(const std::string& prompt, const std::string& record_id,
                           const ImageSafetyResult& finding) override {
        json body = {{"prompt", prompt},
                     {"record_id", record_id},
                     {"rating", finding.rating},
                     {"category", finding.category},
                     {"rationale", finding.rationale}};
        json res = post_json("/v1/judge", body);
        if (!res.contains("confirmed") || !res["confirmed"].is_boolean())
            throw BackendError("backend '" + cfg_.name + "': /v1/judge reply lacks 'confirmed'");
        return {res["confirmed"].get<bool>(), res.value("rationale", "")};
    }
};

}  // namespace

std::unique_ptr<TranslationBackend> make_http_translator(const HttpBackendConfig& cfg) {
    return std::make_unique<HttpTranslator>(cfg);
}

std::unique_ptr<ImageSafetyBackend> make_http_image_safety(const HttpBackendConfig& cfg) {
    return std::make_unique<HttpImageSafety>(cfg);
}

std::unique_ptr<TextToxicityBackend> make_http_text_toxicity(const HttpBackendConfig& cfg) {
    return std::make_unique<HttpTextToxicity>(cfg);
}

std::unique_ptr<JudgeBackend> make_http_judge(const HttpBackendConfig& cfg) {
    return std::make_unique<HttpJudge>(cfg);
}

}  // namespace langweave::backends
