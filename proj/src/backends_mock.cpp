#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "langweave/backends.hpp"
#include "langweave/errors.hpp"
#include "langweave/util.hpp"

namespace langweave::backends {

std::chrono::milliseconds RetryPolicy::backoff_for(size_t attempt) const {
    double ms = static_cast<double>(initial_backoff.count());
    for (size_t i = 1; i < attempt; ++i) ms *= multiplier;
    return std::chrono::milliseconds(static_cast<long long>(ms));
}

std::string prompt_payload(std::string_view prompt) {
    static constexpr std::string_view in_marker = "Input:\n";
    static constexpr std::string_view out_marker = "\nExpected Output:\n";
    if (prompt.size() < out_marker.size() ||
        prompt.substr(prompt.size() - out_marker.size()) != out_marker) {
        return std::string(prompt);
    }
    std::string_view body = prompt.substr(0, prompt.size() - out_marker.size());
    size_t pos = body.rfind(in_marker);
    if (pos == std::string_view::npos) return std::string(prompt);
    return std::string(body.substr(pos + in_marker.size()));
}

namespace {

constexpr std::string_view kTagOpen = "⟦";   // ⟦
constexpr std::string_view kTagClose = "⟧";  // ⟧

// Stable per-token decision value in [0,1000).
uint32_t token_roll(std::string_view token, size_t index, std::string_view salt) {
    std::string key;
    key.reserve(token.size() + salt.size() + 24);
    key.append(token);
    key.push_back('#');
    key.append(std::to_string(index));
    key.push_back('#');
    key.append(salt);
    std::string hex = util::sha256_hex(key);
    uint32_t v = 0;
    for (size_t i = 0; i < 8; ++i) {
        char c = hex[i];
        v = v * 16 + static_cast<uint32_t>(c <= '9' ? c - '0' : c - 'a' + 10);
    }
    return v % 1000;
}

std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out.append(tokens[i]);
    }
    return out;
}

bool has_tag(std::string_view token) {
    if (!util::starts_with(token, kTagOpen)) return false;
    return token.find(kTagClose) != std::string_view::npos;
}

std::string strip_tag(std::string_view token) {
    size_t close = token.find(kTagClose);
    return std::string(token.substr(close + kTagClose.size()));
}

class IdentityBackend final : public TranslationBackend {
public:
    std::string name() const override { return "identity"; }
    std::string translate(const TranslateRequest& req) override {
        return prompt_payload(req.prompt);
    }
};

// Prefixes every token with ⟦lang⟧ on the way out; a fully tagged payload is
// decoded back to the original tokens, which makes forward + back translation
// a lossless round trip.
class BijectiveBackend final : public TranslationBackend {
public:
    std::string name() const override { return "bijective"; }
    std::string translate(const TranslateRequest& req) override {
        std::string payload = prompt_payload(req.prompt);
        std::vector<std::string> tokens = util::split_ws(payload);
        if (tokens.empty()) return payload;
        bool all_tagged = std::all_of(tokens.begin(), tokens.end(),
                                      [](const std::string& t) { return has_tag(t); });
        std::vector<std::string> out;
        out.reserve(tokens.size());
        if (all_tagged) {
            for (const auto& t : tokens) out.push_back(strip_tag(t));
        } else {
            for (const auto& t : tokens) {
                std::string tagged;
                tagged.append(kTagOpen);
                tagged.append(req.target_language);
                tagged.append(kTagClose);
                tagged.append(t);
                out.push_back(std::move(tagged));
            }
        }
        return join(out);
    }
};

class LossyBackend final : public TranslationBackend {
public:
    explicit LossyBackend(double rate) : rate_(rate) {}
    std::string name() const override {
        std::ostringstream ss;
        ss << "lossy:" << rate_;
        return ss.str();
    }
    std::string translate(const TranslateRequest& req) override {
        std::string payload = prompt_payload(req.prompt);
        std::vector<std::string> tokens = util::split_ws(payload);
        if (tokens.empty()) return payload;
        auto cut = static_cast<uint32_t>(std::lround(rate_ * 1000.0));
        std::vector<std::string> kept;
        for (size_t i = 0; i < tokens.size(); ++i)
            if (token_roll(tokens[i], i, "lossy") >= cut) kept.push_back(tokens[i]);
        if (kept.empty()) kept.push_back(tokens.front());
        return join(kept);
    }

private:
    double rate_;
};

class CorruptBackend final : public TranslationBackend {
public:
    explicit CorruptBackend(double rate) : rate_(rate) {}
    std::string name() const override {
        std::ostringstream ss;
        ss << "corrupt:" << rate_;
        return ss.str();
    }
    std::string translate(const TranslateRequest& req) override {
        double rate = rate_;
        // Per-request override: a "corruption-rate: X" directive anywhere in
        // the prompt (typically planted via a preamble constraint).
        size_t pos = req.prompt.find("corruption-rate:");
        if (pos != std::string::npos) {
            const char* start = req.prompt.c_str() + pos + 16;
            char* end = nullptr;
            double v = std::strtod(start, &end);
            if (end != start && v >= 0.0 && v <= 1.0) rate = v;
        }
        std::string payload = prompt_payload(req.prompt);
        std::vector<std::string> tokens = util::split_ws(payload);
        if (tokens.empty()) return payload;
        auto cut = static_cast<uint32_t>(std::lround(rate * 1000.0));
        size_t mangled = 0;
        for (size_t i = 0; i < tokens.size(); ++i) {
            if (token_roll(tokens[i], i, "corrupt") < cut) {
                tokens[i] = mangle(tokens[i]);
                ++mangled;
            }
        }
        if (rate > 0.0 && mangled == 0) tokens[0] = mangle(tokens[0]);
        return join(tokens);
    }

private:
    static std::string mangle(const std::string& token) {
        return "⊘" + token;  // ⊘token never matches the original
    }
    double rate_;
};

class FlakyBackend final : public TranslationBackend {
public:
    explicit FlakyBackend(size_t every) : every_(every == 0 ? 1 : every) {}
    std::string name() const override { return "flaky:" + std::to_string(every_); }
    std::string translate(const TranslateRequest& req) override {
        size_t n = calls_.fetch_add(1) + 1;
        if (n % every_ == 0)
            throw BackendError("flaky mock induced failure on call " + std::to_string(n));
        return inner_.translate(req);
    }

private:
    size_t every_;
    std::atomic<size_t> calls_{0};
    BijectiveBackend inner_;
};

double parse_rate(std::string_view spec, std::string_view prefix) {
    std::string num(spec.substr(prefix.size()));
    char* end = nullptr;
    double v = std::strtod(num.c_str(), &end);
    if (end == num.c_str() || v < 0.0 || v > 1.0)
        throw ConfigError("bad rate in backend spec '" + std::string(spec) + "'");
    return v;
}

}  // namespace

bool is_mock_translator_name(std::string_view spec) {
    return spec == "identity" || spec == "bijective" ||
           util::starts_with(spec, "lossy:") || util::starts_with(spec, "corrupt:") ||
           util::starts_with(spec, "flaky:");
}

std::unique_ptr<TranslationBackend> make_mock_translator(std::string_view spec) {
    if (spec == "identity") return std::make_unique<IdentityBackend>();
    if (spec == "bijective") return std::make_unique<BijectiveBackend>();
    if (util::starts_with(spec, "lossy:"))
        return std::make_unique<LossyBackend>(parse_rate(spec, "lossy:"));
    if (util::starts_with(spec, "corrupt:"))
        return std::make_unique<CorruptBackend>(parse_rate(spec, "corrupt:"));
    if (util::starts_with(spec, "flaky:")) {
        std::string num(spec.substr(6));
        long k = std::strtol(num.c_str(), nullptr, 10);
        if (k <= 0) throw ConfigError("bad interval in backend spec '" + std::string(spec) + "'");
        return std::make_unique<FlakyBackend>(static_cast<size_t>(k));
    }
    throw ConfigError("unknown mock translation backend '" + std::string(spec) + "'");
}

namespace {

class SafeImageBackend final : public ImageSafetyBackend {
public:
    std::string name() const override { return "safe"; }
    ImageSafetyResult assess(const std::string&, const std::string&) override {
        return {"safe", "", ""};
    }
};

// Image paths may carry a planted marker "#unsafe:<category>[:borderline]".
class MarkerImageBackend final : public ImageSafetyBackend {
public:
    std::string name() const override { return "marker"; }
    ImageSafetyResult assess(const std::string&, const std::string& image) override {
        size_t pos = image.find("#unsafe:");
        if (pos == std::string::npos) return {"safe", "", ""};
        std::string tail = image.substr(pos + 8);
        bool borderline = false;
        size_t colon = tail.find(':');
        std::string category = tail;
        if (colon != std::string::npos) {
            category = tail.substr(0, colon);
            borderline = tail.substr(colon + 1) == "borderline";
        }
        ImageSafetyResult r;
        r.rating = "unsafe";
        r.category = category.empty() ? "other" : category;
        r.rationale = "matched unsafe marker for category " + r.category +
                      (borderline ? " (borderline)" : "");
        return r;
    }
};

class ZeroTextBackend final : public TextToxicityBackend {
public:
    std::string name() const override { return "zero"; }
    std::map<std::string, double> score(const std::string&) override { return {}; }
};

// Captions may carry "[toxic:<category>]" or "[toxic:<category>:<conf>]".
class MarkerTextBackend final : public TextToxicityBackend {
public:
    std::string name() const override { return "marker"; }
    std::map<std::string, double> score(const std::string& text) override {
        std::map<std::string, double> scores;
        size_t pos = 0;
        while ((pos = text.find("[toxic:", pos)) != std::string::npos) {
            size_t end = text.find(']', pos);
            if (end == std::string::npos) break;
            std::string body = text.substr(pos + 7, end - pos - 7);
            double conf = 0.95;
            std::string category = body;
            size_t colon = body.find(':');
            if (colon != std::string::npos) {
                category = body.substr(0, colon);
                char* e = nullptr;
                double v = std::strtod(body.c_str() + colon + 1, &e);
                if (e != body.c_str() + colon + 1 && v >= 0.0 && v <= 1.0) conf = v;
            }
            if (!category.empty()) {
                auto it = scores.find(category);
                if (it == scores.end() || it->second < conf) scores[category] = conf;
            }
            pos = end + 1;
        }
        return scores;
    }
};

class ConfirmJudge final : public JudgeBackend {
public:
    std::string name() const override { return "confirm"; }
    JudgeVerdict arbitrate(const std::string&, const std::string&,
                           const ImageSafetyResult&) override {
        return {true, "confirmed by policy"};
    }
};

class ClearBorderlineJudge final : public JudgeBackend {
public:
    std::string name() const override { return "clear-borderline"; }
    JudgeVerdict arbitrate(const std::string&, const std::string&,
                           const ImageSafetyResult& finding) override {
        if (finding.rationale.find("borderline") != std::string::npos)
            return {false, "cleared: rationale marks a borderline case"};
        return {true, "confirmed: no borderline indication"};
    }
};

class ClearCategoryJudge final : public JudgeBackend {
public:
    explicit ClearCategoryJudge(std::string category) : category_(std::move(category)) {}
    std::string name() const override { return "clear-category:" + category_; }
    JudgeVerdict arbitrate(const std::string&, const std::string&,
                           const ImageSafetyResult& finding) override {
        if (finding.category == category_)
            return {false, "cleared: category " + category_ + " is exempt"};
        return {true, "confirmed"};
    }

private:
    std::string category_;
};

}  // namespace

bool is_mock_image_safety_name(std::string_view spec) {
    return spec == "safe" || spec == "marker";
}

std::unique_ptr<ImageSafetyBackend> make_mock_image_safety(std::string_view spec) {
    if (spec == "safe") return std::make_unique<SafeImageBackend>();
    if (spec == "marker") return std::make_unique<MarkerImageBackend>();
    throw ConfigError("unknown mock image-safety backend '" + std::string(spec) + "'");
}

bool is_mock_text_toxicity_name(std::string_view spec) {
    return spec == "zero" || spec == "marker";
}

std::unique_ptr<TextToxicityBackend> make_mock_text_toxicity(std::string_view spec) {
    if (spec == "zero") return std::make_unique<ZeroTextBackend>();
    if (spec == "marker") return std::make_unique<MarkerTextBackend>();
    throw ConfigError("unknown mock caption-toxicity backend '" + std::string(spec) + "'");
}

bool is_mock_judge_name(std::string_view spec) {
    return spec == "confirm" || spec == "clear-borderline" ||
           util::starts_with(spec, "clear-category:");
}

std::unique_ptr<JudgeBackend> make_mock_judge(std::string_view spec) {
    if (spec == "confirm") return std::make_unique<ConfirmJudge>();
    if (spec == "clear-borderline") return std::make_unique<ClearBorderlineJudge>();
    if (util::starts_with(spec, "clear-category:"))
        return std::make_unique<ClearCategoryJudge>(std::string(spec.substr(15)));
    throw ConfigError("unknown mock judge backend '" + std::string(spec) + "'");
}

}  // namespace langweave::backends
