#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <istream>
#include <thread>

#include "morpho/cli.hpp"
#include "morpho/error.hpp"

namespace morpho::cli {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Drops a trailing comment that is not inside double quotes.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (!quoted && line[i] == '#') return line.substr(0, i);
    }
    return line;
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& origin) {
    ConfigFile cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        const std::string t = trim(strip_comment(line));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3) throw ConfigError(where + ": malformed section header");
            section = trim(std::string_view(t).substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        std::string key = trim(std::string_view(t).substr(0, eq));
        std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        std::replace(key.begin(), key.end(), '-', '_');
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        auto& target = section.empty() ? cfg.global : cfg.sections[section];
        if (!target.emplace(key, value).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    return parse(in, path.string());
}

std::optional<std::string> ConfigFile::find(const std::string& command, const std::string& key) const {
    if (auto s = sections.find(command); s != sections.end()) {
        if (auto v = s->second.find(key); v != s->second.end()) return v->second;
    }
    if (auto v = global.find(key); v != global.end()) return v->second;
    return std::nullopt;
}

int worker_count(int requested) {
    if (requested < 0) throw ConfigError("thread count must be >= 0");
    int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("MORPHO_THREADS"); env && *env) {
        int cap = 0;
        const std::string_view s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
        if (ec != std::errc() || ptr != s.data() + s.size() || cap < 1)
            throw ConfigError("MORPHO_THREADS must be a positive integer");
        n = std::min(n, cap);
    }
    return std::max(1, n);
}

std::string timestamp_now() {
    std::time_t t = std::time(nullptr);
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
        long long v = 0;
        const std::string_view s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && ptr == s.data() + s.size()) t = static_cast<std::time_t>(v);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace morpho::cli
