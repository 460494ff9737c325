#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "morpho/csv.hpp"
#include "morpho/error.hpp"
#include "morpho/ingest.hpp"

namespace morpho::ingest {

namespace {

constexpr std::array<const char*, 5> kPeriodNames = {"Baroque", "Classical", "Romantic",
                                                     "Impressionist", "Modern"};

std::optional<std::string> optional_field(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return s;
}

std::string strip_bom(std::string s) {
    if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xEF &&
        static_cast<unsigned char>(s[1]) == 0xBB && static_cast<unsigned char>(s[2]) == 0xBF)
        s.erase(0, 3);
    return s;
}

}  // namespace

const char* to_string(Period p) { return kPeriodNames[static_cast<std::size_t>(p)]; }

std::optional<Period> parse_period(std::string_view s) {
    for (std::size_t i = 0; i < kPeriodNames.size(); ++i)
        if (s == kPeriodNames[i]) return static_cast<Period>(i);
    return std::nullopt;
}

Period PeriodTable::classify(int year) const {
    for (std::size_t i = 0; i < upper.size(); ++i)
        if (year <= upper[i]) return static_cast<Period>(i);
    return Period::Modern;
}

PeriodTable PeriodTable::parse(std::string_view text) {
    PeriodTable t;
    std::size_t k = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string_view tok = text.substr(pos, comma - pos);
        int v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size() || k >= t.upper.size())
            throw ConfigError("period table must be four comma-separated years, got '" +
                              std::string(text) + "'");
        t.upper[k++] = v;
        pos = comma + 1;
    }
    if (k != t.upper.size()) throw ConfigError("period table needs exactly four boundaries");
    for (std::size_t i = 1; i < t.upper.size(); ++i)
        if (t.upper[i] <= t.upper[i - 1]) throw ConfigError("period boundaries must increase");
    return t;
}

std::vector<Metadata> parse_metadata(std::istream& in, const PeriodTable& periods) {
    std::vector<std::string> row;
    if (!csv::read_row(in, row)) throw ParseError("metadata: empty file");
    if (!row.empty()) row[0] = strip_bom(row[0]);
    const std::vector<std::string> expected = {"id", "maker", "country", "year"};
    if (row != expected) throw ParseError("metadata: header must be id,maker,country,year");

    std::vector<Metadata> out;
    std::set<std::string> seen;
    std::size_t line = 1;
    while (csv::read_row(in, row)) {
        ++line;
        if (row.size() == 1 && row[0].empty()) continue;
        const std::string where = "metadata row " + std::to_string(line);
        if (row.size() != 4) throw ParseError(where + ": expected 4 fields, got " + std::to_string(row.size()));
        if (row[0].empty()) throw ParseError(where + ": empty id");

        Metadata m;
        m.id = row[0];
        m.maker = optional_field(row[1]);
        m.country = optional_field(row[2]);
        if (!row[3].empty()) {
            int y = 0;
            const auto& f = row[3];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), y);
            if (ec != std::errc() || ptr != f.data() + f.size())
                throw ParseError(where + ": malformed year '" + f + "'");
            if (y < kMinYear || y > kMaxYear)
                throw ParseError(where + ": year " + f + " outside [1400, 2100]");
            m.year = y;
            m.period = periods.classify(y);
        }
        if (!seen.insert(m.id).second) throw DuplicateIdError("duplicate id '" + m.id + "' at " + where);
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<Metadata> load_metadata(const std::filesystem::path& path, const PeriodTable& periods) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_metadata(in, periods);
}

void write_metadata(std::ostream& out, std::span<const Metadata> rows) {
    csv::write_row(out, {"id", "maker", "country", "year"});
    for (const auto& m : rows) {
        csv::write_row(out, {m.id, m.maker.value_or(""), m.country.value_or(""),
                             m.year ? std::to_string(*m.year) : std::string()});
    }
}

}  // namespace morpho::ingest
