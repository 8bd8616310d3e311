#include "pathfinder/ntml.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>

#include "pathfinder/error.hpp"
#include "pathfinder/io.hpp"
#include "pathfinder/sim.hpp"

namespace pathfinder {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

std::string lower_label(Label label) {
    std::string name = to_string(label);
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    return name;
}

std::string_view trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

}  // namespace

void LogRecord::validate() const {
    require(!trim(comment).empty(), ErrorCode::invalid_argument, "log comment is empty");
}

std::string to_string(Label label) {
    switch (label) {
        case Label::assigned: return "Assigned";
        case Label::requested: return "Requested";
        case Label::rejected: return "Rejected";
        case Label::failed: return "Failed";
        case Label::mentioned: return "Mentioned";
    }
    return "Mentioned";
}

Label label_from_string(std::string_view text) {
    for (Label label : kAllLabels) {
        if (to_string(label) == text) {
            return label;
        }
    }
    fail(ErrorCode::parse_error, "unknown label '" + std::string(text) + "'");
}

std::string normalize_comment(std::string_view text) {
    // Fold U+2018/U+2019 (E2 80 98/99) to an ASCII apostrophe first.
    std::string folded;
    folded.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE2 &&
            static_cast<unsigned char>(text[i + 1]) == 0x80 &&
            (static_cast<unsigned char>(text[i + 2]) == 0x98 || static_cast<unsigned char>(text[i + 2]) == 0x99)) {
            folded += '\'';
            i += 2;
        } else {
            folded += text[i];
        }
    }

    std::string out;
    out.reserve(folded.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < folded.size(); ++i) {
        const auto c = static_cast<unsigned char>(folded[i]);
        bool keep = is_word_char(c);
        if (c == '\'') {
            keep = i > 0 && i + 1 < folded.size() && is_word_char(static_cast<unsigned char>(folded[i - 1])) &&
                   is_word_char(static_cast<unsigned char>(folded[i + 1]));
        }
        if (!keep) {
            pending_space = true;
            continue;
        }
        if (pending_space && !out.empty()) {
            out += ' ';
        }
        pending_space = false;
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

namespace {

int parse_digits(std::string_view text, std::size_t pos, std::size_t count, std::string_view whole) {
    int value = 0;
    if (pos + count > text.size()) {
        fail(ErrorCode::parse_error, "truncated timestamp '" + std::string(whole) + "'");
    }
    const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + count, value);
    if (ec != std::errc{} || ptr != text.data() + pos + count) {
        fail(ErrorCode::parse_error, "malformed timestamp '" + std::string(whole) + "'");
    }
    return value;
}

void expect_char(std::string_view text, std::size_t pos, std::string_view allowed, std::string_view whole) {
    if (pos >= text.size() || allowed.find(text[pos]) == std::string_view::npos) {
        fail(ErrorCode::parse_error, "malformed timestamp '" + std::string(whole) + "'");
    }
}

}  // namespace

std::chrono::sys_seconds parse_timestamp(std::string_view raw) {
    using namespace std::chrono;
    const std::string_view text = trim(raw);
    const int y = parse_digits(text, 0, 4, raw);
    expect_char(text, 4, "-", raw);
    const int mo = parse_digits(text, 5, 2, raw);
    expect_char(text, 7, "-", raw);
    const int d = parse_digits(text, 8, 2, raw);
    expect_char(text, 10, "T ", raw);
    const int hh = parse_digits(text, 11, 2, raw);
    expect_char(text, 13, ":", raw);
    const int mm = parse_digits(text, 14, 2, raw);
    std::size_t pos = 16;
    int ss = 0;
    if (pos < text.size() && text[pos] == ':') {
        ss = parse_digits(text, pos + 1, 2, raw);
        pos += 3;
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            const std::size_t start = pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
                ++pos;
            }
            require(pos > start, ErrorCode::parse_error, "malformed fractional seconds in '" + std::string(raw) + "'");
        }
    }
    int offset_minutes = 0;
    if (pos < text.size()) {
        if (text[pos] == 'Z' || text[pos] == 'z') {
            ++pos;
        } else if (text[pos] == '+' || text[pos] == '-') {
            const int sign = text[pos] == '+' ? 1 : -1;
            const int oh = parse_digits(text, pos + 1, 2, raw);
            expect_char(text, pos + 3, ":", raw);
            const int om = parse_digits(text, pos + 4, 2, raw);
            offset_minutes = sign * (oh * 60 + om);
            pos += 6;
        }
    }
    require(pos == text.size(), ErrorCode::parse_error, "trailing characters in timestamp '" + std::string(raw) + "'");

    const year_month_day date{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    require(date.ok() && hh < 24 && mm < 60 && ss < 61, ErrorCode::parse_error,
            "timestamp out of range '" + std::string(raw) + "'");
    return sys_days{date} + hours{hh} + minutes{mm - offset_minutes} + seconds{ss};
}

std::string format_timestamp(std::chrono::sys_seconds ts) {
    using namespace std::chrono;
    const auto day_start = floor<days>(ts);
    const year_month_day date{day_start};
    const hh_mm_ss time{ts - day_start};
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                  static_cast<int>(time.hours().count()), static_cast<int>(time.minutes().count()),
                  static_cast<int>(time.seconds().count()));
    return buffer;
}

// --- rules -----------------------------------------------------------------

namespace {

std::regex compile(const std::string& source, const std::string& where) {
    try {
        return std::regex(source, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    } catch (const std::regex_error& e) {
        fail(ErrorCode::parse_error, "rules: invalid regex in " + where + ": " + e.what());
    }
}

std::vector<Pattern> parse_patterns(const nlohmann::json& list, const std::string& key) {
    require(list.is_array(), ErrorCode::parse_error, "rules: '" + key + "' patterns must be a list");
    std::vector<Pattern> patterns;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& entry = list[i];
        const std::string where = "'" + key + "'[" + std::to_string(i) + "]";
        if (entry.is_string()) {
            Pattern p;
            p.source = normalize_comment(entry.get<std::string>());
            require(!p.source.empty(), ErrorCode::parse_error, "rules: empty keyword at " + where);
            patterns.push_back(std::move(p));
        } else if (entry.is_object() && entry.size() == 1 && entry.contains("regex") && entry["regex"].is_string()) {
            Pattern p;
            p.source = entry["regex"].get<std::string>();
            require(!p.source.empty(), ErrorCode::parse_error, "rules: empty regex at " + where);
            p.regex = compile(p.source, where);
            patterns.push_back(std::move(p));
        } else {
            fail(ErrorCode::parse_error, "rules: entry " + where + " must be a keyword string or {\"regex\": ...}");
        }
    }
    return patterns;
}

}  // namespace

RuleSet RuleSet::from_json(const nlohmann::json& doc) {
    require(doc.is_object(), ErrorCode::parse_error, "rules: document must be a JSON object");
    RuleSet set;
    for (Label label : kRulePrecedence) {
        set.rules_.push_back({label, label == Label::assigned, {}});
    }
    for (const auto& [key, value] : doc.items()) {
        if (key == "flight_number") {
            require(value.is_string(), ErrorCode::parse_error, "rules: 'flight_number' must be a regex string");
            set.flight_number_source_ = value.get<std::string>();
            continue;
        }
        if (key == "Mentioned") {
            require(value.is_array() && value.empty(), ErrorCode::parse_error,
                    "rules: 'Mentioned' is the fallback label and takes no patterns");
            continue;
        }
        const auto it = std::find_if(set.rules_.begin(), set.rules_.end(),
                                     [&key](const LabelRule& r) { return to_string(r.label) == key; });
        require(it != set.rules_.end(), ErrorCode::parse_error, "rules: unknown key '" + key + "'");
        if (value.is_array()) {
            it->patterns = parse_patterns(value, key);
        } else if (value.is_object()) {
            for (const auto& [field, inner] : value.items()) {
                if (field == "patterns") {
                    it->patterns = parse_patterns(inner, key);
                } else if (field == "requires_flight_number") {
                    require(inner.is_boolean(), ErrorCode::parse_error,
                            "rules: '" + key + "'.requires_flight_number must be a boolean");
                    it->requires_flight_number = inner.get<bool>();
                } else {
                    fail(ErrorCode::parse_error, "rules: unknown field '" + key + "'." + field);
                }
            }
        } else {
            fail(ErrorCode::parse_error, "rules: '" + key + "' must be a list or an object");
        }
    }
    set.flight_number_ = compile(set.flight_number_source_, "'flight_number'");
    return set;
}

RuleSet RuleSet::from_file(const std::string& path) {
    const std::string text = read_text_file(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::parse_error, "rules file '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(doc);
}

const LabelRule& RuleSet::rule(Label label) const {
    for (const auto& r : rules_) {
        if (r.label == label) {
            return r;
        }
    }
    fail(ErrorCode::invalid_argument, "no rule category for label " + to_string(label));
}

// --- classification --------------------------------------------------------

Classification Classifier::classify(const LogRecord& record) const {
    record.validate();
    return classify_text(record.comment);
}

Classification Classifier::classify_text(std::string_view comment) const {
    const std::string normalized = normalize_comment(comment);
    const std::string padded = " " + normalized + " ";
    const bool has_flight = std::regex_search(normalized, rules_.flight_number());

    for (Label label : kRulePrecedence) {
        const LabelRule& rule = rules_.rule(label);
        if (rule.requires_flight_number && !has_flight) {
            continue;
        }
        // Smallest matching id, so the reported rule does not depend on list order.
        std::optional<std::string> best;
        for (const auto& pattern : rule.patterns) {
            const bool hit = pattern.regex ? std::regex_search(normalized, *pattern.regex)
                                           : padded.find(" " + pattern.source + " ") != std::string::npos;
            if (hit && (!best || pattern.id() < *best)) {
                best = pattern.id();
            }
        }
        if (best) {
            std::string id = lower_label(label) + ":" + *best;
            if (rule.requires_flight_number) {
                id += "+flight_number";
            }
            return {label, std::move(id)};
        }
    }
    return {Label::mentioned, "mentioned:fallback"};
}

void LabelCounts::add(Label label) {
    switch (label) {
        case Label::assigned: ++n_assigned; break;
        case Label::requested: ++n_requested; break;
        case Label::rejected: ++n_rejected; break;
        case Label::failed: ++n_failed; break;
        case Label::mentioned: ++n_mentioned; break;
    }
}

ClassifiedCorpus classify_corpus(const Classifier& classifier, std::span<const LogRecord> records) {
    ClassifiedCorpus out;
    out.labeled.reserve(records.size());
    for (const auto& record : records) {
        Classification c = classifier.classify(record);
        out.counts.add(c.label);
        out.labeled.push_back({record, c.label, std::move(c.matched_rule)});
    }
    return out;
}

EstimatedParams estimate_params(const LabelCounts& counts) {
    const std::uint64_t attempted = counts.n_requested + counts.n_failed;
    const std::uint64_t offered = attempted + counts.n_rejected;
    require(offered > 0, ErrorCode::insufficient_data,
            "no Requested, Failed or Rejected records; cannot estimate p_accept");
    require(attempted > 0, ErrorCode::insufficient_data, "no Requested or Failed records; cannot estimate p_success");
    // Integer counts are exact in double below 2^53, so each quotient is the
    // correctly rounded value of the exact ratio.
    return {static_cast<double>(attempted) / static_cast<double>(offered),
            static_cast<double>(counts.n_requested) / static_cast<double>(attempted)};
}

std::vector<SweepRow> calibrated_steady_state(const LabelCounts& counts, std::span<const double> g_grid) {
    const EstimatedParams params = estimate_params(counts);
    const double a[] = {params.p_accept};
    const double s[] = {params.p_success};
    return sweep_steady_state(g_grid, a, s);
}

// --- CSV / JSON --------------------------------------------------------------

std::vector<LogRecord> read_log_csv(std::string_view text, std::vector<std::vector<std::string>>* extra) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") {
        text.remove_prefix(3);
    }
    const auto rows = parse_csv(text);
    require(!rows.empty(), ErrorCode::parse_error, "log CSV is empty; expected header timestamp,facility,comment");
    const auto& header = rows.front();
    require(header.size() >= 3 && header[0] == "timestamp" && header[1] == "facility" && header[2] == "comment",
            ErrorCode::parse_error, "log CSV header must start with timestamp,facility,comment");

    std::vector<LogRecord> records;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() == 1 && row[0].empty()) {
            continue;
        }
        const std::string where = "log CSV record " + std::to_string(i) + ": ";
        require(row.size() >= 3, ErrorCode::parse_error, where + "expected at least 3 fields");
        LogRecord record;
        try {
            record.timestamp = parse_timestamp(row[0]);
        } catch (const Error& e) {
            fail(ErrorCode::parse_error, where + e.what());
        }
        record.facility = std::string(trim(row[1]));
        record.comment = row[2];
        require(!trim(record.comment).empty(), ErrorCode::parse_error, where + "comment is empty");
        records.push_back(std::move(record));
        if (extra != nullptr) {
            extra->emplace_back(row.begin() + 3, row.end());
        }
    }
    return records;
}

std::string labeled_csv(std::span<const LabeledRecord> labeled) {
    std::string out = "timestamp,facility,comment,label,rule\n";
    for (const auto& r : labeled) {
        out += csv_line({format_timestamp(r.record.timestamp), r.record.facility, r.record.comment,
                         to_string(r.label), r.rule});
    }
    return out;
}

nlohmann::json counts_json(const LabelCounts& counts) {
    return {{"Assigned", counts.n_assigned}, {"Requested", counts.n_requested}, {"Rejected", counts.n_rejected},
            {"Failed", counts.n_failed},     {"Mentioned", counts.n_mentioned}, {"total", counts.total()}};
}

// --- synthetic corpus ---------------------------------------------------------

std::vector<SyntheticRecord> synthesize_corpus(const RuleSet& rules, std::size_t count, std::uint64_t seed) {
    static constexpr const char* kAirlines[] = {"UAL", "DAL", "AAL", "JBU", "SWA", "ASA", "FFT", "SKW", "ENY", "RPA"};
    static constexpr const char* kFacilities[] = {"ZNY", "ZDC", "ZBW", "ZOB", "ZAU", "ZTL", "N90", "PHL", "A90", "CLT"};
    static constexpr const char* kFixes[] = {"MERIT", "PARKE", "LANNA", "ELIOT", "WHITE", "BIGGY", "COATE", "NEION"};
    static constexpr const char* kMentions[] = {
        "pathfinder ops under review for {fix}",
        "pathfinder procedures discussed on the planning telcon",
        "pathfinder coordination for the {fix} gate continues",
        "{fix} gate pathfinder option for later today",
    };

    auto keywords = [&rules](Label label) {
        std::vector<std::string> out;
        for (const auto& p : rules.rule(label).patterns) {
            if (!p.regex) {
                out.push_back(p.source);
            }
        }
        require(!out.empty(), ErrorCode::invalid_argument,
                "cannot synthesize " + to_string(label) + " comments: rules have no keyword entries");
        return out;
    };
    const std::vector<std::string> assigned = keywords(Label::assigned);
    const std::vector<std::string> requested = keywords(Label::requested);
    const std::vector<std::string> rejected = keywords(Label::rejected);
    const std::vector<std::string> failed = keywords(Label::failed);

    SplitMix64 rng(seed);
    auto pick = [&rng](std::size_t size) { return static_cast<std::size_t>(rng() % size); };
    auto replace_fix = [](std::string text, const std::string& fix) {
        const auto at = text.find("{fix}");
        if (at != std::string::npos) {
            text.replace(at, 5, fix);
        }
        return text;
    };

    const auto base = std::chrono::sys_days{std::chrono::year{2023} / 1 / 1};
    std::vector<SyntheticRecord> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Label label = kAllLabels[pick(kAllLabels.size())];
        const std::string fix = kFixes[pick(std::size(kFixes))];
        const std::string flight = std::string(kAirlines[pick(std::size(kAirlines))]) + std::to_string(1 + pick(9999));
        std::string comment;
        switch (label) {
            case Label::assigned:
                comment = flight + " " + assigned[pick(assigned.size())] + " as pathfinder via " + fix;
                break;
            case Label::requested:
                comment = requested[pick(requested.size())] + " - pathfinder for the " + fix + " gate";
                break;
            case Label::rejected:
                comment = rejected[pick(rejected.size())] + ", " + fix + " gate remains closed";
                break;
            case Label::failed:
                comment = "pathfinder " + flight + " " + failed[pick(failed.size())] + " near " + fix;
                break;
            case Label::mentioned:
                comment = replace_fix(kMentions[pick(std::size(kMentions))], fix);
                break;
        }
        LogRecord record;
        record.timestamp = base + std::chrono::minutes{static_cast<long>(pick(2 * 365 * 24 * 60))};
        record.facility = kFacilities[pick(std::size(kFacilities))];
        record.comment = std::move(comment);
        out.push_back({std::move(record), label});
    }
    return out;
}

}  // namespace pathfinder
