#pragma once

// Coordination-log ingestion: parse traffic-management log comments, label
// each with a rule-based classifier and calibrate the chain from the counts.
//
// Matching runs on normalized text: ASCII lowercase, typographic apostrophes
// folded to ', every other non-alphanumeric character (and apostrophes not
// between two word characters) replaced by a space, whitespace collapsed.
// Keywords match whole words of the normalized text; regex patterns
// (ECMAScript) are searched in it.

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pathfinder/markov.hpp"

namespace pathfinder {

struct LogRecord {
    std::chrono::sys_seconds timestamp;
    std::string facility;
    std::string comment;

    /// Throws invalid_argument if the comment is blank after trimming.
    void validate() const;
};

enum class Label { assigned, requested, rejected, failed, mentioned };

inline constexpr std::array<Label, 5> kAllLabels{Label::assigned, Label::requested, Label::rejected, Label::failed,
                                                 Label::mentioned};

/// Fixed precedence of the rule categories; Mentioned is the fallback.
inline constexpr std::array<Label, 4> kRulePrecedence{Label::failed, Label::rejected, Label::assigned,
                                                      Label::requested};

/// "Assigned", "Requested", ...
std::string to_string(Label label);
Label label_from_string(std::string_view text);

std::string normalize_comment(std::string_view text);

/// ISO-8601 date-time: YYYY-MM-DD[T| ]HH:MM[:SS[.fff]][Z|+HH:MM|-HH:MM]
/// (no zone means UTC). Throws parse_error.
std::chrono::sys_seconds parse_timestamp(std::string_view text);
/// YYYY-MM-DDTHH:MM:SSZ
std::string format_timestamp(std::chrono::sys_seconds ts);

struct Pattern {
    std::string source;  // normalized keyword, or the regex source
    std::optional<std::regex> regex;

    /// The keyword itself, or "re:<source>".
    std::string id() const { return regex ? "re:" + source : source; }
};

struct LabelRule {
    Label label;
    bool requires_flight_number = false;
    std::vector<Pattern> patterns;
};

/// Rules file (JSON):
///   {
///     "flight_number": "<regex>",                 optional
///     "Failed":   ["not good", {"regex": "..."}],   list shorthand
///     "Assigned": {"requires_flight_number": true, "patterns": [...]},
///     ...
///   }
/// Keys are Failed, Rejected, Assigned, Requested (Mentioned only as an
/// empty list). Assigned requires a flight number unless told otherwise.
class RuleSet {
public:
    /// Throws parse_error naming the offending key or entry.
    static RuleSet from_json(const nlohmann::json& doc);
    static RuleSet from_file(const std::string& path);

    /// Two or three letters followed by one to four digits.
    static constexpr const char* kDefaultFlightNumber = "\\b[a-z]{2,3}[0-9]{1,4}\\b";

    const LabelRule& rule(Label label) const;
    const std::regex& flight_number() const { return flight_number_; }
    const std::string& flight_number_source() const { return flight_number_source_; }

private:
    std::vector<LabelRule> rules_;  // in kRulePrecedence order
    std::string flight_number_source_ = kDefaultFlightNumber;
    std::regex flight_number_;
};

struct Classification {
    Label label;
    std::string matched_rule;  // e.g. "failed:didn't make it", "mentioned:fallback"
};

class Classifier {
public:
    explicit Classifier(RuleSet rules) : rules_(std::move(rules)) {}

    Classification classify(const LogRecord& record) const;
    Classification classify_text(std::string_view comment) const;

    const RuleSet& rules() const { return rules_; }

private:
    RuleSet rules_;
};

struct LabelCounts {
    std::uint64_t n_assigned = 0;
    std::uint64_t n_requested = 0;
    std::uint64_t n_rejected = 0;
    std::uint64_t n_failed = 0;
    std::uint64_t n_mentioned = 0;

    std::uint64_t total() const { return n_assigned + n_requested + n_rejected + n_failed + n_mentioned; }
    void add(Label label);
};

struct LabeledRecord {
    LogRecord record;
    Label label;
    std::string rule;
};

struct ClassifiedCorpus {
    std::vector<LabeledRecord> labeled;
    LabelCounts counts;
};

/// Preserves input order.
ClassifiedCorpus classify_corpus(const Classifier& classifier, std::span<const LogRecord> records);

struct EstimatedParams {
    double p_accept;
    double p_success;
};

/// p_accept  = (N_req + N_fail) / (N_req + N_fail + N_rej)
/// p_success = N_req / (N_req + N_fail)
/// Throws insufficient_data when a denominator is zero.
EstimatedParams estimate_params(const LabelCounts& counts);

/// estimate_params followed by a p_good sweep at the estimated (a, s).
std::vector<SweepRow> calibrated_steady_state(const LabelCounts& counts, std::span<const double> g_grid);

/// Reads a CSV with header `timestamp,facility,comment`. Extra trailing
/// columns are allowed and ignored unless `extra` is given, in which case
/// each record's extra fields are appended to it. Errors name the line.
std::vector<LogRecord> read_log_csv(std::string_view text, std::vector<std::vector<std::string>>* extra = nullptr);

/// Header `timestamp,facility,comment,label,rule`.
std::string labeled_csv(std::span<const LabeledRecord> labeled);

nlohmann::json counts_json(const LabelCounts& counts);

struct SyntheticRecord {
    LogRecord record;
    Label label;
};

/// Samples comments from the keyword lists of `rules` using fixed templates;
/// every generated comment carries the label it was built for. Regex
/// patterns are not sampled.
std::vector<SyntheticRecord> synthesize_corpus(const RuleSet& rules, std::size_t count, std::uint64_t seed);

}  // namespace pathfinder
