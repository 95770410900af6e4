#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace metacomment::corpus {

enum class Label : std::uint8_t { Meta, Media, Journalist, Moderator, NonMeta };

inline constexpr std::array<Label, 5> kAllLabels = {Label::Meta, Label::Media, Label::Journalist,
                                                    Label::Moderator, Label::NonMeta};
inline constexpr std::array<Label, 3> kAddressees = {Label::Media, Label::Journalist, Label::Moderator};

// File spelling: "Meta", "Media", "Journalist", "Moderator", "NonMeta".
std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view name);

class LabelSet {
public:
    LabelSet() = default;
    LabelSet(std::initializer_list<Label> labels);

    bool contains(Label label) const { return (bits_ >> static_cast<unsigned>(label)) & 1U; }
    void insert(Label label) { bits_ |= static_cast<std::uint8_t>(1U << static_cast<unsigned>(label)); }
    bool empty() const { return bits_ == 0; }
    std::vector<Label> labels() const;

    bool is_meta() const { return contains(Label::Meta); }

    // Empty string when the invariants hold, otherwise a description of the violation.
    std::string violation() const;

    friend bool operator==(const LabelSet&, const LabelSet&) = default;

private:
    std::uint8_t bits_ = 0;
};

// Wall-clock date-time with minute precision, as written in the source data.
struct Timestamp {
    int year = 1970;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;

    // 0 = Monday ... 6 = Sunday.
    int day_of_week() const;
    std::string to_string() const;  // "YYYY-MM-DDTHH:MM"

    friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

// Accepts YYYY-MM-DDTHH:MM with optional :SS, fractional seconds and zone
// designator (which are dropped). Returns nullopt on any malformed input.
std::optional<Timestamp> parse_timestamp(std::string_view text);

struct Comment {
    std::string id;
    std::string title;
    std::string text;
    Timestamp timestamp;
    std::optional<std::string> username;
    std::optional<std::string> department;
    std::optional<std::int64_t> position;
    std::optional<bool> has_quote;
    std::optional<std::string> forum_id;

    friend bool operator==(const Comment&, const Comment&) = default;
};

struct Entry {
    Comment comment;
    LabelSet labels;

    friend bool operator==(const Entry&, const Entry&) = default;
};

class LabeledDataset {
public:
    LabeledDataset() = default;
    LabeledDataset(std::vector<Entry> entries, std::string source_tag);

    const std::vector<Entry>& entries() const { return entries_; }
    const std::string& source_tag() const { return source_tag_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const Entry& operator[](std::size_t i) const { return entries_[i]; }

    std::optional<std::size_t> find(std::string_view id) const;
    std::size_t count(Label label) const;

    // Returns a copy with the labels of the given rows replaced.
    LabeledDataset with_labels(const std::vector<std::pair<std::size_t, LabelSet>>& updates) const;

    friend bool operator==(const LabeledDataset& a, const LabeledDataset& b) {
        return a.entries_ == b.entries_ && a.source_tag_ == b.source_tag_;
    }

private:
    std::vector<Entry> entries_;
    std::string source_tag_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Loads a comments-jsonl file. The source tag defaults to the file stem.
LabeledDataset load_dataset(const std::string& path);
LabeledDataset parse_dataset(std::istream& in, std::string source_tag);

void save_dataset(const LabeledDataset& ds, std::ostream& out);
void save_dataset(const LabeledDataset& ds, const std::string& path);

struct StatsReport {
    std::size_t n_comments = 0;
    std::size_t n_unlabeled = 0;
    std::map<Label, std::size_t> label_counts;
    std::optional<double> mean_title_words;
    std::optional<double> mean_text_words;
    std::optional<double> quote_share;  // over comments that carry has_quote
    std::map<std::string, std::size_t> department_counts;
};

StatsReport dataset_stats(const LabeledDataset& ds);
std::string stats_to_json(const StatsReport& report);
std::string stats_to_text(const StatsReport& report, std::string_view title);

}  // namespace metacomment::corpus
