#include "metacomment/corpus.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "metacomment/util/error.hpp"
#include "metacomment/util/numeric_io.hpp"

namespace metacomment::corpus {

using json = nlohmann::ordered_json;

std::string_view label_name(Label label) {
    switch (label) {
        case Label::Meta: return "Meta";
        case Label::Media: return "Media";
        case Label::Journalist: return "Journalist";
        case Label::Moderator: return "Moderator";
        case Label::NonMeta: return "NonMeta";
    }
    return "?";
}

std::optional<Label> parse_label(std::string_view name) {
    for (Label l : kAllLabels) {
        if (label_name(l) == name) return l;
    }
    return std::nullopt;
}

LabelSet::LabelSet(std::initializer_list<Label> labels) {
    for (Label l : labels) insert(l);
}

std::vector<Label> LabelSet::labels() const {
    std::vector<Label> out;
    for (Label l : kAllLabels) {
        if (contains(l)) out.push_back(l);
    }
    return out;
}

std::string LabelSet::violation() const {
    if (contains(Label::NonMeta) && bits_ != (1U << static_cast<unsigned>(Label::NonMeta))) {
        return "NonMeta cannot be combined with other labels";
    }
    for (Label l : kAddressees) {
        if (contains(l) && !contains(Label::Meta)) {
            return std::string(label_name(l)) + " requires Meta";
        }
    }
    return {};
}

int Timestamp::day_of_week() const {
    using namespace std::chrono;
    const sys_days days{year_month_day{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                       std::chrono::day{static_cast<unsigned>(day)}}};
    return static_cast<int>(weekday{days}.iso_encoding()) - 1;
}

std::string Timestamp::to_string() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d", year, month, day, hour, minute);
    return buf;
}

namespace {

bool read_digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
    if (pos + n > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view s) {
    Timestamp ts;
    if (!read_digits(s, 0, 4, ts.year) || s.size() < 16 || s[4] != '-' || !read_digits(s, 5, 2, ts.month) ||
        s[7] != '-' || !read_digits(s, 8, 2, ts.day) || (s[10] != 'T' && s[10] != ' ') ||
        !read_digits(s, 11, 2, ts.hour) || s[13] != ':' || !read_digits(s, 14, 2, ts.minute)) {
        return std::nullopt;
    }
    std::size_t pos = 16;
    int seconds = 0;
    if (pos < s.size() && s[pos] == ':') {
        if (!read_digits(s, pos + 1, 2, seconds) || seconds > 60) return std::nullopt;
        pos += 3;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            const std::size_t start = pos;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
            if (pos == start) return std::nullopt;
        }
    }
    if (pos < s.size()) {
        if (s[pos] == 'Z' && pos + 1 == s.size()) {
            pos = s.size();
        } else if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6 && s[pos + 3] == ':') {
            int oh = 0, om = 0;
            if (!read_digits(s, pos + 1, 2, oh) || !read_digits(s, pos + 4, 2, om) || oh > 23 || om > 59) {
                return std::nullopt;
            }
            pos = s.size();
        } else {
            return std::nullopt;
        }
    }
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{ts.year}, std::chrono::month{static_cast<unsigned>(ts.month)},
                             std::chrono::day{static_cast<unsigned>(ts.day)}};
    if (!ymd.ok() || ts.hour > 23 || ts.minute > 59) return std::nullopt;
    return ts;
}

LabeledDataset::LabeledDataset(std::vector<Entry> entries, std::string source_tag)
    : entries_(std::move(entries)), source_tag_(std::move(source_tag)) {
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (!index_.emplace(e.comment.id, i).second) {
            throw DataError("duplicate comment id '" + e.comment.id + "'");
        }
        if (auto v = e.labels.violation(); !v.empty()) {
            throw DataError("comment '" + e.comment.id + "': " + v);
        }
    }
}

std::optional<std::size_t> LabeledDataset::find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t LabeledDataset::count(Label label) const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.labels.contains(label) ? 1 : 0;
    return n;
}

LabeledDataset LabeledDataset::with_labels(const std::vector<std::pair<std::size_t, LabelSet>>& updates) const {
    auto entries = entries_;
    for (const auto& [row, labels] : updates) {
        if (row >= entries.size()) throw InvalidArgument("label update row out of range");
        entries[row].labels = labels;
    }
    return LabeledDataset(std::move(entries), source_tag_);
}

namespace {

[[noreturn]] void record_error(std::size_t line, std::string_view field, std::string_view what) {
    throw DataError("line " + std::to_string(line) + ": field '" + std::string(field) + "': " + std::string(what));
}

std::string required_string(const json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end()) record_error(line, key, "missing");
    if (!it->is_string()) record_error(line, key, "must be a string");
    return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) record_error(line, key, "must be a string");
    return it->get<std::string>();
}

bool is_blank(std::string_view s) {
    for (char c : s) {
        if (c != ' ' && c != '\t' && c != '\r' && c != '\n') return false;
    }
    return true;
}

Entry parse_record(const std::string& raw, std::size_t line) {
    json obj;
    try {
        obj = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw DataError("line " + std::to_string(line) + ": invalid JSON: " + e.what());
    }
    if (!obj.is_object()) throw DataError("line " + std::to_string(line) + ": record must be a JSON object");

    static const char* const known[] = {"id", "title", "text", "timestamp", "username", "department",
                                        "position", "has_quote", "forum_id", "labels"};
    for (const auto& [key, _] : obj.items()) {
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
            std::end(known)) {
            record_error(line, key, "unknown field");
        }
    }

    Entry entry;
    Comment& c = entry.comment;
    c.id = required_string(obj, "id", line);
    if (is_blank(c.id)) record_error(line, "id", "must not be empty");
    c.title = required_string(obj, "title", line);
    c.text = required_string(obj, "text", line);
    if (is_blank(c.text)) record_error(line, "text", "must not be empty after trimming");
    const auto ts = parse_timestamp(required_string(obj, "timestamp", line));
    if (!ts) record_error(line, "timestamp", "not an ISO-8601 date-time");
    c.timestamp = *ts;
    c.username = optional_string(obj, "username", line);
    c.department = optional_string(obj, "department", line);
    c.forum_id = optional_string(obj, "forum_id", line);
    if (const auto it = obj.find("position"); it != obj.end() && !it->is_null()) {
        if (!it->is_number_integer()) record_error(line, "position", "must be an integer");
        const auto p = it->get<std::int64_t>();
        if (p < 1) record_error(line, "position", "must be >= 1");
        c.position = p;
    }
    if (const auto it = obj.find("has_quote"); it != obj.end() && !it->is_null()) {
        if (!it->is_boolean()) record_error(line, "has_quote", "must be a boolean");
        c.has_quote = it->get<bool>();
    }
    if (const auto it = obj.find("labels"); it != obj.end() && !it->is_null()) {
        if (!it->is_array()) record_error(line, "labels", "must be an array of label names");
        for (const auto& v : *it) {
            if (!v.is_string()) record_error(line, "labels", "must be an array of label names");
            const auto label = parse_label(v.get<std::string>());
            if (!label) record_error(line, "labels", "unknown label '" + v.get<std::string>() + "'");
            entry.labels.insert(*label);
        }
        if (auto v = entry.labels.violation(); !v.empty()) record_error(line, "labels", v);
    }
    return entry;
}

}  // namespace

LabeledDataset parse_dataset(std::istream& in, std::string source_tag) {
    std::vector<Entry> entries;
    std::unordered_map<std::string, std::size_t> first_line;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        if (is_blank(raw)) continue;
        Entry e = parse_record(raw, line);
        if (const auto [it, fresh] = first_line.emplace(e.comment.id, line); !fresh) {
            throw DataError("line " + std::to_string(line) + ": field 'id': duplicate id '" + e.comment.id +
                            "' (first seen on line " + std::to_string(it->second) + ")");
        }
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw DataError("empty dataset");
    return LabeledDataset(std::move(entries), std::move(source_tag));
}

LabeledDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset " + path);
    auto stem = path;
    if (const auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
    if (const auto dot = stem.find('.'); dot != std::string::npos) stem = stem.substr(0, dot);
    return parse_dataset(in, stem);
}

void save_dataset(const LabeledDataset& ds, std::ostream& out) {
    for (const auto& e : ds.entries()) {
        const Comment& c = e.comment;
        json obj;
        obj["id"] = c.id;
        obj["title"] = c.title;
        obj["text"] = c.text;
        obj["timestamp"] = c.timestamp.to_string();
        if (c.username) obj["username"] = *c.username;
        if (c.department) obj["department"] = *c.department;
        if (c.position) obj["position"] = *c.position;
        if (c.has_quote) obj["has_quote"] = *c.has_quote;
        if (c.forum_id) obj["forum_id"] = *c.forum_id;
        if (!e.labels.empty()) {
            json labels = json::array();
            for (Label l : e.labels.labels()) labels.push_back(std::string(label_name(l)));
            obj["labels"] = std::move(labels);
        }
        out << obj.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
}

void save_dataset(const LabeledDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    save_dataset(ds, out);
}

namespace {

std::size_t word_count(std::string_view s) {
    std::size_t n = 0;
    bool in_word = false;
    for (char ch : s) {
        const bool space = ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r';
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

}  // namespace

StatsReport dataset_stats(const LabeledDataset& ds) {
    StatsReport r;
    for (Label l : kAllLabels) r.label_counts[l] = 0;
    r.n_comments = ds.size();
    double title_words = 0.0;
    double text_words = 0.0;
    std::size_t quote_known = 0;
    std::size_t quoting = 0;
    for (const auto& e : ds.entries()) {
        for (Label l : e.labels.labels()) ++r.label_counts[l];
        if (e.labels.empty()) ++r.n_unlabeled;
        title_words += static_cast<double>(word_count(e.comment.title));
        text_words += static_cast<double>(word_count(e.comment.text));
        if (e.comment.has_quote) {
            ++quote_known;
            quoting += *e.comment.has_quote ? 1 : 0;
        }
        if (e.comment.department) ++r.department_counts[*e.comment.department];
    }
    if (r.n_comments > 0) {
        r.mean_title_words = title_words / static_cast<double>(r.n_comments);
        r.mean_text_words = text_words / static_cast<double>(r.n_comments);
    }
    if (quote_known > 0) r.quote_share = static_cast<double>(quoting) / static_cast<double>(quote_known);
    return r;
}

std::string stats_to_json(const StatsReport& r) {
    json obj;
    obj["n_comments"] = r.n_comments;
    obj["n_unlabeled"] = r.n_unlabeled;
    json counts;
    for (const auto& [l, n] : r.label_counts) counts[std::string(label_name(l))] = n;
    obj["label_counts"] = counts;
    const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    obj["mean_title_words"] = opt(r.mean_title_words);
    obj["mean_text_words"] = opt(r.mean_text_words);
    obj["quote_share"] = opt(r.quote_share);
    json departments = json::object();
    for (const auto& [d, n] : r.department_counts) departments[d] = n;
    obj["department_counts"] = departments;
    return obj.dump(2);
}

std::string stats_to_text(const StatsReport& r, std::string_view title) {
    std::ostringstream out;
    const auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string("n/a"); };
    out << "dataset: " << title << '\n';
    out << "comments: " << r.n_comments << " (unlabeled " << r.n_unlabeled << ")\n";
    for (const auto& [l, n] : r.label_counts) out << "  " << label_name(l) << ": " << n << '\n';
    out << "mean title words: " << opt(r.mean_title_words) << '\n';
    out << "mean text words: " << opt(r.mean_text_words) << '\n';
    out << "quote share: " << opt(r.quote_share) << '\n';
    for (const auto& [d, n] : r.department_counts) out << "  department " << d << ": " << n << '\n';
    return out.str();
}

}  // namespace metacomment::corpus
