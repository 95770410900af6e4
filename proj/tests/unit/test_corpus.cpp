#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "metacomment/corpus.hpp"
#include "metacomment/synthetic.hpp"
#include "metacomment/util/error.hpp"

using namespace metacomment;
using corpus::Label;
using corpus::LabelSet;

namespace {

corpus::LabeledDataset parse(const std::string& text) {
    std::istringstream in(text);
    return corpus::parse_dataset(in, "fixture");
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

const char* kThree =
    R"({"id":"a","title":"T","text":"Liebe Redaktion, danke.","timestamp":"2018-01-01T10:00","labels":["Meta","Media"]})"
    "\n"
    R"({"id":"b","title":"","text":"Steuern runter!","timestamp":"2018-01-02T11:30","labels":["NonMeta"]})"
    "\n"
    R"({"id":"c","title":"","text":"Der Autor und die Moderation...","timestamp":"2018-01-03T12:45","labels":["Meta","Journalist","Moderator"]})"
    "\n";

}  // namespace

TEST_CASE("LabelSet invariants") {
    CHECK(LabelSet{Label::NonMeta}.violation().empty());
    CHECK(LabelSet{Label::Meta}.violation().empty());  // unassigned meta-comment
    CHECK(LabelSet{Label::Meta, Label::Media, Label::Moderator}.violation().empty());
    CHECK_FALSE(LabelSet{Label::NonMeta, Label::Media}.violation().empty());
    CHECK_FALSE(LabelSet{Label::NonMeta, Label::Meta}.violation().empty());
    CHECK_FALSE(LabelSet{Label::Journalist}.violation().empty());
    CHECK(LabelSet{}.violation().empty());
}

TEST_CASE("label names round-trip") {
    for (const auto l : corpus::kAllLabels) CHECK(corpus::parse_label(corpus::label_name(l)) == l);
    CHECK_FALSE(corpus::parse_label("meta").has_value());
}

TEST_CASE("timestamps") {
    const auto t = corpus::parse_timestamp("2018-03-05T09:07");
    REQUIRE(t);
    CHECK(t->to_string() == "2018-03-05T09:07");
    CHECK(t->day_of_week() == 0);  // a Monday
    CHECK(corpus::parse_timestamp("2018-03-11T23:59")->day_of_week() == 6);
    CHECK(corpus::parse_timestamp("2018-03-05T09:07:33.5+01:00")->minute == 7);
    CHECK(corpus::parse_timestamp("2018-03-05T09:07Z").has_value());
    CHECK_FALSE(corpus::parse_timestamp("2018-02-30T09:07").has_value());
    CHECK(corpus::parse_timestamp("2018-03-05 09:07").has_value());
    CHECK_FALSE(corpus::parse_timestamp("2018/03/05T09:07").has_value());
    CHECK_FALSE(corpus::parse_timestamp("2018-03-05T24:00").has_value());
    CHECK(corpus::parse_timestamp("2016-02-29T00:00").has_value());
    CHECK_FALSE(corpus::parse_timestamp("2017-02-29T00:00").has_value());
}

TEST_CASE("load_dataset: empty file is an error") {
    CHECK(error_of("") == "empty dataset");
    CHECK(error_of("\n\n") == "empty dataset");
}

TEST_CASE("load_dataset: NonMeta with an addressee is rejected") {
    const auto msg = error_of(
        R"({"id":"x","title":"","text":"t","timestamp":"2018-01-01T00:00","labels":["NonMeta","Media"]})");
    CHECK(msg.find("line 1") != std::string::npos);
    CHECK(msg.find("labels") != std::string::npos);
}

TEST_CASE("load_dataset: three records, hand-counted labels") {
    const auto ds = parse(kThree);
    REQUIRE(ds.size() == 3);
    CHECK(ds.count(Label::Meta) == 2);
    CHECK(ds.count(Label::NonMeta) == 1);
    CHECK(ds.count(Label::Media) == 1);
    CHECK(ds.count(Label::Journalist) == 1);
    CHECK(ds.count(Label::Moderator) == 1);
    CHECK(ds.find("b") == 1);
    CHECK_FALSE(ds.find("zz").has_value());
}

TEST_CASE("load_dataset: record errors name line and field") {
    const std::string good = R"({"id":"a","title":"","text":"t","timestamp":"2018-01-01T00:00"})";
    CHECK(error_of(good + "\n" + R"({"id":"a","title":"","text":"u","timestamp":"2018-01-01T00:00"})")
              .find("line 2") != std::string::npos);
    CHECK(error_of(R"({"id":"a","title":"","text":"   ","timestamp":"2018-01-01T00:00"})").find("'text'") !=
          std::string::npos);
    CHECK(error_of(R"({"id":"a","title":"","text":"t","timestamp":"gestern"})").find("'timestamp'") !=
          std::string::npos);
    CHECK(error_of(R"({"id":"a","title":"","text":"t","timestamp":"2018-01-01T00:00","position":0})")
              .find("'position'") != std::string::npos);
    CHECK(error_of(R"({"id":"a","title":"","text":"t","timestamp":"2018-01-01T00:00","labels":["Spam"]})")
              .find("'labels'") != std::string::npos);
    CHECK(error_of("{not json").find("line 1") != std::string::npos);
    CHECK(error_of(R"({"title":"","text":"t","timestamp":"2018-01-01T00:00"})").find("'id'") != std::string::npos);
}

TEST_CASE("unlabeled records get an empty LabelSet") {
    const auto ds = parse(R"({"id":"a","title":"","text":"t","timestamp":"2018-01-01T00:00"})");
    CHECK(ds[0].labels.empty());
    CHECK_FALSE(ds[0].comment.department.has_value());
}

TEST_CASE("save/load round-trip keeps every field") {
    synthetic::Options opt;
    opt.n_comments = 60;
    const auto ds = synthetic::generate(opt);
    std::ostringstream out;
    corpus::save_dataset(ds, out);
    std::istringstream in(out.str());
    const auto back = corpus::parse_dataset(in, ds.source_tag());
    CHECK(back == ds);
    std::ostringstream again;
    corpus::save_dataset(back, again);
    CHECK(again.str() == out.str());
}

TEST_CASE("load_dataset from a file uses the stem as source tag") {
    testing::TempDir dir;
    const auto path = dir.write("spon_train.jsonl", kThree);
    const auto ds = corpus::load_dataset(path);
    CHECK(ds.source_tag() == "spon_train");
    CHECK_THROWS_AS(corpus::load_dataset(dir.file("nope.jsonl")), DataError);
}

TEST_CASE("dataset_stats: empty dataset") {
    const auto r = corpus::dataset_stats(corpus::LabeledDataset{});
    CHECK(r.n_comments == 0);
    CHECK_FALSE(r.mean_title_words.has_value());
    CHECK_FALSE(r.mean_text_words.has_value());
    CHECK_FALSE(r.quote_share.has_value());
    for (const auto& [label, n] : r.label_counts) CHECK(n == 0);
}

TEST_CASE("dataset_stats: two of four comments quote") {
    std::vector<corpus::Entry> entries;
    for (int i = 0; i < 4; ++i) {
        auto e = testing::make_entry("c" + std::to_string(i), "eins zwei drei", LabelSet{Label::NonMeta}, "Titel hier");
        e.comment.has_quote = i < 2;
        e.comment.department = i == 0 ? "politik" : "sport";
        entries.push_back(e);
    }
    const auto r = corpus::dataset_stats(corpus::LabeledDataset(entries, "fx"));
    CHECK(r.quote_share == doctest::Approx(0.5));
    CHECK(*r.mean_title_words == doctest::Approx(2.0));
    CHECK(*r.mean_text_words == doctest::Approx(3.0));
    CHECK(r.department_counts.at("sport") == 3);
    CHECK(r.label_counts.at(Label::NonMeta) == 4);
}

TEST_CASE("addressee counts never exceed the meta count") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        synthetic::Options opt;
        opt.n_comments = 200;
        opt.seed = seed;
        const auto ds = synthetic::generate(opt);
        for (const auto a : corpus::kAddressees) CHECK(ds.count(a) <= ds.count(Label::Meta));
        CHECK(ds.count(Label::Meta) + ds.count(Label::NonMeta) == ds.size());
    }
}

TEST_CASE("with_labels replaces labels and keeps the rest") {
    const auto ds = parse(kThree);
    const auto updated = ds.with_labels({{1, LabelSet{Label::Meta}}});
    CHECK(updated[1].labels == LabelSet{Label::Meta});
    CHECK(updated[0] == ds[0]);
    CHECK_THROWS_AS(ds.with_labels({{7, LabelSet{}}}), InvalidArgument);
}
