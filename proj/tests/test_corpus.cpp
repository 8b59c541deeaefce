#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "statefuzz/corpus.hpp"

using namespace statefuzz;

namespace {

struct TempFile {
    std::string path;
    TempFile(const std::string& name, const std::string& content) : path("corpus_test_" + name) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("text ingestion: vocabulary and tokens") {
    TextCorpus c = corpus_from_text("ab\n");
    CHECK(c.vocab == "\nab");
    CHECK(c.vocab_size() == 3);
    auto stream = c.stream(Split::all);
    REQUIRE(stream.size() == 3);  // 'a', 'b', newline
    CHECK(stream[0] == c.id_of('a'));
    CHECK(stream[2] == c.id_of('\n'));
    CHECK(c.decode(c.encode("ba")) == "ba");
}

TEST_CASE("text ingestion is deterministic") {
    const std::string text = "hello world\nsecond line\nthird\n";
    TextCorpus a = corpus_from_text(text);
    TextCorpus b = corpus_from_text(text);
    CHECK(a.vocab == b.vocab);
    CHECK(a.lines == b.lines);
    CHECK(a.train_count == b.train_count);
    CHECK(a.stream(Split::train) == b.stream(Split::train));
}

TEST_CASE("text ingestion: 8:1:1 split on line boundaries") {
    std::string text;
    for (int i = 0; i < 1000; ++i) text += "line " + std::to_string(i) + "\n";
    TextCorpus c = corpus_from_text(text);
    CHECK(c.split_lines(Split::train).size() == 800);
    CHECK(c.split_lines(Split::valid).size() == 100);
    CHECK(c.split_lines(Split::test).size() == 100);
    CHECK(c.split_lines(Split::test).front() == "line 900");
}

TEST_CASE("text ingestion errors") {
    CHECK_THROWS_AS(corpus_from_text(""), IngestError);
    CHECK_THROWS_AS(corpus_from_text("ok so far \xff\xfe nope"), IngestError);
    CHECK_THROWS_AS(corpus_from_text(std::string("truncated \xc3")), IngestError);

    TempFile missing("nope.txt", "x");
    CHECK_THROWS_AS(ingest_text_corpus("no_such_file_anywhere.txt"), IngestError);
}

TEST_CASE("unknown characters are input errors when encoding") {
    TextCorpus c = corpus_from_text("abc\n");
    CHECK_THROWS_AS(c.encode("abd"), InputError);
}

TEST_CASE("sequence dataset: shapes, labels, round trip") {
    SUBCASE("one row becomes a (4,2) sequence") {
        TempFile f("seq1.csv", "1,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8\n");
        SeqDataset ds = ingest_sequence_dataset(f.path, 4, 2, 3);
        REQUIRE(ds.size() == 1);
        CHECK(ds.labels[0] == 1);
        CHECK(ds.values.extent(1) == 4);
        CHECK(ds.values.extent(2) == 2);
        CHECK(ds.values[7] == doctest::Approx(0.8));
    }

    SUBCASE("out-of-range label") {
        TempFile f("seq2.csv", "3,0.1,0.2\n");
        CHECK_THROWS_AS(ingest_sequence_dataset(f.path, 1, 2, 3), IngestError);
    }

    SUBCASE("ragged rows") {
        TempFile f("seq3.csv", "1,0.1,0.2\n0,0.1\n");
        CHECK_THROWS_AS(ingest_sequence_dataset(f.path, 1, 2, 3), IngestError);
    }

    SUBCASE("write-then-read round trip is exact") {
        SeqDataset ds;
        ds.num_classes = 2;
        ds.labels = {0, 1};
        ds.values = Tensor({2, 2, 2}, {0.1, -0.25, 1e-7, 0.999, 0.5, 0.0625, -3.5, 2.0 / 3.0});
        const std::string path = "corpus_test_rt.csv";
        write_sequence_dataset(ds, path);
        SeqDataset back = ingest_sequence_dataset(path, 2, 2, 2);
        std::remove(path.c_str());
        REQUIRE(back.size() == 2);
        for (std::size_t i = 0; i < ds.values.numel(); ++i)
            CHECK(back.values[i] == ds.values[i]);  // 17 significant digits round-trip
        CHECK(back.labels == ds.labels);
    }
}
