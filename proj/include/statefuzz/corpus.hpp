#pragma once

#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "statefuzz/tensor.hpp"

namespace statefuzz {

enum class Split { train, valid, test, all };

inline Split split_from(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "valid") return Split::valid;
    if (s == "test") return Split::test;
    if (s == "all") return Split::all;
    throw ConfigError("unknown split: " + s);
}

// Character-level corpus: deterministic vocabulary (bytes sorted by
// codepoint) and an 8:1:1 train/valid/test split on line boundaries.
struct TextCorpus {
    std::vector<std::string> lines;
    std::string vocab;  // sorted unique bytes, including the newline
    std::array<int, 256> char_to_id{};
    std::size_t train_count = 0;
    std::size_t valid_count = 0;

    std::size_t vocab_size() const { return vocab.size(); }

    std::size_t id_of(char c) const {
        const int id = char_to_id[static_cast<unsigned char>(c)];
        if (id < 0) throw InputError(std::string("character not in vocabulary: ") + c);
        return static_cast<std::size_t>(id);
    }

    std::vector<std::size_t> encode(const std::string& text) const {
        std::vector<std::size_t> out;
        out.reserve(text.size());
        for (char c : text) out.push_back(id_of(c));
        return out;
    }

    std::string decode(const std::vector<std::size_t>& ids) const {
        std::string out;
        out.reserve(ids.size());
        for (std::size_t id : ids) {
            if (id >= vocab.size()) throw InputError("token id outside vocabulary");
            out.push_back(vocab[id]);
        }
        return out;
    }

    std::pair<std::size_t, std::size_t> split_range(Split s) const {
        switch (s) {
            case Split::train: return {0, train_count};
            case Split::valid: return {train_count, train_count + valid_count};
            case Split::test: return {train_count + valid_count, lines.size()};
            case Split::all: return {0, lines.size()};
        }
        return {0, 0};
    }

    std::vector<std::string> split_lines(Split s) const {
        auto [lo, hi] = split_range(s);
        return {lines.begin() + static_cast<std::ptrdiff_t>(lo),
                lines.begin() + static_cast<std::ptrdiff_t>(hi)};
    }

    // Token stream of a split: lines joined with their trailing newlines.
    std::vector<std::size_t> stream(Split s) const {
        auto [lo, hi] = split_range(s);
        std::vector<std::size_t> out;
        for (std::size_t i = lo; i < hi; ++i) {
            for (char c : lines[i]) out.push_back(id_of(c));
            out.push_back(id_of('\n'));
        }
        return out;
    }
};

namespace detail {

inline void require_utf8(const std::string& text) {
    std::size_t i = 0;
    while (i < text.size()) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        std::size_t extra;
        if (c < 0x80) extra = 0;
        else if ((c & 0xe0) == 0xc0) extra = 1;
        else if ((c & 0xf0) == 0xe0) extra = 2;
        else if ((c & 0xf8) == 0xf0) extra = 3;
        else throw IngestError("undecodable byte at offset " + std::to_string(i));
        if (i + extra >= text.size() && extra > 0)
            throw IngestError("truncated UTF-8 sequence at offset " + std::to_string(i));
        for (std::size_t j = 1; j <= extra; ++j)
            if ((static_cast<unsigned char>(text[i + j]) & 0xc0) != 0x80)
                throw IngestError("undecodable byte at offset " + std::to_string(i + j));
        i += extra + 1;
    }
}

}  // namespace detail

inline TextCorpus corpus_from_text(const std::string& text) {
    if (text.empty()) throw IngestError("empty corpus");
    detail::require_utf8(text);

    TextCorpus corpus;
    bool seen[256] = {false};
    for (char c : text) seen[static_cast<unsigned char>(c)] = true;
    seen[static_cast<unsigned char>('\n')] = true;  // line separator is always a token
    for (int c = 0; c < 256; ++c)
        if (seen[c]) corpus.vocab.push_back(static_cast<char>(c));
    corpus.char_to_id.fill(-1);
    for (std::size_t i = 0; i < corpus.vocab.size(); ++i)
        corpus.char_to_id[static_cast<unsigned char>(corpus.vocab[i])] = static_cast<int>(i);

    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) corpus.lines.push_back(line);

    const std::size_t n = corpus.lines.size();
    corpus.train_count = n * 8 / 10;
    corpus.valid_count = n / 10;
    return corpus;
}

inline TextCorpus ingest_text_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open corpus: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return corpus_from_text(buf.str());
}

// Labeled fixed-length sequences: each CSV row is a label followed by
// steps*input_dim reals, consumed row-major as (steps, input_dim).
struct SeqDataset {
    Tensor values;  // (N, T, input_dim)
    std::vector<std::size_t> labels;
    std::size_t num_classes = 0;

    std::size_t size() const { return labels.size(); }

    Tensor sequence(std::size_t i) const {
        const std::size_t t = values.extent(1), d = values.extent(2);
        Tensor out({1, t, d});
        for (std::size_t j = 0; j < t * d; ++j) out[j] = values[i * t * d + j];
        return out;
    }
};

inline SeqDataset ingest_sequence_dataset(const std::string& path, std::size_t steps,
                                          std::size_t input_dim, std::size_t num_classes) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open dataset: " + path);
    const std::size_t width = steps * input_dim;
    std::vector<double> values;
    std::vector<std::size_t> labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> fields;
        while (std::getline(row, cell, ',')) {
            try {
                fields.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IngestError("bad number at line " + std::to_string(lineno));
            }
        }
        if (fields.size() != width + 1)
            throw IngestError("row " + std::to_string(lineno) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(width + 1));
        const double label = fields[0];
        if (label < 0 || label >= static_cast<double>(num_classes) ||
            label != std::floor(label))
            throw IngestError("label out of range at line " + std::to_string(lineno));
        labels.push_back(static_cast<std::size_t>(label));
        values.insert(values.end(), fields.begin() + 1, fields.end());
    }
    if (labels.empty()) throw IngestError("empty dataset: " + path);

    SeqDataset ds;
    ds.values = Tensor({labels.size(), steps, input_dim}, std::move(values));
    ds.labels = std::move(labels);
    ds.num_classes = num_classes;
    return ds;
}

inline void write_sequence_dataset(const SeqDataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IngestError("cannot open dataset for writing: " + path);
    const std::size_t width = ds.values.extent(1) * ds.values.extent(2);
    out.precision(17);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << ds.labels[i];
        for (std::size_t j = 0; j < width; ++j) out << ',' << ds.values[i * width + j];
        out << '\n';
    }
}

}  // namespace statefuzz
