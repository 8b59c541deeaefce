// Generates the bundled desk-scale datasets deterministically:
//   corpus.txt        ~200 KB of synthetic English-like sentences built
//                     from minimal-pair word families, so many single-char
//                     substitutions land on other valid words
//   digits_train.csv  labeled 8x8 sequences, sinusoidal class prototypes
//   digits_test.csv   plus per-sample noise

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "statefuzz/rng.hpp"

using statefuzz::Rng;

namespace {

const std::vector<std::vector<std::string>> kFamilies = {
    {"cat", "bat", "hat", "mat", "rat", "sat", "fat", "pat", "vat"},
    {"dog", "fog", "log", "bog", "cog", "jog", "hog"},
    {"ten", "hen", "pen", "den", "men", "zen"},
    {"wine", "vine", "nine", "line", "mine", "dine", "pine"},
    {"cold", "bold", "gold", "fold", "hold", "told", "sold"},
    {"rake", "lake", "cake", "make", "take", "wake", "bake"},
    {"ring", "king", "sing", "wing", "ding"},
    {"light", "night", "right", "sight", "might", "tight", "fight"},
    {"rest", "best", "nest", "test", "vest", "west", "pest"},
    {"sand", "band", "hand", "land", "wand"},
    {"seat", "beat", "heat", "meat", "neat", "peat", "feat"},
    {"moon", "soon", "noon", "boon"},
    {"tall", "ball", "call", "fall", "hall", "mall", "wall"},
    {"bill", "fill", "hill", "mill", "pill", "will", "till"},
    {"dock", "lock", "mock", "rock", "sock", "tock"},
    {"bore", "core", "more", "sore", "tore", "wore"},
    {"cane", "lane", "mane", "pane", "sane", "vane"},
    {"bunk", "dunk", "hunk", "junk", "sunk"},
};

// word-salad line: family words drawn uniformly; every first character has
// wide support, so single-character edits often stay inside the language
std::string salad_line(statefuzz::Rng& rng) {
    std::string out;
    const std::size_t words = 5 + rng.below(4);
    for (std::size_t w = 0; w < words; ++w) {
        const auto& family = kFamilies[rng.below(kFamilies.size())];
        if (w) out += " ";
        out += family[rng.below(family.size())];
    }
    out += ".";
    return out;
}

// templates: %0..%9 pick a word from the numbered family
const std::vector<std::string> kTemplates = {
    "the %0 sat on the %0 near the %9.",
    "a %1 ran past the %1 in the %7.",
    "one %2 and one %2 met at %11.",
    "she took the %5 down to the %3 house.",
    "his %4 %6 was very %4 and old.",
    "they saw a %7 over the %9 last %7.",
    "we put the %10 by the %8 after the %8.",
    "my %0 found a %5 under the %10.",
    "the %3 was as %4 as the %11.",
    "a %6 may %6 when the %1 sleeps.",
    "put one %8 of %9 on every %10.",
    "that %2 kept a %0 and a %1.",
    "each %7 the %2 walks to the %5.",
    "no %4 hand can hold the %6 for long.",
    "the %11 rose over the %9 and the %3.",
    "some %8 days begin with a %0 on the %10.",
};

std::string fill_template(const std::string& tmpl, Rng& rng) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == '%') {
            std::size_t fam = 0, used = 0;
            if (i + 2 < tmpl.size() && isdigit(tmpl[i + 2]) && tmpl[i + 1] == '1') {
                fam = 10 + (tmpl[i + 2] - '0');
                used = 2;
            } else {
                fam = tmpl[i + 1] - '0';
                used = 1;
            }
            const auto& family = kFamilies[fam];
            out += family[rng.below(family.size())];
            i += used;
        } else {
            out.push_back(tmpl[i]);
        }
    }
    return out;
}

void write_corpus(const std::string& path, std::size_t target_bytes, double typo_rate) {
    Rng rng(0xC0FFEE);
    const std::string letters = "abcdefghijklmnopqrstuvwxyz";
    std::string text;
    while (text.size() < target_bytes) {
        std::string line = fill_template(kTemplates[rng.below(kTemplates.size())], rng);
        if (rng.below(4) == 0) line += " " + salad_line(rng);
        line[0] = static_cast<char>(toupper(line[0]));
        if (rng.below(3) == 0)
            line += " Chapter " + std::to_string(1 + rng.below(99)) + " ends.";
        // occasional bracketed all-caps segment: a hard regime switch the
        // model must learn, and a catastrophic character to splice in
        // anywhere else
        if (rng.below(5) == 0) {
            std::string seg = " [";
            const std::size_t words = 1 + rng.below(3);
            for (std::size_t w = 0; w < words; ++w) {
                if (w) seg += " ";
                const auto& fam = kFamilies[rng.below(kFamilies.size())];
                std::string word = fam[rng.below(fam.size())];
                for (auto& c : word) c = static_cast<char>(toupper(c));
                seg += word;
            }
            seg += "]";
            line += seg;
        }
        // typos on lowercase letters only, keeping the word skeleton intact
        for (auto& c : line)
            if (c >= 'a' && c <= 'z' && rng.uniform(0.0, 1.0) < typo_rate)
                c = letters[rng.below(letters.size())];
        text += line;
        text.push_back('\n');
    }
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    out << text;
    std::cout << path << ": " << text.size() << " bytes\n";
}

double prototype(std::size_t label, std::size_t r, std::size_t c) {
    static const int freq[10][2] = {{1, 0}, {0, 1}, {1, 1}, {2, 0}, {0, 2},
                                    {2, 1}, {1, 2}, {2, 2}, {3, 0}, {0, 3}};
    const double phase = 0.7 * static_cast<double>(label);
    return 0.5 + 0.4 * std::sin(M_PI * (freq[label][0] * static_cast<double>(r) +
                                        freq[label][1] * static_cast<double>(c)) /
                                    4.0 +
                                phase);
}

void write_digits(const std::string& path, std::size_t count, std::uint64_t seed, double noise) {
    Rng rng(seed);
    std::ofstream out(path, std::ios::trunc);
    out.precision(3);
    out << std::fixed;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t label = i % 10;
        out << label;
        for (std::size_t r = 0; r < 8; ++r)
            for (std::size_t c = 0; c < 8; ++c) {
                double v = prototype(label, r, c) + rng.gaussian(noise);
                v = std::min(1.0, std::max(0.0, v));
                out << ',' << v;
            }
        out << '\n';
    }
    std::cout << path << ": " << count << " rows\n";
}

}  // namespace

int main(int argc, char** argv) {
    std::string out_dir = "data";
    if (argc > 1) out_dir = argv[1];
    std::filesystem::create_directories(out_dir);
    write_corpus(out_dir + "/corpus.txt", 200 * 1024, 0.32);
    write_digits(out_dir + "/digits_train.csv", 1600, 12345, 0.10);
    write_digits(out_dir + "/digits_test.csv", 200, 98765, 0.10);
    return 0;
}
