#pragma once

// Random citation-bearing Markdown with the expected attribution computed
// from the generation model itself, independent of the parser.

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "citecheck/types.hpp"

namespace citecheck::testing {

struct ExpectedAttribution {
    std::string text_nocite;
    Span span;
    std::vector<int> citation_ids;
    int passage_id = 0;
};

struct GeneratedDoc {
    std::string markdown;
    std::vector<std::string> urls;  // registry order
    std::vector<ExpectedAttribution> expected;
    std::size_t sentence_count = 0;
};

class DocGenerator {
public:
    explicit DocGenerator(std::uint32_t seed) : rng_(seed) {}

    GeneratedDoc next() {
        GeneratedDoc doc;
        labels_.clear();
        footnotes_.clear();
        url_ids_.clear();
        registry_.clear();
        // Label pool: some labels share a URL so dedup is exercised.
        int label_count = pick(1, 8);
        for (int l = 1; l <= label_count; ++l)
            labels_[l] = "https://s" + std::to_string(pick(1, label_count)) + ".example.org/p" +
                         std::to_string(l % 3);
        int paragraphs = pick(1, 4);
        for (int p = 1; p <= paragraphs; ++p) {
            if (p > 1) doc.markdown += "\n\n";
            emit_paragraph(doc, p);
        }
        doc.markdown += "\n\n";
        for (const auto& [l, url] : labels_) doc.markdown += "[" + std::to_string(l) + "]: " + url + "\n";
        for (const auto& [name, url] : footnotes_) doc.markdown += "\n[^" + name + "]: Note at " + url + "\n";
        doc.urls = registry_;
        return doc;
    }

private:
    struct Sentence {
        std::string words;
        std::string marker_text;
        std::vector<std::string> urls;  // resolved, in marker order
        bool has_marker = false;
        bool trailing = true;
        Span span;
    };

    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    std::string word() {
        static const char* kWords[] = {"market", "growth", "policy", "data",  "rate",  "report",
                                       "trend",  "index",  "output", "price", "sales", "demand"};
        return kWords[pick(0, 11)];
    }

    std::string phrase(int n) {
        std::string s;
        for (int i = 0; i < n; ++i) {
            if (i) s += ' ';
            s += word();
        }
        s[0] = static_cast<char>(s[0] - 'a' + 'A');
        return s;
    }

    int id_for(const std::string& url) {
        auto it = url_ids_.find(url);
        if (it != url_ids_.end()) return it->second;
        registry_.push_back(url);
        int id = static_cast<int>(registry_.size());
        url_ids_[url] = id;
        return id;
    }

    // Trailing marker after the period; returns the URLs it resolves to.
    void trailing_marker(Sentence& s) {
        int maxl = static_cast<int>(labels_.size());
        switch (pick(0, 6)) {
            case 0: {
                int l = pick(1, maxl);
                s.marker_text = " [" + std::to_string(l) + "]";
                s.urls = {labels_[l]};
                break;
            }
            case 1: {
                int a = pick(1, maxl), b = pick(a, maxl);
                s.marker_text = " [" + std::to_string(a) + "-" + std::to_string(b) + "]";
                for (int l = a; l <= b; ++l) s.urls.push_back(labels_[l]);
                break;
            }
            case 2: {
                int a = pick(1, maxl), b = pick(1, maxl);
                s.marker_text = " [" + std::to_string(a) + ", " + std::to_string(b) + "]";
                s.urls = {labels_[a], labels_[b]};
                break;
            }
            case 3: {
                std::string name = "n" + std::to_string(footnotes_.size() + 1);
                std::string url = "https://fn.example.net/" + name;
                footnotes_.emplace_back(name, url);
                s.marker_text = "[^" + name + "]";
                s.urls = {url};
                break;
            }
            case 4: {
                std::string url = "https://inline.example.com/a" + std::to_string(pick(1, 3));
                s.marker_text = " ([source](" + url + "))";
                s.urls = {url};
                break;
            }
            case 5: {
                std::string url = "https://auto.example.com/" + std::to_string(pick(1, 3));
                s.marker_text = " <" + url + ">";
                s.urls = {url};
                break;
            }
            default:
                // Label with no definition: a marker that blocks propagation.
                s.marker_text = " [" + std::to_string(100 + pick(0, 9)) + "]";
                break;
        }
        s.has_marker = true;
    }

    void emit_paragraph(GeneratedDoc& doc, int passage_id) {
        int n = pick(1, 5);
        std::vector<Sentence> sentences(static_cast<std::size_t>(n));
        std::string& out = doc.markdown;
        for (int i = 0; i < n; ++i) {
            Sentence& s = sentences[static_cast<std::size_t>(i)];
            if (i) out += ' ';
            std::size_t begin = out.size();
            int roll = pick(0, 9);
            if (roll < 2) {
                // Mid-sentence marker: cites its own sentence only.
                int l = pick(1, static_cast<int>(labels_.size()));
                std::string head = phrase(pick(1, 3)), tail = phrase(pick(1, 3));
                tail[0] = static_cast<char>(tail[0] - 'A' + 'a');
                out += head + " [" + std::to_string(l) + "] " + tail + ".";
                s.words = head + " " + tail + ".";
                s.urls = {labels_[l]};
                s.has_marker = true;
                s.trailing = false;
            } else {
                s.words = phrase(pick(2, 5)) + ".";
                out += s.words;
                if (roll >= 6) {
                    trailing_marker(s);
                    out += s.marker_text;
                }
            }
            s.span = Span{begin, out.size()};
            for (const auto& url : s.urls) id_for(url);
        }
        doc.sentence_count += static_cast<std::size_t>(n);

        for (int i = 0; i < n; ++i) {
            const Sentence& s = sentences[static_cast<std::size_t>(i)];
            std::vector<int> ids;
            if (s.has_marker) {
                for (const auto& url : s.urls)
                    if (int id = url_ids_[url]; std::find(ids.begin(), ids.end(), id) == ids.end())
                        ids.push_back(id);
            } else {
                int j = i + 1;
                while (j < n && !sentences[static_cast<std::size_t>(j)].has_marker) ++j;
                if (j < n && sentences[static_cast<std::size_t>(j)].trailing)
                    for (const auto& url : sentences[static_cast<std::size_t>(j)].urls)
                        if (int id = url_ids_[url]; std::find(ids.begin(), ids.end(), id) == ids.end())
                            ids.push_back(id);
            }
            if (ids.empty()) continue;
            doc.expected.push_back({s.words, s.span, ids, passage_id});
        }
    }

    std::mt19937 rng_;
    std::map<int, std::string> labels_;
    std::vector<std::pair<std::string, std::string>> footnotes_;
    std::map<std::string, int> url_ids_;
    std::vector<std::string> registry_;
};

}  // namespace citecheck::testing
