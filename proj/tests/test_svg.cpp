#include "quantsig/svg.hpp"

#include <gtest/gtest.h>

#include <stack>
#include <string>

using namespace quantsig;

namespace {

// Minimal XML checker: balanced tags, quoted attributes, escaped text.
bool well_formed(const std::string& doc, std::string* why) {
    std::stack<std::string> open;
    std::size_t i = doc.find('<');
    if (doc.compare(0, 5, "<?xml") == 0) i = doc.find("?>") + 2;
    for (i = doc.find('<', i); i != std::string::npos; i = doc.find('<', i)) {
        const auto end = doc.find('>', i);
        if (end == std::string::npos) return *why = "unterminated tag", false;
        std::string tag = doc.substr(i + 1, end - i - 1);
        if (tag.rfind("!--", 0) == 0) {
            i = doc.find("-->", i) + 3;
            continue;
        }
        std::size_t quotes = 0;
        for (char c : tag) quotes += c == '"';
        if (quotes % 2) return *why = "odd quotes in <" + tag + ">", false;
        if (tag[0] == '/') {
            const auto name = tag.substr(1);
            if (open.empty() || open.top() != name) return *why = "mismatched </" + name + ">", false;
            open.pop();
        } else if (tag.back() != '/') {
            open.push(tag.substr(0, tag.find_first_of(" \n\t")));
        }
        // text between tags may not hold a raw '<' or an unescaped '&'
        const auto next = doc.find('<', end);
        const auto text = doc.substr(end + 1, (next == std::string::npos ? doc.size() : next) - end - 1);
        for (std::size_t a = text.find('&'); a != std::string::npos; a = text.find('&', a + 1)) {
            const auto semi = text.find(';', a);
            if (semi == std::string::npos || semi - a > 6) return *why = "bare & in text", false;
        }
        i = end;
    }
    if (!open.empty()) return *why = "unclosed <" + open.top() + ">", false;
    return true;
}

}  // namespace

TEST(Svg, LineChartIsWellFormedAndSelfContained) {
    svg::ChartSpec spec;
    spec.title = "AAPL <close> & \"predicted\"";
    spec.x_label = "date";
    spec.y_label = "close";
    svg::LineSeries a{"predicted", {0, 1, 2, 3}, {10, 11.5, 11, 12}, "#1f77b4", false};
    svg::LineSeries b{"actual & more", {0, 1, 2, 3}, {10.2, 11.1, 11.3, 12.4}, "#2ca02c", true};
    for (int i = 0; i < 4; ++i) spec.x_tick_labels.push_back("2021-01-0" + std::to_string(i + 1));
    const auto doc = svg::line_chart(spec, {a, b});
    std::string why;
    EXPECT_TRUE(well_formed(doc, &why)) << why;
    EXPECT_NE(doc.find("<svg"), std::string::npos);
    EXPECT_NE(doc.find("stroke-dasharray"), std::string::npos);
    EXPECT_NE(doc.find("&lt;close&gt; &amp;"), std::string::npos);
    EXPECT_EQ(doc.find("href"), std::string::npos);
    EXPECT_EQ(doc.find("http://", doc.find("<svg") + 60), std::string::npos);
}

TEST(Svg, DiagonalAndDegenerateSeries) {
    svg::ChartSpec spec;
    spec.title = "ROC";
    spec.show_diagonal = true;
    const auto roc = svg::line_chart(spec, {svg::LineSeries{"lr", {0, 0.2, 1}, {0, 0.7, 1}, "#d62728", false}});
    std::string why;
    EXPECT_TRUE(well_formed(roc, &why)) << why;
    // a flat single-point series still renders finite coordinates
    const auto flat = svg::line_chart(spec, {svg::LineSeries{"one", {1}, {5}, "#000000", false}});
    EXPECT_TRUE(well_formed(flat, &why)) << why;
    EXPECT_EQ(flat.find("nan"), std::string::npos);
    EXPECT_EQ(flat.find("inf"), std::string::npos);
}

TEST(Svg, OutputIsDeterministic) {
    svg::ChartSpec spec;
    spec.title = "t";
    const svg::LineSeries s{"s", {0, 1}, {0.1, 0.30000000000000004}, "#111111", false};
    EXPECT_EQ(svg::line_chart(spec, {s}), svg::line_chart(spec, {s}));
    EXPECT_EQ(svg::escape("a<b>&\"'"), "a&lt;b&gt;&amp;&quot;&apos;");
}
