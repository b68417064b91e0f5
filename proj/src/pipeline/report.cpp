#include "common.hpp"

#include "quantsig/io.hpp"
#include "quantsig/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace quantsig::pipeline {

std::map<std::string, std::string> read_manifest(const std::filesystem::path& run_dir) {
    const auto path = run_dir / "manifest.txt";
    if (!std::filesystem::is_regular_file(path))
        throw Error(Errc::MissingManifest, "no manifest.txt in " + run_dir.generic_string());
    std::map<std::string, std::string> out;
    const auto text = io::read_file(path);
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        const auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    if (!out.count("kind") || !out.count("config_hash"))
        throw Error(Errc::MissingManifest, path.generic_string() + " lacks kind or config_hash");
    return out;
}

namespace {

struct Run {
    std::filesystem::path dir;
    std::map<std::string, std::string> manifest;
};

// Test-split metric values keyed by model/family name, in file order.
std::vector<std::pair<std::string, std::vector<std::string>>> test_rows(const Run& run,
                                                                        const std::vector<std::string>& metric_names) {
    const auto rows = io::parse_csv(io::read_file(run.dir / "metrics.csv"));
    if (rows.empty()) throw Error(Errc::MissingManifest, "empty metrics.csv in " + run.dir.generic_string());
    const auto& header = rows.front();
    auto col = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error(Errc::MissingManifest, "metrics.csv lacks column " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto split_col = col("split");
    const auto name_col = 0;
    std::vector<std::pair<std::string, std::vector<std::string>>> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size() || rows[r][split_col] != "test") continue;
        std::vector<std::string> values;
        for (const auto& m : metric_names) values.push_back(rows[r][col(m)]);
        out.emplace_back(rows[r][name_col], std::move(values));
    }
    return out;
}

std::string fixed_or_raw(const std::string& v) {
    double d = 0.0;
    return io::parse_real(v, d) ? io::format_fixed(d, 3) : v;
}

}  // namespace

MergedReport cmd_report(const std::vector<std::filesystem::path>& run_dirs) {
    if (run_dirs.empty()) throw CommandError(ExitCode::usage, "report needs at least one run directory");
    MergedReport report;
    std::vector<Run> runs;
    std::map<std::string, std::filesystem::path> by_hash;
    for (const auto& dir : run_dirs) {
        auto manifest = detail::stage(ExitCode::data, [&] { return read_manifest(dir); });
        const auto& hash = manifest["config_hash"];
        if (auto it = by_hash.find(hash); it != by_hash.end()) {
            report.notes.push_back(fmt::format("skipped {}: same config hash {} as {}", dir.generic_string(), hash,
                                               it->second.generic_string()));
            continue;
        }
        by_hash.emplace(hash, dir);
        runs.push_back({dir, std::move(manifest)});
    }
    report.kind = runs.front().manifest["kind"];
    for (const auto& r : runs) {
        if (r.manifest.at("kind") != report.kind)
            throw CommandError(ExitCode::usage, "cannot merge " + report.kind + " and " + r.manifest.at("kind") + " runs");
    }
    if (report.kind != "price" && report.kind != "sentiment")
        throw CommandError(ExitCode::usage, "runs of kind '" + report.kind + "' have no metrics to merge");

    // Any differing config key other than the model choice is worth flagging.
    std::set<std::string> keys;
    for (const auto& r : runs)
        for (const auto& [k, v] : r.manifest)
            if (k.rfind("config.", 0) == 0 && k != "config.model") keys.insert(k);
    for (const auto& k : keys) {
        std::set<std::string> values;
        std::string detail;
        for (const auto& r : runs) {
            const auto it = r.manifest.find(k);
            const auto v = it == r.manifest.end() ? std::string("<unset>") : it->second;
            values.insert(v);
            detail += fmt::format("{}{}={}", detail.empty() ? "" : ", ", r.dir.generic_string(), v);
        }
        if (values.size() > 1) report.notes.push_back(fmt::format("config mismatch: {} ({})", k.substr(7), detail));
    }

    const auto& names = report.kind == "price" ? metrics::regression_metric_names() : metrics::classification_metric_names();
    std::vector<std::vector<std::string>> columns;
    std::set<std::string> used;
    for (const auto& run : runs) {
        const auto rows = detail::stage(ExitCode::data, [&] { return test_rows(run, names); });
        for (const auto& [model, values] : rows) {
            auto label = display_name(model);
            if (!used.insert(label).second) {
                label += " [" + run.manifest.at("config_hash").substr(0, 8) + "]";
                used.insert(label);
            }
            report.columns.push_back(label);
            columns.push_back(values);
        }
    }

    std::vector<std::string> header{report.kind == "price" ? "Metric" : "Metrics"};
    header.insert(header.end(), report.columns.begin(), report.columns.end());
    report.csv = io::csv_line(header);
    std::vector<std::vector<std::string>> table;
    for (std::size_t m = 0; m < names.size(); ++m) {
        std::vector<std::string> csv_row{names[m]}, text_row{names[m]};
        for (const auto& c : columns) {
            csv_row.push_back(c[m]);
            text_row.push_back(fixed_or_raw(c[m]));
        }
        report.csv += io::csv_line(csv_row);
        table.push_back(std::move(text_row));
    }
    report.text = metrics::render_text_table(header, table);
    for (const auto& n : report.notes) report.text += "note: " + n + "\n";
    return report;
}

}  // namespace quantsig::pipeline
