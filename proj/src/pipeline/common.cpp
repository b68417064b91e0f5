#include "common.hpp"

#include "quantsig/io.hpp"

namespace quantsig::pipeline::detail {

std::vector<std::string> Bundle::commit(const std::filesystem::path& dir,
                                        std::vector<std::pair<std::string, std::string>> manifest) {
    std::vector<std::string> names;
    std::string listing;
    for (const auto& [name, content] : files_) {
        if (!listing.empty()) listing += ',';
        listing += name;
    }
    manifest.emplace_back("files", listing);
    std::string text;
    for (const auto& [k, v] : manifest) text += k + "=" + v + "\n";

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw CommandError(ExitCode::data, "cannot create " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    try {
        for (const auto& [name, content] : files_) {
            const auto path = dir / name;
            std::filesystem::create_directories(path.parent_path());
            io::write_file_atomic(path, content);
            written.push_back(path);
            names.push_back(name);
        }
        io::write_file_atomic(dir / "manifest.txt", text);
    } catch (const std::exception& err) {
        for (const auto& p : written) std::filesystem::remove(p, ec);
        throw CommandError(ExitCode::data, std::string("writing outputs failed: ") + err.what());
    }
    names.push_back("manifest.txt");
    return names;
}

std::vector<std::pair<std::string, std::string>> config_manifest_entries(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    const auto text = canonical_config(cfg);
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const auto line = text.substr(pos, nl - pos);
        const auto eq = line.find('=');
        out.emplace_back("config." + line.substr(0, eq), line.substr(eq + 1));
        pos = nl + 1;
    }
    return out;
}

void check_config(const RunConfig& cfg) {
    try {
        validate_config(cfg);
    } catch (const Error& err) {
        throw CommandError(ExitCode::usage, err.what());
    }
}

}  // namespace quantsig::pipeline::detail
