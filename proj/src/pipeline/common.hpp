#pragma once

#include "quantsig/error.hpp"
#include "quantsig/pipeline.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace quantsig::pipeline::detail {

/// Runs `fn`, turning library errors into CommandError with `code`.
/// Config errors always map to the usage code.
template <typename Fn>
auto stage(ExitCode code, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const CommandError&) {
        throw;
    } catch (const Error& err) {
        throw CommandError(err.code() == Errc::ConfigError ? ExitCode::usage : code, err.what());
    } catch (const std::exception& err) {
        throw CommandError(code, err.what());
    }
}

/// Output files collected in memory and written together at the end, so a
/// failed run leaves nothing behind.
class Bundle {
public:
    void add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }

    /// Appends manifest.txt (listing the other files) and writes everything.
    std::vector<std::string> commit(const std::filesystem::path& dir, std::vector<std::pair<std::string, std::string>> manifest);

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

/// `config.<key>=<value>` entries for the manifest.
std::vector<std::pair<std::string, std::string>> config_manifest_entries(const RunConfig& cfg);

void check_config(const RunConfig& cfg);

}  // namespace quantsig::pipeline::detail
