#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace quantsig {

/// Failure categories surfaced by the library. Each maps to one documented
/// error of a public operation.
enum class Errc {
    // marketdata
    MalformedHeader,
    MalformedNumber,
    DuplicateDate,
    EmptySeries,
    NetworkError,
    SymbolNotFound,
    // indicators
    WindowTooLarge,
    SpanTooLarge,
    LengthMismatch,
    InsufficientHistory,
    // preprocess
    ColumnMismatch,
    ZeroVariance,
    BadFractions,
    TooManyComponents,
    // textcorpus
    MissingColumn,
    EmptyCorpus,
    EmptyVocabulary,
    // models
    SingularSystem,
    SeriesTooShort,
    DivergedLoss,
    ShapeMismatch,
    SingleClassTraining,
    NonBinaryFeatures,
    BadMagic,
    VersionUnsupported,
    CorruptRecord,
    // metrics
    SingleClass,
    // cli / shared
    InvalidArgument,
    ConfigError,
    MissingManifest,
    IoError,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace quantsig
