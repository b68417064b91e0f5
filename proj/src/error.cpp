#include "quantsig/error.hpp"

namespace quantsig {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::MalformedHeader: return "MalformedHeader";
        case Errc::MalformedNumber: return "MalformedNumber";
        case Errc::DuplicateDate: return "DuplicateDate";
        case Errc::EmptySeries: return "EmptySeries";
        case Errc::NetworkError: return "NetworkError";
        case Errc::SymbolNotFound: return "SymbolNotFound";
        case Errc::WindowTooLarge: return "WindowTooLarge";
        case Errc::SpanTooLarge: return "SpanTooLarge";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::InsufficientHistory: return "InsufficientHistory";
        case Errc::ColumnMismatch: return "ColumnMismatch";
        case Errc::ZeroVariance: return "ZeroVariance";
        case Errc::BadFractions: return "BadFractions";
        case Errc::TooManyComponents: return "TooManyComponents";
        case Errc::MissingColumn: return "MissingColumn";
        case Errc::EmptyCorpus: return "EmptyCorpus";
        case Errc::EmptyVocabulary: return "EmptyVocabulary";
        case Errc::SingularSystem: return "SingularSystem";
        case Errc::SeriesTooShort: return "SeriesTooShort";
        case Errc::DivergedLoss: return "DivergedLoss";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::SingleClassTraining: return "SingleClassTraining";
        case Errc::NonBinaryFeatures: return "NonBinaryFeatures";
        case Errc::BadMagic: return "BadMagic";
        case Errc::VersionUnsupported: return "VersionUnsupported";
        case Errc::CorruptRecord: return "CorruptRecord";
        case Errc::SingleClass: return "SingleClass";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::ConfigError: return "ConfigError";
        case Errc::MissingManifest: return "MissingManifest";
        case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace quantsig
