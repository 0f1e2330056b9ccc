#include "imcrawler/error.hpp"

namespace imcrawler {

std::string_view category_name(ErrorCategory c)
{
    switch (c) {
    case ErrorCategory::Config: return "CONFIG";
    case ErrorCategory::Io: return "IO";
    case ErrorCategory::Param: return "PARAM";
    case ErrorCategory::Parse: return "PARSE";
    case ErrorCategory::Fetch: return "FETCH";
    case ErrorCategory::Auth: return "AUTH";
    case ErrorCategory::Store: return "STORE";
    case ErrorCategory::Agent: return "AGENT";
    case ErrorCategory::Usage: return "USAGE";
    }
    return "UNKNOWN";
}

} // namespace imcrawler
