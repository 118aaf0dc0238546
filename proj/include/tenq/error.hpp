#pragma once

#include <stdexcept>
#include <string>

namespace tenq {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define TENQ_DEFINE_ERROR(Name)             \
    class Name : public Error {             \
    public:                                 \
        using Error::Error;                 \
    }

// ingest
TENQ_DEFINE_ERROR(NotFound);
TENQ_DEFINE_ERROR(NetworkError);
TENQ_DEFINE_ERROR(CacheCorrupt);
TENQ_DEFINE_ERROR(MalformedEnvelope);
TENQ_DEFINE_ERROR(InvalidAccession);

// docmodel
TENQ_DEFINE_ERROR(UnparsableHtml);

// classifiers
TENQ_DEFINE_ERROR(TooFewExamples);
TENQ_DEFINE_ERROR(DegenerateData);
TENQ_DEFINE_ERROR(BackendUnavailable);
TENQ_DEFINE_ERROR(ProtocolError);
TENQ_DEFINE_ERROR(ModelFormatError);

// store
TENQ_DEFINE_ERROR(IoError);
TENQ_DEFINE_ERROR(DuplicateKey);

// cli / config
TENQ_DEFINE_ERROR(ConfigError);
TENQ_DEFINE_ERROR(PortInUse);

#undef TENQ_DEFINE_ERROR

}  // namespace tenq
