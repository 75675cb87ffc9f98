// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace iterground {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// geometry
class ViewportOutOfBounds : public Error {
public:
    using Error::Error;
};
class GeometryDegenerate : public Error {
public:
    using Error::Error;
};
class DimsMismatch : public Error {
public:
    using Error::Error;
};

// backends
class UnparseableReply : public Error {
public:
    using Error::Error;
};
class BackendUnavailable : public Error {
public:
    using Error::Error;
};
class Timeout : public Error {
public:
    using Error::Error;
};
class ScriptExhausted : public Error {
public:
    using Error::Error;
};
class MissingGroundTruth : public Error {
public:
    using Error::Error;
};

// pipeline: a backend error annotated with the iteration it occurred in
class BackendFailure : public Error {
public:
    BackendFailure(const std::string& what, int iteration)
        : Error(what), iteration(iteration) {}
    int iteration;
};

// harness manifests
class ManifestError : public Error {
public:
    using Error::Error;
};
class ManifestNotFound : public ManifestError {
public:
    using ManifestError::ManifestError;
};
class MalformedRecord : public ManifestError {
public:
    MalformedRecord(const std::string& what, int line)
        : ManifestError(what + " (line " + std::to_string(line) + ")"), line(line) {}
    int line;
};
class ImageMissing : public ManifestError {
public:
    using ManifestError::ManifestError;
};
class DegenerateBBox : public ManifestError {
public:
    using ManifestError::ManifestError;
};

// simlab
class ElementsDontFit : public Error {
public:
    using Error::Error;
};

// filesystem / serialization
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace iterground
