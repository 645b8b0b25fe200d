#pragma once

#include <stdexcept>
#include <string>

// Error policy: hard contract violations (bad files, bad arguments, unusable
// backends) throw one of the types below. Expected soft outcomes (no plate in
// a caption, no detection on a frame) are expressed with std::optional at the
// call site instead of exceptions.

namespace oneshot {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// ---- video / file io ----

struct IoError : Error {
    using Error::Error;
};

struct MalformedPpm : Error {
    using Error::Error;
};

struct MissingFrame : Error {
    int index;
    explicit MissingFrame(int idx)
        : Error("missing frame " + std::to_string(idx) + " in sequence"), index(idx) {}
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct ParseError : Error {
    int line;  // 1-based line number when parsing line-oriented files, else 0
    explicit ParseError(const std::string& msg, int line_no = 0)
        : Error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg : msg),
          line(line_no) {}
};

struct OutOfBounds : Error {
    using Error::Error;
};

// ---- point selection ----

struct InvalidOffset : Error {
    using Error::Error;
};

struct MaskTooSmall : Error {
    using Error::Error;
};

// ---- tracking ----

struct DegeneratePatch : Error {
    using Error::Error;
};

struct LengthMismatch : Error {
    using Error::Error;
};

struct BackendFailure : Error {
    using Error::Error;
};

// ---- segmentation ----

struct EmptyMask : Error {
    using Error::Error;
};

struct AreaCapExceeded : Error {
    using Error::Error;
};

// ---- recognition ----

struct UnknownPrompt : Error {
    using Error::Error;
};

struct NoGlyphs : Error {
    using Error::Error;
};

struct BackendError : Error {
    int status;  // HTTP status, 0 when the failure is not status-shaped
    explicit BackendError(const std::string& msg, int status_code = 0)
        : Error(msg), status(status_code) {}
};

struct BackendTimeout : Error {
    using Error::Error;
};

// ---- evaluation ----

struct DegenerateBox : Error {
    using Error::Error;
};

struct NoGroundTruth : Error {
    using Error::Error;
};

// ---- synthetic scene generation ----

struct EmptyString : Error {
    using Error::Error;
};

struct UnknownGlyph : Error {
    char glyph;
    explicit UnknownGlyph(char g)
        : Error(std::string("no font entry for glyph '") + g + "'"), glyph(g) {}
};

struct StringTooLong : Error {
    using Error::Error;
};

struct PlateOutOfBounds : Error {
    using Error::Error;
};

struct InvalidSceneConfig : Error {
    using Error::Error;
};

// ---- pipeline / configuration ----

struct ConfigError : Error {
    using Error::Error;
};

struct AnnotationsEmpty : Error {
    using Error::Error;
};

}  // namespace oneshot
