#pragma once

#include <stdexcept>
#include <string>

namespace gazeload {

enum class ErrorCode {
  // ingestion
  MissingColumn,
  NonMonotonicTimestamp,
  BadManifest,
  BadRow,
  EmptyAfterTrim,
  IoError,
  // signal processing
  EmptySignal,
  CutoffAboveNyquist,
  NaNInput,
  TooFewSamples,
  // fixation extraction / dataset
  LengthMismatch,
  OutOfRange,
  SessionTooShort,
  DegenerateSplit,
  // models
  DimensionMismatch,
  SingleClassData,
  EmptySet,
  FoldTooSmall,
  EmptyTestSet,
  // streaming
  OutOfOrderSample,
  // config
  InvalidConfig,
};

const char* error_code_name(ErrorCode c);

// All recoverable data/config failures are reported through this one type so
// callers (and the CLI exit-code mapping) can switch on the code.
class GazeError : public std::runtime_error {
 public:
  GazeError(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::BadManifest: return "BadManifest";
    case ErrorCode::BadRow: return "BadRow";
    case ErrorCode::EmptyAfterTrim: return "EmptyAfterTrim";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptySignal: return "EmptySignal";
    case ErrorCode::CutoffAboveNyquist: return "CutoffAboveNyquist";
    case ErrorCode::NaNInput: return "NaNInput";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::SessionTooShort: return "SessionTooShort";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleClassData: return "SingleClassData";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::FoldTooSmall: return "FoldTooSmall";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::OutOfOrderSample: return "OutOfOrderSample";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "UnknownError";
}

}  // namespace gazeload
