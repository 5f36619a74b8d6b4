#pragma once

#include <stdexcept>
#include <string>

namespace rsearch {

// Layout text could not be parsed (non-rectangular grid, unknown character).
struct MalformedGridError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Layout is missing a required entity (pot, dispenser, serve window, start).
struct MissingEntityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// step() called on a finished episode.
struct EpisodeFinishedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Feature vector was produced against a different schema than the program.
struct SchemaMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mismatched sequence lengths passed to advantage estimation.
struct LengthMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A training loss became non-finite; the candidate is aborted.
struct NonFiniteLossError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Proposer backend could not be reached after bounded retries.
struct BackendUnreachableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Proposer response contained no fenced program blocks.
struct ExtractionEmptyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Search finished without a single valid trained candidate.
struct NoValidCandidatesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rsearch
