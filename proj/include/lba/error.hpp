#ifndef LBA_ERROR_HPP_
#define LBA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace lba {

// Single exception type for all domain errors. The kind makes error paths
// testable without a class per failure mode.
struct Error : std::runtime_error {
  enum class Kind {
    Shape,             // tensor/op shape mismatch, empty sequence
    Parse,             // malformed text input (alignments, manifests, configs)
    Vocabulary,        // word outside its category vocabulary
    DegenerateRoi,     // mouth rectangle collapsed
    Format,            // bad magic/version/truncation in a binary or store file
    Capacity,          // pair request exceeds positive-pair capacity
    Constraint,        // batch key constraint unsatisfiable / violated
    Config,            // invalid configuration value
    NonFinite,         // non-finite gradient or loss; optimizer step aborted
    Metric,            // undefined metric (no positives or no negatives)
    Io,                // filesystem failure
    NotEnrolled,       // verify for unknown user
    EnrollConflict,    // duplicate enrollment without overwrite
    StaleEnrollment,   // checkpoint fingerprint mismatch
  };

  Kind kind;
  Error(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

[[noreturn]] inline void fail(Error::Kind k, const std::string& msg) {
  throw Error(k, msg);
}

}  // namespace lba

#endif  // LBA_ERROR_HPP_
