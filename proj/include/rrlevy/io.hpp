#pragma once

#include <string>
#include <vector>

#include "rrlevy/identities.hpp"
#include "rrlevy/model.hpp"
#include "rrlevy/simulate.hpp"
#include "rrlevy/verify.hpp"

namespace rrlevy {

/// Raised with a field-level diagnostic when a configuration file cannot
/// be parsed or carries unknown keys.
struct parse_error : std::runtime_error {
    explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

/// Model files are JSON objects with exactly the fields
///   sigma, drift, jumps = [{rate, exp_rate}, ...], delta, b.
/// Unknown keys are rejected.
ModelSpec parse_model_json(const std::string& text);
ModelSpec load_model_file(const std::string& path);

std::string model_to_json(const ModelSpec& model);

/// FNV-1a hash of the canonical model serialization, as 16 hex digits.
/// Embedded in every output so results can be tied to their inputs.
std::string model_hash(const ModelSpec& model);

std::vector<IdentityRequest> parse_request_json(const std::string& text);
std::vector<IdentityRequest> load_request_file(const std::string& path);

SimConfig parse_sim_config_json(const std::string& text);
SimConfig load_sim_config_file(const std::string& path);

std::string identity_results_to_json(const ModelSpec& model,
                                     const std::vector<IdentityRequest>& requests,
                                     const std::vector<IdentityValue>& values);
std::string identity_results_to_csv(const ModelSpec& model,
                                    const std::vector<IdentityRequest>& requests,
                                    const std::vector<IdentityValue>& values);

std::string estimates_to_json(const ModelSpec& model, const SimConfig& config,
                              const EstimateSet& estimates);

std::string reports_to_json(const ModelSpec& model, const std::vector<VerificationReport>& reports);
std::string reports_to_table(const std::vector<VerificationReport>& reports);

/// 17 significant digits; round-trips doubles exactly.
std::string format_double(double value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace rrlevy
