#pragma once

#include <stdexcept>
#include <string>

namespace seqpred {

// Bad arguments: symbols outside the alphabet, malformed specs, invalid weights.
class input_error : public std::invalid_argument {
public:
    explicit input_error(const std::string& what) : std::invalid_argument(what) {}
};

// Conditioning on a history the measure assigns zero probability.
class undefined_conditional_error : public std::domain_error {
public:
    explicit undefined_conditional_error(const std::string& what) : std::domain_error(what) {}
};

// Posterior requested when every component assigns zero mass to the history.
class undefined_posterior_error : public std::domain_error {
public:
    explicit undefined_posterior_error(const std::string& what) : std::domain_error(what) {}
};

// Exact enumeration refused because |X|^n exceeds the configured cap.
// Callers wanting larger horizons must switch to Monte Carlo explicitly.
class enumeration_cap_error : public std::runtime_error {
public:
    explicit enumeration_cap_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace seqpred
