#pragma once

#include <stdexcept>
#include <string>

namespace memwave {

// Error taxonomy. Construction-time guards throw ConfigError subtypes; runtime
// numerical guards throw NumericError subtypes. The CLI maps these onto exit
// codes, so the class names are part of the external contract.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

// Kernel construction: every memory term needs weight > 0 and rate > 0.
struct NonPositiveTerm : ConfigError {
  using ConfigError::ConfigError;
};

// Kernel construction: the total relaxation mass must stay below 1, otherwise
// the residual elastic operator loses coercivity.
struct MassNotLessThanOne : ConfigError {
  using ConfigError::ConfigError;
};

// Operator/state dimension disagreement.
struct ShapeMismatch : ConfigError {
  using ConfigError::ConfigError;
};

// Delay family leaves [0, tau_bar] (checked structurally and on audit grids).
struct DelayOutOfRange : ConfigError {
  using ConfigError::ConfigError;
};

// A history family tag outside the supported set.
struct UnsupportedHistoryFamily : ConfigError {
  using ConfigError::ConfigError;
};

// A dimension parameter (mode count, grid size) is not usable.
struct InvalidDimension : ConfigError {
  using ConfigError::ConfigError;
};

// Feedback observation interval is empty or degenerate.
struct EmptyObservationSet : ConfigError {
  using ConfigError::ConfigError;
};

// Gain family parameters make the windowed integral budget diverge.
struct UnboundedBudget : ConfigError {
  using ConfigError::ConfigError;
};

// Cross-field scenario contradiction (indices vs mode count, dt vs tau_bar).
struct InconsistentConfig : ConfigError {
  using ConfigError::ConfigError;
};

// A history lookup fell outside the covered window.
struct HistoryGap : Error {
  using Error::Error;
};

struct NumericError : Error {
  using Error::Error;
};

// A state or operator evaluation produced a non-finite value, or the sup-norm
// crossed the divergence threshold mid-run (blow-up, not a crash).
struct NonFiniteValue : NumericError {
  using NumericError::NumericError;
};

// Negative argument to a positive-domain map (h inverse).
struct NegativeArgument : NumericError {
  using NumericError::NumericError;
};

// Vanishing-delay corrector failed to settle.
struct CorrectorDiverged : NumericError {
  using NumericError::NumericError;
};

// Decay fitting needs strictly positive energy samples on the window.
struct NonPositiveEnergy : NumericError {
  using NumericError::NumericError;
};

// Fixed-point horizon too long for the available contraction budget.
struct NotAContraction : NumericError {
  using NumericError::NumericError;
};

// Iteration failed to reach tolerance within the iteration cap.
struct NoConvergence : NumericError {
  using NumericError::NumericError;
};

// The undelayed linear part has no negative spectral abscissa to certify.
struct NotExponentiallyStable : NumericError {
  using NumericError::NumericError;
};

// A certification hypothesis cannot be satisfied for this configuration.
struct InfeasibleHypothesis : NumericError {
  using NumericError::NumericError;
};

// Config text problems.
struct ParseError : ConfigError {
  using ConfigError::ConfigError;
};
struct UnknownKey : ParseError {
  using ParseError::ParseError;
};
struct UnknownPreset : ConfigError {
  using ConfigError::ConfigError;
};

}  // namespace memwave
