#include "msa/labels.hpp"

#include <cmath>

#include "msa/error.hpp"

namespace msa::labels {

namespace {
void check_range(double score) {
  if (!(score >= kScoreMin && score <= kScoreMax))
    throw DomainError("sentiment score " + std::to_string(score) +
                      " outside [-3, +3]");
}
}  // namespace

Polarity polarity_of(double score) {
  check_range(score);
  return score >= 0.0 ? Polarity::Positive : Polarity::Negative;
}

Intensity intensity_of(double score) {
  check_range(score);
  const double a = std::fabs(score);
  if (a >= 2.5) return Intensity::Strong;
  if (a >= 1.5) return Intensity::Medium;
  if (a >= 0.5) return Intensity::Weak;
  return Intensity::Neutral;
}

LabelBundle bundle_of(double score) {
  return {score, polarity_of(score), intensity_of(score)};
}

TargetRecord encode_targets(const LabelBundle& bundle) {
  TargetRecord t{bundle.score,
                 bundle.polarity == Polarity::Positive ? 1.0 : 0.0,
                 {0.0, 0.0, 0.0, 0.0}};
  t.intensity_onehot[static_cast<int>(bundle.intensity)] = 1.0;
  return t;
}

const char* to_string(Polarity p) {
  return p == Polarity::Positive ? "Positive" : "Negative";
}

const char* to_string(Intensity i) {
  switch (i) {
    case Intensity::Neutral: return "Neutral";
    case Intensity::Weak: return "Weak";
    case Intensity::Medium: return "Medium";
    case Intensity::Strong: return "Strong";
  }
  return "?";
}

}  // namespace msa::labels
