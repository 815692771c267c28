#pragma once

#include <array>
#include <string>

namespace msa::labels {

enum class Polarity { Negative = 0, Positive = 1 };

// Fixed class order; index doubles as the one-hot position.
enum class Intensity { Neutral = 0, Weak = 1, Medium = 2, Strong = 3 };

constexpr double kScoreMin = -3.0;
constexpr double kScoreMax = 3.0;

/// Positive iff score >= 0. Throws DomainError outside [-3, +3].
Polarity polarity_of(double score);

/// From |score|: Strong >= 2.5 > Medium >= 1.5 > Weak >= 0.5 > Neutral.
/// Throws DomainError outside [-3, +3].
Intensity intensity_of(double score);

struct LabelBundle {
  double score;
  Polarity polarity;
  Intensity intensity;
};

/// Decomposes a gold score into its polarity and intensity classes.
LabelBundle bundle_of(double score);

// Training targets: polarity as a {0,1} scalar (Positive = 1), intensity as a
// one-hot 4-vector in class order [Neutral, Weak, Medium, Strong].
struct TargetRecord {
  double score;
  double polarity01;
  std::array<double, 4> intensity_onehot;
};

TargetRecord encode_targets(const LabelBundle& bundle);

const char* to_string(Polarity p);
const char* to_string(Intensity i);

}  // namespace msa::labels
